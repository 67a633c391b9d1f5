#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "phi4lab/errors.hpp"
#include "phi4lab/runner.hpp"

int main(int argc, char** argv)
{
	CLI::App app{"Truncated Fock-space experiments for the quartic boson model"};
	app.require_subcommand(1);
	app.set_version_flag("--version", PHI4LAB_VERSION);

	std::string config;
	std::string out;
	unsigned threads = 1;
	std::optional<std::uint64_t> seed;
	double time = 0.0;

	auto* run = app.add_subcommand("run", "run the experiments listed in a config");
	run->add_option("--config", config, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
	run->add_option("--out", out, "output directory (default: output.directory of the config)");
	run->add_option("--threads", threads, "experiments run in parallel")->check(CLI::PositiveNumber);
	run->add_option("--seed", seed, "overrides the config seed");

	auto* dump = app.add_subcommand("dump", "write H0, N, V(t), H~(t) and the kernel W(t)");
	dump->add_option("--config", config, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
	dump->add_option("--out", out, "output directory")->required();
	dump->add_option("--time,-t", time, "time t");

	auto* list = app.add_subcommand("list-experiments", "print the experiment names");

	try
	{
		app.parse(argc, argv);
	}
	catch(const CLI::ParseError& e)
	{
		// usage errors share the config-error status
		const int code = app.exit(e);
		return code == 0 ? 0 : 2;
	}

	try
	{
		if(list->parsed())
		{
			for(const auto& [name, what] : phi4lab::experiment_catalog())
				std::cout << name << "\t" << what << "\n";
			return 0;
		}
		const auto cfg = phi4lab::load_config(config);
		if(dump->parsed())
		{
			phi4lab::dump_operators(cfg, out, time);
			std::cout << "wrote operators at t = " << time << " to " << out << "\n";
			return 0;
		}
		phi4lab::RunOptions options;
		if(!out.empty())
			options.out = out;
		options.threads = threads;
		options.seed = seed;
		options.log = &std::cerr;
		const auto result = phi4lab::run(cfg, options);
		std::cout << "reports in " << result.directory.string() << ", exit " << result.exit_code << "\n";
		return result.exit_code;
	}
	catch(const phi4lab::Error& e)
	{
		std::cerr << "error: " << e.what() << "\n";
		return e.exit_code();
	}
	catch(const std::bad_alloc&)
	{
		std::cerr << "error: out of memory\n";
		return 3;
	}
	catch(const std::exception& e)
	{
		std::cerr << "error: " << e.what() << "\n";
		return 4;
	}
}
