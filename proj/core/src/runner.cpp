#include "phi4lab/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "phi4lab/errors.hpp"
#include "phi4lab/matrix_io.hpp"

namespace phi4lab
{

namespace
{

std::string hex(std::uint64_t v)
{
	char buf[20];
	std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
	return buf;
}

TimeGrid window(const ExperimentConfig& cfg)
{
	return {cfg.time.t1, cfg.time.t2, cfg.time.dt};
}

std::vector<double> shift_estimation_times(const TimeGrid& grid)
{
	return grid.nodes(std::max(1L, grid.steps() / 400));
}

BasisPtr build_basis(const ModelSpec& m)
{
	return enumerate_basis(ModeGrid(m.mass, m.box_length, m.mode_cutoff), m.particle_cutoff, m.max_dimension);
}

/// Appends the checks and tables of `part`, prefixing check names with the part's name.
void merge(ExperimentVerdict& into, const ExperimentVerdict& part)
{
	for(auto check : part.checks)
	{
		check.name = part.name + "." + check.name;
		into.checks.push_back(std::move(check));
	}
	into.measured[part.name] = part.measured;
	for(const auto& t : part.tables)
		into.tables.push_back(t);
	Fnv1a h;
	h.update_value(into.digest);
	h.update_value(part.digest);
	into.digest = h.digest();
}

std::vector<long> refinement_factors(int levels)
{
	std::vector<long> r;
	for(long f = 1, i = 0; i < levels; ++i, f *= 2)
		r.push_back(f);
	return r;
}

nlohmann::json number_or_null(double v)
{
	return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json report_json(const ExperimentConfig& cfg, const ExperimentVerdict& v, std::uint64_t seed)
{
	nlohmann::json j = v.to_json();
	j["config_digest"] = hex(cfg.digest);
	j["seed"] = seed;
	auto& tables = j["tables"] = nlohmann::json::array();
	for(const auto& t : v.tables)
	{
		nlohmann::json rows = nlohmann::json::array();
		for(const auto& row : t.rows)
		{
			nlohmann::json r = nlohmann::json::array();
			for(const double x : row)
				r.push_back(number_or_null(x));
			rows.push_back(std::move(r));
		}
		tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", std::move(rows)}});
	}
	return j;
}

} // namespace

std::string format_csv(const Table& table)
{
	std::string out;
	for(std::size_t i = 0; i < table.columns.size(); ++i)
		out += (i ? "," : "") + table.columns[i];
	out += '\n';
	char buf[40];
	for(const auto& row : table.rows)
	{
		for(std::size_t i = 0; i < row.size(); ++i)
		{
			if(i)
				out += ',';
			if(std::isfinite(row[i]))
			{
				std::snprintf(buf, sizeof buf, "%.17g", row[i]);
				out += buf;
			}
			else
				out += "nan";
		}
		out += '\n';
	}
	return out;
}

std::vector<std::pair<std::string, std::string>> experiment_catalog()
{
	return {
		{"bounds", "kernel L2 norm against the Young-product bound, sandwich ratios, x-space oracle"},
		{"smoothness", "finite-difference defects of dH/dt and d2H/dt2 in the sandwich norm"},
		{"propagate", "unitarity, identity and composition of U(t,s), order of the reference scheme, Yosida scheme"},
		{"smatrix", "unitarity of S(g), shift invariance, window enlargement, stabilization"},
		{"causality", "S(g1+g2) = S(g1) S(g2) for time-ordered disjoint supports"},
		{"qcheck", "Q(t) positivity and form hermiticity, embedding bound on random states"},
		{"sweep", "uniformity of the sandwich ratios across truncations"},
		{"dyson", "S(g_lambda) against the second order Dyson series"},
	};
}

ModelOperators build_model(const ExperimentConfig& cfg)
{
	const BasisPtr basis = build_basis(cfg.model);
	const auto times = shift_estimation_times(window(cfg));
	return ModelOperators::with_estimated_shift(basis, cfg.coupling, cfg.model.shift_c, times);
}

ExperimentVerdict run_experiment(const ExperimentConfig& cfg, const ExperimentSpec& spec, std::uint64_t seed)
{
	const auto& th = spec.tolerances;
	const auto& m = cfg.model;
	if(spec.name == "sweep")
	{
		const double t = spec.time_set ? spec.time : 0.0;
		return uniformity_sweep(m.mass, m.box_length, cfg.coupling, t, spec.truncations, th);
	}
	const TimeGrid grid = window(cfg);
	if(spec.name == "causality")
		return causality_experiment(build_basis(m), spec.later, spec.earlier, m.shift_c, grid,
		                            refinement_factors(cfg.time.refinement_levels), th);
	if(spec.name == "dyson")
		return dyson_experiment(build_basis(m), cfg.coupling, m.shift_c, grid, spec.lambdas, spec.extrapolate, th);

	const ModelOperators model = build_model(cfg);
	if(spec.name == "bounds")
	{
		const std::vector<double> times = spec.times.empty() ? std::vector<double>{0.0} : spec.times;
		return bounds_experiment(model, times, spec.oracle_points, th);
	}
	if(spec.name == "smoothness")
		return smoothness_experiment(model, spec.time_set ? spec.time : 0.0, spec.steps, th);
	if(spec.name == "propagate")
	{
		auto v = propagate_experiment(model, grid, th);
		if(!cfg.schemes.yosida_n.empty() || !cfg.schemes.n_sweep.empty())
			merge(v, yosida_experiment(model, grid, cfg.schemes.yosida_n, cfg.schemes.k_list, cfg.schemes.n_sweep, th));
		return v;
	}
	if(spec.name == "smatrix")
		return smatrix_experiment(model, grid, th);
	if(spec.name == "qcheck")
	{
		std::vector<double> times = spec.times;
		if(times.empty())
			for(int i = 0; i <= 4; ++i)
				times.push_back(grid.node(grid.steps() * i / 4));
		auto v = q_positivity(model, grid, times, th);
		merge(v, embedding_experiment(model, times, spec.samples, seed, th));
		return v;
	}
	throw ConfigError("unknown experiment '" + spec.name + "'");
}

RunResult run(const ExperimentConfig& cfg, const RunOptions& options)
{
	using clock = std::chrono::steady_clock;
	RunResult result;
	result.directory = options.out ? *options.out : cfg.output_dir;
	const std::uint64_t seed = options.seed ? *options.seed : cfg.seed;

	std::error_code ec;
	std::filesystem::create_directories(result.directory, ec);
	if(ec || !std::filesystem::is_directory(result.directory))
		throw ResourceLimitError(result.directory.string() + ": cannot create output directory");

	const auto started = std::chrono::system_clock::now();
	const auto t0 = clock::now();
	result.outcomes.resize(cfg.experiments.size());
	std::atomic<std::size_t> next{0};
	std::mutex log_mutex;

	auto worker = [&] {
		for(std::size_t i = next++; i < cfg.experiments.size(); i = next++)
		{
			const auto& spec = cfg.experiments[i];
			auto& out = result.outcomes[i];
			out.name = spec.name;
			const auto start = clock::now();
			try
			{
				auto verdict = run_experiment(cfg, spec, seed);
				verdict.name = spec.name;
				const auto base = result.directory / spec.name;
				// the report goes last so that its presence means the experiment completed
				for(const auto& table : verdict.tables)
					write_file_atomic(result.directory / (spec.name + "_" + table.name + ".csv"), format_csv(table));
				write_file_atomic(base.string() + ".json", report_json(cfg, verdict, seed).dump(2) + "\n");
				out.status = verdict.passed() ? 0 : 1;
				out.verdict = std::move(verdict);
			}
			catch(const Error& e)
			{
				out.status = e.exit_code();
				out.error = e.what();
			}
			catch(const std::bad_alloc&)
			{
				out.status = 3;
				out.error = "out of memory";
			}
			catch(const std::exception& e)
			{
				out.status = 4;
				out.error = e.what();
			}
			out.seconds = std::chrono::duration<double>(clock::now() - start).count();
			if(options.log)
			{
				const std::lock_guard lock(log_mutex);
				*options.log << (out.status == 0 ? "PASS " : out.status == 1 ? "FAIL " : "ERROR ") << spec.name;
				if(out.verdict)
					for(const auto& c : out.verdict->checks)
						if(!c.pass)
							*options.log << "\n  failed check " << c.name << ": " << c.value << ' ' << c.relation << ' '
							             << c.threshold;
				if(!out.error.empty())
					*options.log << ": " << out.error;
				*options.log << " (" << out.seconds << " s)\n";
			}
		}
	};

	const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, cfg.experiments.size()));
	std::vector<std::thread> pool;
	for(unsigned k = 1; k < threads; ++k)
		pool.emplace_back(worker);
	worker();
	for(auto& t : pool)
		t.join();

	// errors outrank verdict failures; among errors the most severe code wins
	int code = 0;
	for(const auto& o : result.outcomes)
		if(o.status > 1)
			code = std::max(code, o.status);
	if(code == 0)
		for(const auto& o : result.outcomes)
			code = std::max(code, o.status);
	result.exit_code = code;

	nlohmann::json manifest;
	manifest["config"] = cfg.source.string();
	manifest["config_digest"] = hex(cfg.digest);
	manifest["seed"] = seed;
	manifest["threads"] = threads;
	manifest["versions"] = {{"phi4lab", PHI4LAB_VERSION},
	                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION)
	                                      + "." + std::to_string(EIGEN_MINOR_VERSION)},
	                        {"boost", std::to_string(BOOST_VERSION / 100000) + "."
	                                      + std::to_string(BOOST_VERSION / 100 % 1000) + "."
	                                      + std::to_string(BOOST_VERSION % 100)},
	                        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "."
	                                              + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "."
	                                              + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
	manifest["started_unix"] = std::chrono::duration_cast<std::chrono::seconds>(started.time_since_epoch()).count();
	manifest["wall_seconds"] = std::chrono::duration<double>(clock::now() - t0).count();
	manifest["exit_code"] = code;
	auto& list = manifest["experiments"] = nlohmann::json::array();
	for(const auto& o : result.outcomes)
	{
		nlohmann::json e{{"name", o.name}, {"status", o.status}, {"seconds", o.seconds}};
		if(o.verdict)
			e["report"] = o.name + ".json";
		if(!o.error.empty())
			e["error"] = o.error;
		list.push_back(std::move(e));
	}
	write_file_atomic(result.directory / "manifest.json", manifest.dump(2) + "\n");
	return result;
}

void dump_operators(const ExperimentConfig& cfg, const std::filesystem::path& out, double t)
{
	if(!std::isfinite(t))
		throw DomainError("dump time must be finite");
	std::error_code ec;
	std::filesystem::create_directories(out, ec);
	if(ec || !std::filesystem::is_directory(out))
		throw ResourceLimitError(out.string() + ": cannot create output directory");

	const ModelOperators model = build_model(cfg);
	const auto hash = model.basis()->hash();
	write_file_atomic(out / "basis.txt", format_basis(*model.basis()));
	write_matrix(out / "H0.txt", model.free_hamiltonian().dense(), hash, true);
	write_matrix(out / "N.txt", model.number_operator().dense(), hash, true);
	write_matrix(out / "V.txt", model.interaction(t), hash, true);
	write_matrix(out / "Htilde.txt", model.shifted_hamiltonian(t), hash, true);
	write_kernel(out / "W.txt", build_kernel(cfg.coupling, model.basis()->grid(), t));
	nlohmann::json info{{"config_digest", hex(cfg.digest)}, {"t", t}, {"shift", model.shift()},
	                    {"estimated_Mg", number_or_null(model.estimated_Mg())}, {"dimension", model.dimension()}};
	write_file_atomic(out / "dump.json", info.dump(2) + "\n");
}

} // namespace phi4lab
