#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phi4lab/config.hpp"

namespace phi4lab
{

struct RunOptions
{
	/// Overrides the config's output directory when set.
	std::optional<std::filesystem::path> out;
	unsigned threads = 1;
	std::optional<std::uint64_t> seed;
	/// Progress and failures; nullptr for silence.
	std::ostream* log = nullptr;
};

struct ExperimentOutcome
{
	std::string name;
	/// 0 pass, 1 failed verdict, otherwise the error's exit code.
	int status = 0;
	std::string error;
	double seconds = 0.0;
	std::optional<ExperimentVerdict> verdict;
};

struct RunResult
{
	int exit_code = 0;
	std::filesystem::path directory;
	std::vector<ExperimentOutcome> outcomes;
};

/// Truncated model of a config: basis, coupling and the estimated shift M_g + c over the time window.
ModelOperators build_model(const ExperimentConfig& cfg);

/// Runs one configured experiment without writing anything.
ExperimentVerdict run_experiment(const ExperimentConfig& cfg, const ExperimentSpec& spec, std::uint64_t seed);

/// Runs every experiment of the config and writes <name>.json, <name>_<table>.csv and manifest.json.
/// Exit code: 0 all pass, 1 a verdict failed, 2 domain/config error, 3 resource limit, 4 numerical failure.
RunResult run(const ExperimentConfig& cfg, const RunOptions& options);

/// Writes basis.txt, H0.txt, N.txt, V.txt, Htilde.txt and W.txt for time t.
void dump_operators(const ExperimentConfig& cfg, const std::filesystem::path& out, double t);

/// Name and a one-line description of every experiment.
std::vector<std::pair<std::string, std::string>> experiment_catalog();

/// CSV rendering of a table, values printed with 17 significant digits.
std::string format_csv(const Table& table);

} // namespace phi4lab
