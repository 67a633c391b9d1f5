#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "phi4lab/analysis.hpp"

namespace phi4lab
{

struct ModelSpec
{
	double mass = 1.0;
	double box_length = 2.0 * 3.141592653589793;
	int mode_cutoff = 1;
	int particle_cutoff = 2;
	double shift_c = 0.5;
	std::size_t max_dimension = 20000;
};

struct TimeSpec
{
	double t1 = 1.0;
	double t2 = 1.0;
	double dt = 1e-2;
	int refinement_levels = 3;  // dt, dt/2, dt/4, ...
};

struct SchemeSpec
{
	std::vector<int> yosida_n;
	std::vector<long> k_list;
	std::vector<int> n_sweep;
};

/// Options of one requested experiment. Fields not used by that experiment stay empty.
struct ExperimentSpec
{
	std::string name;
	Thresholds tolerances;
	std::vector<double> times;
	std::vector<double> steps;
	double time = 0.0;
	bool time_set = false;
	int oracle_points = 0;
	std::size_t samples = 1000;
	std::vector<Truncation> truncations;
	std::vector<double> lambdas;
	bool extrapolate = false;
	CouplingFunction later;
	CouplingFunction earlier;
};

struct ExperimentConfig
{
	std::filesystem::path source;
	ModelSpec model;
	CouplingFunction coupling;
	TimeSpec time;
	SchemeSpec schemes;
	std::vector<ExperimentSpec> experiments;
	std::filesystem::path output_dir = "reports";
	std::uint64_t seed = 20240601;
	/// FNV-1a of the config text.
	std::uint64_t digest = 0;
};

/// Names accepted under `experiments:`.
const std::vector<std::string>& experiment_names();

/// Parses and validates; throws ConfigError with "origin:line:column: field: reason".
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

} // namespace phi4lab
