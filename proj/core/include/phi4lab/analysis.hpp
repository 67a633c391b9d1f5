#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phi4lab/propagators.hpp"

namespace phi4lab
{

/// Pass/fail thresholds by key. Experiments ask for a key with a fallback; values set
/// from a config are reported with provenance "config", fallbacks with "default".
class Thresholds
{
public:
	void set(const std::string& key, double value) { values_[key] = value; }
	[[nodiscard]] double get(const std::string& key, double fallback) const;
	[[nodiscard]] bool overridden(const std::string& key) const { return values_.contains(key); }
	[[nodiscard]] const std::map<std::string, double>& values() const noexcept { return values_; }

private:
	std::map<std::string, double> values_;
};

struct Table
{
	std::string name;
	std::vector<std::string> columns;
	std::vector<std::vector<double>> rows;
};

struct ExperimentVerdict
{
	struct Check
	{
		std::string name;
		double value = 0.0;
		std::string relation;  // "<", "<=", ">", ">=", "==", "in"
		double threshold = 0.0;
		double upper = 0.0;    // only for "in"
		std::string provenance;
		bool pass = false;
	};

	std::string name;
	std::uint64_t digest = 0;
	std::vector<Check> checks;
	nlohmann::json measured = nlohmann::json::object();
	std::vector<Table> tables;

	[[nodiscard]] bool passed() const;
	[[nodiscard]] nlohmann::json to_json() const;

	void below(const std::string& check, double value, const Thresholds& th, const std::string& key, double fallback);
	void at_most(const std::string& check, double value, const Thresholds& th, const std::string& key, double fallback);
	void above(const std::string& check, double value, const Thresholds& th, const std::string& key, double fallback);
	void at_least(const std::string& check, double value, const Thresholds& th, const std::string& key, double fallback);
	/// center - width <= value <= center + width
	void within(const std::string& check, double value, const Thresholds& th, const std::string& center_key,
	            double center, const std::string& width_key, double width);
	/// Structural identities that hold by construction (e.g. Q(-T1) == 1).
	void exact(const std::string& check, bool holds, double value = 0.0);
};

/// Digest of everything an experiment reads: basis, coupling, grid, shift and thresholds.
std::uint64_t digest_inputs(const ModelOperators& model, const TimeGrid& grid, const Thresholds& th,
                            std::uint64_t extra = 0);

// ---------------------------------------------------------------------------
// Propagator experiments

/// Unitarity, U(t,t) = 1, composition on grid-aligned triples, and the order of the
/// reference scheme against 4x refined grids.
ExperimentVerdict propagate_experiment(const ModelOperators& model, const TimeGrid& grid, const Thresholds& th);

/// Unitarity of S(g), invariance under M -> M + 5, window enlargement, and Dirac-picture
/// stabilization outside the support.
ExperimentVerdict smatrix_experiment(const ModelOperators& model, const TimeGrid& grid, const Thresholds& th);

/// Defects ||U_{n,2K} - U_{n,K}|| against K for every n in `n_list`, and ||U_n - U_ref|| over
/// `n_sweep` with U_n Richardson-extrapolated at the largest K.
ExperimentVerdict yosida_experiment(const ModelOperators& model, const TimeGrid& grid, std::span<const int> n_list,
                                    std::span<const long> k_list, std::span<const int> n_sweep, const Thresholds& th);

/// Causal factorization S(g1+g2) = S(g1) S(g2) with supp_t g1 after supp_t g2. All three S use
/// the shift M_{g1+g2} + c and the same grid; the defect is tracked over `refinements` of dt.
ExperimentVerdict causality_experiment(const BasisPtr& basis, const CouplingFunction& g1, const CouplingFunction& g2,
                                       double c, const TimeGrid& grid, std::span<const long> refinements,
                                       const Thresholds& th);

// ---------------------------------------------------------------------------
// Q(t) and the form norms

/// Q(t) = H~(-T1)^{-1} H~(t). Q(-T1) is returned as the identity.
FockOperator q_operator(const ModelOperators& model, const TimeGrid& grid, double t);

ExperimentVerdict q_positivity(const ModelOperators& model, const TimeGrid& grid, std::span<const double> t_list,
                               const Thresholds& th);

/// <psi, H~(t) psi> <= ||(H0+1)^{-1} H~(t) (H0+1)^{-1}|| ||psi||_{+2}^2 on random states.
ExperimentVerdict embedding_experiment(const ModelOperators& model, std::span<const double> t_list,
                                       std::size_t samples, std::uint64_t seed, const Thresholds& th);

// ---------------------------------------------------------------------------
// Bounds

struct Truncation
{
	int mode_cutoff = 1;
	int particle_cutoff = 2;
};

/// Young chain, N-sandwich ratios and the x-space oracle at each time in `t_list`.
ExperimentVerdict bounds_experiment(const ModelOperators& model, std::span<const double> t_list,
                                    int oracle_points, const Thresholds& th);

/// ||(H0+1)^{-1} V_g(t) (H0+1)^{-1}|| / ||g~(., t)||_{32/15} and the sandwich ratios
/// ||(N+1)^{-j/2} V_g (N+1)^{-(4-j)/2}|| / ||W||_2 over the truncations.
ExperimentVerdict uniformity_sweep(double mass, double box_length, const CouplingFunction& g, double t,
                                   std::span<const Truncation> truncations, const Thresholds& th);

ExperimentVerdict smoothness_experiment(const ModelOperators& model, double t, std::span<const double> h_list,
                                        const Thresholds& th);

// ---------------------------------------------------------------------------
// Dyson series

/// 1 - i int H^D [ - int int_{t > t'} H^D(t) H^D(t') ] over the time support, composite
/// Gauss-Legendre with `panels` panels.
DenseMatrix dyson_oracle(const ModelOperators& model, const TimeGrid& grid, int order, int panels = 256);

/// ||S(g_lambda) - Dyson_k|| over `lambdas` for k = 1, 2. With `extrapolate`, S is the
/// Richardson combination (4 S_{dt/2} - S_dt) / 3.
ExperimentVerdict dyson_experiment(const BasisPtr& basis, const CouplingFunction& g, double c, const TimeGrid& grid,
                                   std::span<const double> lambdas, bool extrapolate, const Thresholds& th);

} // namespace phi4lab
