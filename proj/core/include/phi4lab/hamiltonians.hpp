#pragma once

#include <span>
#include <vector>

#include "phi4lab/coupling.hpp"
#include "phi4lab/fock.hpp"

namespace phi4lab
{

/// Normal-ordered quartic interaction built from an arbitrary kernel:
/// (4 pi)^{-2} dk^2 sum_j C(4,j) sum_q W[q] a^dag_{q1}..a^dag_{qj} a_{-q(j+1)}..a_{-q4}, with W from build_kernel.
FockOperator assemble_interaction(const BasisPtr& basis, const KernelW& kernel, bool hermitian_claim = true);

/// H0, N, the coupling and the shift M for one truncated model. V_g(t) is linear in the
/// temporal weights of the coupling terms, so one interaction matrix per term is assembled
/// at construction and combined on demand. Immutable after construction.
class ModelOperators
{
public:
	/// Fixed shift M.
	ModelOperators(BasisPtr basis, CouplingFunction coupling, double shift);

	/// M = M_g + c with M_g estimated on `times` (see estimate_Mg).
	static ModelOperators with_estimated_shift(BasisPtr basis, CouplingFunction coupling, double c,
	                                           std::span<const double> times);

	[[nodiscard]] const BasisPtr& basis() const noexcept { return basis_; }
	[[nodiscard]] std::size_t dimension() const noexcept { return basis_->dimension(); }
	[[nodiscard]] const CouplingFunction& coupling() const noexcept { return coupling_; }
	[[nodiscard]] double shift() const noexcept { return shift_; }
	/// M_g found when the shift was estimated, else NaN.
	[[nodiscard]] double estimated_Mg() const noexcept { return mg_; }

	/// Diagonal of H0.
	[[nodiscard]] const RealVector& free_energies() const noexcept { return energies_; }
	[[nodiscard]] const RealVector& particle_numbers() const noexcept { return numbers_; }
	[[nodiscard]] FockOperator free_hamiltonian() const;
	[[nodiscard]] FockOperator number_operator() const;

	/// V_{d^n g / dt^n}(t); order 0 is V_g(t).
	[[nodiscard]] DenseMatrix interaction(double t, int derivative = 0) const;
	/// H_g(t) = H0 + V_g(t).
	[[nodiscard]] DenseMatrix hamiltonian(double t) const;
	/// H~(t) = H0 + V_g(t) + M.
	[[nodiscard]] DenseMatrix shifted_hamiltonian(double t) const;
	/// True when every term has zero temporal weight at t.
	[[nodiscard]] bool interaction_vanishes(double t) const;

	/// Per-term interaction matrices (temporal weight one).
	[[nodiscard]] const std::vector<DenseMatrix>& term_operators() const noexcept { return terms_; }

	[[nodiscard]] ModelOperators with_shift(double shift) const;

private:
	BasisPtr basis_;
	CouplingFunction coupling_;
	double shift_;
	double mg_;
	RealVector energies_;
	RealVector numbers_;
	std::vector<DenseMatrix> terms_;
};

FockOperator build_interaction(const ModelOperators& model, double t);

/// Delta x sum_x g(x, t) :phi(x)^4: on `grid_points` equally spaced points of the box, with
/// :phi^4: = sum_j C(4,j) phi_+^j phi_-^{4-j}.
FockOperator interaction_xspace_oracle(const ModelOperators& model, double t, int grid_points);
FockOperator interaction_xspace_oracle(const BasisPtr& basis, const CouplingFunction& g, double t, int grid_points);

struct SandwichBoundReport
{
	int j = 0;
	double sandwich_norm = 0.0;
	double w_norm = 0.0;
	double ratio = 0.0;
};

/// ||(N+1)^{-j/2} V_g(t) (N+1)^{-(4-j)/2}|| against the discretized ||W||_2.
SandwichBoundReport sandwich_bound_report(const ModelOperators& model, double t, int j);

/// max over `times` of max(0, -lambda_min(H_g(t))).
double estimate_Mg(const ModelOperators& model, std::span<const double> times);

/// Norms of the scale F_{+2} in F in F_{-2} built on H0.
class ScaleNorms
{
public:
	explicit ScaleNorms(const ModelOperators& model);
	explicit ScaleNorms(RealVector free_energies);

	[[nodiscard]] double norm_plus2(const Vector& psi) const;
	[[nodiscard]] double norm_minus2(const Vector& psi) const;
	/// ||(H0+1)^{-1} B (H0+1)^{-1}||.
	[[nodiscard]] double sandwich_norm(const DenseMatrix& b) const;
	[[nodiscard]] const RealVector& resolvent_diagonal() const noexcept { return inverse_; }

private:
	RealVector plus_;
	RealVector inverse_;
};

struct SmoothnessReport
{
	std::vector<double> h;
	/// D1(h) = sandwich norm of (H(t+h) - H(t))/h - V_{g'}(t)
	std::vector<double> first_defects;
	/// D2(h) = sandwich norm of (V_{g'}(t+h) - V_{g'}(t))/h - V_{g''}(t)
	std::vector<double> second_defects;
	double first_slope = 0.0;
	double second_slope = 0.0;
	bool first_vanishes = false;
	bool second_vanishes = false;
};

SmoothnessReport smoothness_report(const ModelOperators& model, double t, std::span<const double> h_list);

} // namespace phi4lab
