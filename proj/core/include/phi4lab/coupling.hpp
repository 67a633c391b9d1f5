#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "phi4lab/fock.hpp"

namespace phi4lab
{

enum class ProfileKind
{
	bump,
	gaussian
};

/// One-dimensional profile: bump(u) = exp(-1/(1-u^2)) on |u| < 1 with u = (s - center)/width,
/// or gaussian exp(-(s - center)^2 / (2 width^2)). `derivative` > 0 evaluates that derivative.
struct Profile
{
	ProfileKind kind = ProfileKind::bump;
	double center = 0.0;
	double width = 1.0;
	int derivative = 0;

	static Profile bump(double center, double halfwidth);
	static Profile gaussian(double center, double sigma);

	[[nodiscard]] double value(double s) const;
	/// Closed support; nullopt for gaussians.
	[[nodiscard]] std::optional<std::pair<double, double>> support() const;
	/// Integral over the real line of the underived profile.
	[[nodiscard]] double integral() const;
	/// int e^{iks} profile(s) ds.
	[[nodiscard]] cplx fourier(double k) const;
	/// Upper bound on |fourier(k)| valid for every k.
	[[nodiscard]] double fourier_envelope(double k) const;

	friend bool operator==(const Profile&, const Profile&) = default;
};

struct SeparableTerm
{
	double amplitude = 1.0;
	Profile spatial;
	Profile temporal;
};

/// g(x, t) = sum amplitude * spatial(x) * temporal(t).
class CouplingFunction
{
public:
	CouplingFunction() = default;
	explicit CouplingFunction(std::vector<SeparableTerm> terms);

	[[nodiscard]] const std::vector<SeparableTerm>& terms() const noexcept { return terms_; }
	[[nodiscard]] bool is_zero() const noexcept;
	[[nodiscard]] bool bump_only() const noexcept;

	[[nodiscard]] double evaluate(double x, double t) const;
	[[nodiscard]] CouplingFunction time_derivative(int order) const;
	/// g~(k, t) = int dx e^{ikx} g(x, t).
	[[nodiscard]] cplx fourier_spatial(double k, double t) const;

	/// amplitude * temporal(t) of one term; V_g(t) is linear in these.
	[[nodiscard]] double temporal_weight(std::size_t term, double t) const;

	[[nodiscard]] CouplingFunction scaled(double factor) const;
	[[nodiscard]] CouplingFunction operator+(const CouplingFunction& other) const;

	/// Hull of the term supports in t (resp. x); nullopt if any term is gaussian in that variable.
	[[nodiscard]] std::optional<std::pair<double, double>> time_support() const;
	[[nodiscard]] std::optional<std::pair<double, double>> space_support() const;

private:
	std::vector<SeparableTerm> terms_;
};

/// int_{-1}^{1} exp(-1/(1-u^2)) du.
double bump_integral();

/// int_{-1}^{1} cos(kappa u) exp(-1/(1-u^2)) du by the trapezoidal rule, aliasing error below 1e-16.
double bump_fourier(double kappa);

/// W[j1..j4] = g~(-(k_{j1}+...+k_{j4}), t) prod omega_{ji}^{-1/2}. The minus sign makes the
/// kernel expansion equal int dx g(x,t) :phi(x)^4: with phi(x) ~ sum e^{-ikx} (a^dag_k + a_{-k});
/// for even g it is irrelevant.
class KernelW
{
public:
	KernelW(ModeGrid grid, double t, std::vector<cplx> values);

	[[nodiscard]] const ModeGrid& grid() const noexcept { return grid_; }
	[[nodiscard]] double time() const noexcept { return t_; }
	[[nodiscard]] cplx operator()(int j1, int j2, int j3, int j4) const;
	[[nodiscard]] const std::vector<cplx>& values() const noexcept { return values_; }

private:
	ModeGrid grid_;
	double t_;
	std::vector<cplx> values_;
};

KernelW build_kernel(const CouplingFunction& g, const ModeGrid& grid, double t);

/// Discretized L2 norm (dk^4 sum |W|^2)^{1/2}.
double w_l2_norm(const KernelW& w);

/// (int dk |g~(k, t)|^r)^{1/r} over the whole line.
double g_r_norm(const CouplingFunction& g, double t, double r);

/// (int dk omega(k)^{-r})^{1/r} over the whole line, by quadrature.
double omega_inverse_norm(double mass, double r);

struct YoungChainReport
{
	/// (r1, r2), (r3, r4), (r5, r6), (r7, r8)
	std::array<double, 8> exponents{};
	double w_norm = 0.0;
	/// ||omega^{-1}||_{r1}, _{r3}, _{r5}, _{r7}
	std::array<double, 4> omega_norms{};
	/// || |g~|^2 ||_{r8}
	double gtilde_squared_norm = 0.0;
	/// ||g~||_{2 r8} = sqrt of the above; the r-norm the kernel is measured against.
	double g_norm = 0.0;
	double bound = 0.0;
	double ratio = 0.0;
	double ratio_bound = 0.0;
	bool young_relations_hold = false;
	bool bound_holds = false;
};

/// Checks ||W||_2 <= (prod ||omega^{-1}||_{ri})^{1/2} || |g~|^2 ||_{16/15}^{1/2} with unit Young constants.
YoungChainReport young_chain_report(const CouplingFunction& g, const ModeGrid& grid, double t,
                                    double relative_tolerance = 1e-6);

} // namespace phi4lab
