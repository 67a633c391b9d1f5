#pragma once

#include <span>
#include <string>
#include <vector>

#include "phi4lab/hamiltonians.hpp"

namespace phi4lab
{

/// Uniform grid on [-T1, T2]. The step is rounded down so that an integer number of
/// steps spans the window exactly.
class TimeGrid
{
public:
	TimeGrid(double t1, double t2, double dt);

	[[nodiscard]] double t1() const noexcept { return t1_; }
	[[nodiscard]] double t2() const noexcept { return t2_; }
	[[nodiscard]] double start() const noexcept { return -t1_; }
	[[nodiscard]] double length() const noexcept { return t1_ + t2_; }
	[[nodiscard]] double dt() const noexcept { return length() / static_cast<double>(steps_); }
	[[nodiscard]] long steps() const noexcept { return steps_; }
	[[nodiscard]] double node(long i) const;
	/// Index of the node equal to t (within 1e-9 dt); throws DomainError otherwise.
	[[nodiscard]] long index_of(double t) const;
	[[nodiscard]] bool contains(double t) const noexcept { return t >= start() && t <= t2_; }
	/// Every `stride`-th node plus the last one.
	[[nodiscard]] std::vector<double> nodes(long stride = 1) const;
	/// Throws unless the time support of a bump coupling lies inside the open window.
	void require_support_inside(const CouplingFunction& g) const;

	[[nodiscard]] TimeGrid refined(long factor) const;

private:
	double t1_;
	double t2_;
	long steps_;
};

enum class Scheme
{
	reference,
	yosida,
	sliced,
	dirac,
	smatrix
};

struct PropagatorRecord
{
	Scheme scheme = Scheme::reference;
	double t = 0.0;
	double s = 0.0;
	DenseMatrix matrix;
	double unitarity_defect = 0.0;
	double shift = 0.0;
	double dt = 0.0;   // reference step
	int n = 0;         // Yosida index
	long slices = 0;   // K
	/// Yosida: half of ||U_{n,K*} - U_{n,K*/2}||
	double error_estimate = 0.0;

	[[nodiscard]] std::string tag() const;
};

/// Midpoint-frozen exponential steps U <- exp(-i dt H~(t_mid)) U from s to t with `steps` equal steps.
DenseMatrix evolve_midpoint(const ModelOperators& model, double s, double t, long steps);

/// U(t, s) for grid nodes s <= t.
PropagatorRecord reference_propagator(const ModelOperators& model, const TimeGrid& grid, double t, double s);

/// A_n(t) = n A (n - A)^{-1} with A = -i H~(t), i.e. lambda -> -i n lambda / (n + i lambda) on the spectrum.
FockOperator yosida_generator(const ModelOperators& model, double t, int n);

/// Ordered product of exp((piece) A_n(left slice endpoint)) over K equal slices of [-T1, T2].
PropagatorRecord sliced_propagator(const ModelOperators& model, const TimeGrid& window, int n, long slices, double t,
                                   double s);

/// U_n(t, s) as the Richardson extrapolation 2 U_{n,K} - U_{n,K/2} at K = `finest_slices`.
PropagatorRecord yosida_propagator(const ModelOperators& model, const TimeGrid& window, int n, double t, double s,
                                   long finest_slices = 1024);

/// e^{i (H0 + M) t} U(t, s) e^{-i (H0 + M) s}.
PropagatorRecord dirac_propagator(const ModelOperators& model, const PropagatorRecord& u);

/// H^D(t) = e^{i H0 t} V_g(t) e^{-i H0 t}.
DenseMatrix dirac_hamiltonian(const ModelOperators& model, double t);

/// U^D(T2, -T1) from the reference propagator; the window must contain the time support.
PropagatorRecord s_matrix(const ModelOperators& model, const TimeGrid& grid);

struct GeneratorCheck
{
	std::vector<double> h;
	std::vector<double> defects;
	double slope = 0.0;
};

/// || i (U^D(t+h, s) - U^D(t, s)) / h - H^D(t) U^D(t, s) || over `h_list`.
GeneratorCheck dirac_generator_check(const ModelOperators& model, const TimeGrid& grid, double t, double s,
                                     std::span<const double> h_list);

} // namespace phi4lab
