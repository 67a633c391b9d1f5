#include "phi4lab/propagators.hpp"

#include <cmath>
#include <string>

#include "phi4lab/errors.hpp"

namespace phi4lab
{

TimeGrid::TimeGrid(double t1, double t2, double dt) : t1_(t1), t2_(t2), steps_(0)
{
	if(!std::isfinite(t1) || !std::isfinite(t2) || !(-t1 < t2))
		throw DomainError("time window needs -T1 < T2");
	if(!(dt > 0.0))
		throw DomainError("time step must be positive");
	const double exact = (t1 + t2) / dt;
	steps_ = static_cast<long>(std::ceil(exact - 1e-9 * exact));
	if(steps_ < 1)
		steps_ = 1;
}

double TimeGrid::node(long i) const
{
	if(i < 0 || i > steps_)
		throw DomainError("time node index out of range");
	if(i == steps_)
		return t2_;
	return -t1_ + length() * static_cast<double>(i) / static_cast<double>(steps_);
}

long TimeGrid::index_of(double t) const
{
	const double x = (t + t1_) / dt();
	const long i = std::lround(x);
	if(i < 0 || i > steps_ || std::abs(x - static_cast<double>(i)) > 1e-9)
		throw DomainError("time " + std::to_string(t) + " is not a grid node");
	return i;
}

std::vector<double> TimeGrid::nodes(long stride) const
{
	if(stride < 1)
		throw DomainError("node stride must be positive");
	std::vector<double> r;
	for(long i = 0; i < steps_; i += stride)
		r.push_back(node(i));
	r.push_back(t2_);
	return r;
}

void TimeGrid::require_support_inside(const CouplingFunction& g) const
{
	if(g.terms().empty())
		return;
	const auto support = g.time_support();
	if(!support)
		throw DomainError("the time support of a gaussian coupling is not compact");
	if(!(support->first > -t1_) || !(support->second < t2_))
		throw DomainError("time support of the coupling is not inside (-T1, T2)");
}

TimeGrid TimeGrid::refined(long factor) const
{
	if(factor < 1)
		throw DomainError("refinement factor must be positive");
	TimeGrid r = *this;
	r.steps_ = steps_ * factor;
	return r;
}

std::string PropagatorRecord::tag() const
{
	switch(scheme)
	{
	case Scheme::reference: return "reference";
	case Scheme::yosida: return "yosida(" + std::to_string(n) + "," + std::to_string(slices) + ")";
	case Scheme::sliced: return "sliced(" + std::to_string(n) + "," + std::to_string(slices) + ")";
	case Scheme::dirac: return "dirac";
	case Scheme::smatrix: return "smatrix";
	}
	return "unknown";
}

// ---------------------------------------------------------------------------

namespace
{

void free_step(DenseMatrix& u, const RealVector& energies, double shift, double tau)
{
	for(Eigen::Index i = 0; i < u.rows(); ++i)
		u.row(i) *= std::exp(-I * tau * (energies[i] + shift));
}

void midpoint_step(const ModelOperators& model, DenseMatrix& u, double a, double b)
{
	const double mid = 0.5 * (a + b);
	const double tau = b - a;
	if(model.interaction_vanishes(mid))
		free_step(u, model.free_energies(), model.shift(), tau);
	else
		u = unitary_exponential(model.shifted_hamiltonian(mid), tau) * u;
}

} // namespace

DenseMatrix evolve_midpoint(const ModelOperators& model, double s, double t, long steps)
{
	if(steps < 1)
		throw DomainError("need at least one step");
	const auto n = static_cast<Eigen::Index>(model.dimension());
	DenseMatrix u = DenseMatrix::Identity(n, n);
	if(t == s)
		return u;
	const double tau = (t - s) / static_cast<double>(steps);
	for(long k = 0; k < steps; ++k)
	{
		const double a = s + tau * static_cast<double>(k);
		const double b = (k + 1 == steps) ? t : s + tau * static_cast<double>(k + 1);
		midpoint_step(model, u, a, b);
	}
	return u;
}

PropagatorRecord reference_propagator(const ModelOperators& model, const TimeGrid& grid, double t, double s)
{
	const long is = grid.index_of(s);
	const long it = grid.index_of(t);
	if(is > it)
		throw DomainError("reference propagator needs s <= t");
	const auto n = static_cast<Eigen::Index>(model.dimension());
	PropagatorRecord rec;
	rec.scheme = Scheme::reference;
	rec.t = grid.node(it);
	rec.s = grid.node(is);
	rec.shift = model.shift();
	rec.dt = grid.dt();
	rec.matrix = DenseMatrix::Identity(n, n);
	for(long k = is; k < it; ++k)
		midpoint_step(model, rec.matrix, grid.node(k), grid.node(k + 1));
	rec.unitarity_defect = unitarity_defect(rec.matrix);
	return rec;
}

// ---------------------------------------------------------------------------

namespace
{

cplx yosida_symbol(double lambda, int n)
{
	return -I * static_cast<double>(n) * lambda / (static_cast<double>(n) + I * lambda);
}

} // namespace

FockOperator yosida_generator(const ModelOperators& model, double t, int n)
{
	if(n < 1)
		throw DomainError("Yosida index must be at least 1");
	const auto eig = hermitian_eigen(model.shifted_hamiltonian(t));
	return {model.basis(), spectral_function(eig, [n](double l) { return yosida_symbol(l, n); }), false};
}

PropagatorRecord sliced_propagator(const ModelOperators& model, const TimeGrid& window, int n, long slices, double t,
                                   double s)
{
	if(n < 1 || slices < 1)
		throw DomainError("sliced propagator needs n >= 1 and K >= 1");
	if(s > t || !window.contains(s) || !window.contains(t))
		throw DomainError("sliced propagator needs -T1 <= s <= t <= T2");
	const auto dim = static_cast<Eigen::Index>(model.dimension());
	const double start = window.start();
	const double width = window.length() / static_cast<double>(slices);

	PropagatorRecord rec;
	rec.scheme = Scheme::sliced;
	rec.t = t;
	rec.s = s;
	rec.n = n;
	rec.slices = slices;
	rec.shift = model.shift();
	rec.matrix = DenseMatrix::Identity(dim, dim);
	for(long i = 0; i < slices; ++i)
	{
		const double left = start + width * static_cast<double>(i);
		const double right = (i + 1 == slices) ? window.t2() : start + width * static_cast<double>(i + 1);
		const double a = std::max(s, left);
		const double b = std::min(t, right);
		if(!(b > a))
			continue;
		const auto eig = hermitian_eigen(model.shifted_hamiltonian(left));
		const double piece = b - a;
		rec.matrix = spectral_function(eig, [n, piece](double l) { return std::exp(piece * yosida_symbol(l, n)); })
		             * rec.matrix;
	}
	rec.unitarity_defect = unitarity_defect(rec.matrix);
	return rec;
}

PropagatorRecord yosida_propagator(const ModelOperators& model, const TimeGrid& window, int n, double t, double s,
                                   long finest_slices)
{
	if(finest_slices < 2 || finest_slices % 2 != 0)
		throw DomainError("Richardson extrapolation needs an even slice count");
	const auto fine = sliced_propagator(model, window, n, finest_slices, t, s);
	const auto coarse = sliced_propagator(model, window, n, finest_slices / 2, t, s);
	PropagatorRecord rec = fine;
	rec.scheme = Scheme::yosida;
	rec.matrix = 2.0 * fine.matrix - coarse.matrix;
	rec.error_estimate = 0.5 * op_norm(DenseMatrix(fine.matrix - coarse.matrix));
	rec.unitarity_defect = unitarity_defect(rec.matrix);
	return rec;
}

// ---------------------------------------------------------------------------

PropagatorRecord dirac_propagator(const ModelOperators& model, const PropagatorRecord& u)
{
	if(u.shift != model.shift())
		throw DomainError("Dirac picture needs the propagator's own shift");
	const RealVector& e = model.free_energies();
	const double m = model.shift();
	PropagatorRecord rec = u;
	rec.scheme = Scheme::dirac;
	for(Eigen::Index i = 0; i < rec.matrix.rows(); ++i)
		rec.matrix.row(i) *= std::exp(I * (e[i] + m) * u.t);
	for(Eigen::Index j = 0; j < rec.matrix.cols(); ++j)
		rec.matrix.col(j) *= std::exp(-I * (e[j] + m) * u.s);
	rec.unitarity_defect = unitarity_defect(rec.matrix);
	return rec;
}

DenseMatrix dirac_hamiltonian(const ModelOperators& model, double t)
{
	DenseMatrix v = model.interaction(t);
	const RealVector& e = model.free_energies();
	for(Eigen::Index j = 0; j < v.cols(); ++j)
		for(Eigen::Index i = 0; i < v.rows(); ++i)
			v(i, j) *= std::exp(I * (e[i] - e[j]) * t);
	return v;
}

PropagatorRecord s_matrix(const ModelOperators& model, const TimeGrid& grid)
{
	grid.require_support_inside(model.coupling());
	auto rec = dirac_propagator(model, reference_propagator(model, grid, grid.t2(), grid.start()));
	rec.scheme = Scheme::smatrix;
	return rec;
}

GeneratorCheck dirac_generator_check(const ModelOperators& model, const TimeGrid& grid, double t, double s,
                                     std::span<const double> h_list)
{
	const auto u = reference_propagator(model, grid, t, s);
	const DenseMatrix ud = dirac_propagator(model, u).matrix;
	const DenseMatrix rhs = dirac_hamiltonian(model, t) * ud;
	GeneratorCheck rep;
	for(const double h : h_list)
	{
		PropagatorRecord ahead = u;
		ahead.t = t + h;
		ahead.matrix = evolve_midpoint(model, t, t + h, 64) * u.matrix;
		const DenseMatrix ud_h = dirac_propagator(model, ahead).matrix;
		rep.h.push_back(h);
		rep.defects.push_back(op_norm(DenseMatrix(I * (ud_h - ud) / h - rhs)));
	}
	rep.slope = rep.h.size() >= 2 ? loglog_slope(rep.h, rep.defects) : 0.0;
	return rep;
}

} // namespace phi4lab
