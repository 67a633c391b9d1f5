#include "phi4lab/hamiltonians.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "phi4lab/errors.hpp"

namespace phi4lab
{

namespace
{

constexpr std::array<double, 5> binomial4{1.0, 4.0, 6.0, 4.0, 1.0};

// Kernel of one separable term with unit temporal weight.
KernelW term_kernel(const ModeGrid& grid, const Profile& spatial)
{
	const int m = grid.mode_count();
	const int cutoff = grid.cutoff();
	std::vector<cplx> by_total(static_cast<std::size_t>(8 * cutoff + 1));
	for(int total = -4 * cutoff; total <= 4 * cutoff; ++total)
		by_total[static_cast<std::size_t>(total + 4 * cutoff)] = spatial.fourier(-grid.dk() * total);
	std::vector<cplx> values;
	values.reserve(static_cast<std::size_t>(m * m * m * m));
	for(int a = 0; a < m; ++a)
		for(int b = 0; b < m; ++b)
			for(int c = 0; c < m; ++c)
				for(int d = 0; d < m; ++d)
				{
					const int ja = grid.mode_at(a), jb = grid.mode_at(b), jc = grid.mode_at(c), jd = grid.mode_at(d);
					const double w = 1.0 / std::sqrt(grid.omega(ja) * grid.omega(jb) * grid.omega(jc) * grid.omega(jd));
					values.push_back(by_total[static_cast<std::size_t>(ja + jb + jc + jd + 4 * cutoff)] * w);
				}
	return {grid, 0.0, std::move(values)};
}

DenseMatrix diagonal_sandwich(const RealVector& left, const DenseMatrix& b, const RealVector& right)
{
	return left.asDiagonal() * b * right.asDiagonal();
}

} // namespace

FockOperator assemble_interaction(const BasisPtr& basis, const KernelW& kernel, bool hermitian_claim)
{
	const ModeGrid& grid = basis->grid();
	if(!(kernel.grid() == grid))
		throw DomainError("kernel and basis use different mode grids");
	const int m = grid.mode_count();
	const double dk = grid.dk();
	const double pref = dk * dk / (16.0 * std::numbers::pi * std::numbers::pi);
	const auto dim = basis->dimension();

	std::vector<FockOperator::Triplet> triplets;
	std::vector<cplx> column(dim);
	std::vector<char> touched(dim, 0);
	std::vector<std::size_t> rows;
	std::array<int, 4> q{};

	for(std::size_t s = 0; s < dim; ++s)
	{
		for(int j = 0; j <= 4; ++j)
		{
			for(int a = 0; a < m; ++a)
				for(int b = 0; b < m; ++b)
					for(int c = 0; c < m; ++c)
						for(int d = 0; d < m; ++d)
						{
							q = {grid.mode_at(a), grid.mode_at(b), grid.mode_at(c), grid.mode_at(d)};
							const cplx w = kernel(q[0], q[1], q[2], q[3]);
							if(w == 0.0)
								continue;
							std::ptrdiff_t state = static_cast<std::ptrdiff_t>(s);
							double amp = 1.0;
							// annihilators a_{-q4} ... a_{-q(j+1)} act first
							for(int i = 3; i >= j && state >= 0; --i)
							{
								const int mode = -q[static_cast<std::size_t>(i)];
								const int n = basis->occupation(static_cast<std::size_t>(state))[static_cast<std::size_t>(grid.slot(mode))];
								amp *= std::sqrt(static_cast<double>(n));
								state = basis->lowered(static_cast<std::size_t>(state), mode);
							}
							for(int i = j - 1; i >= 0 && state >= 0; --i)
							{
								const int mode = q[static_cast<std::size_t>(i)];
								const int n = basis->occupation(static_cast<std::size_t>(state))[static_cast<std::size_t>(grid.slot(mode))];
								amp *= std::sqrt(n + 1.0);
								state = basis->raised(static_cast<std::size_t>(state), mode);
							}
							if(state < 0)
								continue;
							const auto row = static_cast<std::size_t>(state);
							if(!touched[row])
							{
								touched[row] = 1;
								rows.push_back(row);
							}
							column[row] += pref * binomial4[static_cast<std::size_t>(j)] * amp * w;
						}
		}
		std::sort(rows.begin(), rows.end());
		for(const auto row : rows)
		{
			if(column[row] != 0.0)
				triplets.emplace_back(static_cast<int>(row), static_cast<int>(s), column[row]);
			column[row] = 0.0;
			touched[row] = 0;
		}
		rows.clear();
	}
	return FockOperator::from_triplets(basis, triplets, hermitian_claim);
}

// ---------------------------------------------------------------------------

ModelOperators::ModelOperators(BasisPtr basis, CouplingFunction coupling, double shift)
	: basis_(std::move(basis)), coupling_(std::move(coupling)), shift_(shift),
	  mg_(std::numeric_limits<double>::quiet_NaN())
{
	if(!std::isfinite(shift_))
		throw DomainError("shift must be finite");
	const ModeGrid& grid = basis_->grid();
	if(const auto support = coupling_.space_support())
	{
		const double half = 0.5 * grid.box_length();
		if(support->first < -half || support->second > half)
			throw DomainError("spatial support of the coupling leaves the box");
	}
	energies_ = RealVector(static_cast<Eigen::Index>(dimension()));
	numbers_ = RealVector(static_cast<Eigen::Index>(dimension()));
	for(std::size_t s = 0; s < dimension(); ++s)
	{
		const auto occ = basis_->occupation(s);
		double e = 0.0;
		for(int slot = 0; slot < grid.mode_count(); ++slot)
			e += grid.omega(grid.mode_at(slot)) * occ[static_cast<std::size_t>(slot)];
		energies_[static_cast<Eigen::Index>(s)] = e;
		numbers_[static_cast<Eigen::Index>(s)] = basis_->particle_number(s);
	}
	terms_.reserve(coupling_.terms().size());
	for(const auto& term : coupling_.terms())
		terms_.push_back(assemble_interaction(basis_, term_kernel(grid, term.spatial)).dense());
}

ModelOperators ModelOperators::with_estimated_shift(BasisPtr basis, CouplingFunction coupling, double c,
                                                    std::span<const double> times)
{
	if(!(c > 0.0))
		throw DomainError("shift margin c must be positive");
	ModelOperators model(std::move(basis), std::move(coupling), 0.0);
	model.mg_ = estimate_Mg(model, times);
	model.shift_ = model.mg_ + c;
	return model;
}

FockOperator ModelOperators::free_hamiltonian() const
{
	return {basis_, DenseMatrix(energies_.cast<cplx>().asDiagonal()), true};
}

FockOperator ModelOperators::number_operator() const
{
	return {basis_, DenseMatrix(numbers_.cast<cplx>().asDiagonal()), true};
}

DenseMatrix ModelOperators::interaction(double t, int derivative) const
{
	const auto n = static_cast<Eigen::Index>(dimension());
	DenseMatrix v = DenseMatrix::Zero(n, n);
	const CouplingFunction g = derivative == 0 ? coupling_ : coupling_.time_derivative(derivative);
	for(std::size_t i = 0; i < terms_.size(); ++i)
	{
		const double w = g.temporal_weight(i, t);
		if(w != 0.0)
			v += w * terms_[i];
	}
	return v;
}

DenseMatrix ModelOperators::hamiltonian(double t) const
{
	DenseMatrix h = interaction(t);
	h.diagonal() += energies_.cast<cplx>();
	return h;
}

DenseMatrix ModelOperators::shifted_hamiltonian(double t) const
{
	DenseMatrix h = hamiltonian(t);
	h.diagonal().array() += shift_;
	return h;
}

bool ModelOperators::interaction_vanishes(double t) const
{
	for(std::size_t i = 0; i < terms_.size(); ++i)
		if(coupling_.temporal_weight(i, t) != 0.0)
			return false;
	return true;
}

ModelOperators ModelOperators::with_shift(double shift) const
{
	ModelOperators r = *this;
	r.shift_ = shift;
	return r;
}

FockOperator build_interaction(const ModelOperators& model, double t)
{
	return {model.basis(), model.interaction(t), true};
}

// ---------------------------------------------------------------------------

FockOperator interaction_xspace_oracle(const BasisPtr& basis, const CouplingFunction& g, double t, int grid_points)
{
	const ModeGrid& grid = basis->grid();
	if(grid_points < 4 * grid.cutoff() + 1)
		throw DomainError("x-space oracle needs at least 4J+1 grid points");
	const double length = grid.box_length();
	const double dx = length / grid_points;
	const auto n = static_cast<Eigen::Index>(basis->dimension());
	DenseMatrix v = DenseMatrix::Zero(n, n);
	for(int p = 0; p < grid_points; ++p)
	{
		const double x = -0.5 * length + p * dx;
		const double gx = g.evaluate(x, t);
		if(gx == 0.0)
			continue;
		const DenseMatrix plus = field_creation_part(basis, x).dense();
		const DenseMatrix minus = field_annihilation_part(basis, x).dense();
		std::array<DenseMatrix, 5> plus_pow, minus_pow;
		plus_pow[0] = minus_pow[0] = DenseMatrix::Identity(n, n);
		for(std::size_t k = 1; k <= 4; ++k)
		{
			plus_pow[k] = plus_pow[k - 1] * plus;
			minus_pow[k] = minus_pow[k - 1] * minus;
		}
		DenseMatrix wick = DenseMatrix::Zero(n, n);
		for(std::size_t j = 0; j <= 4; ++j)
			wick += binomial4[j] * plus_pow[j] * minus_pow[4 - j];
		v += (dx * gx) * wick;
	}
	return {basis, std::move(v), true};
}

FockOperator interaction_xspace_oracle(const ModelOperators& model, double t, int grid_points)
{
	return interaction_xspace_oracle(model.basis(), model.coupling(), t, grid_points);
}

SandwichBoundReport sandwich_bound_report(const ModelOperators& model, double t, int j)
{
	if(j < -4 || j > 4)
		throw DomainError("sandwich index must satisfy |j| <= 4");
	const RealVector np1 = model.particle_numbers().array() + 1.0;
	const RealVector left = np1.array().pow(-0.5 * j);
	const RealVector right = np1.array().pow(-0.5 * (4 - j));
	SandwichBoundReport rep;
	rep.j = j;
	rep.sandwich_norm = op_norm(diagonal_sandwich(left, model.interaction(t), right));
	rep.w_norm = w_l2_norm(build_kernel(model.coupling(), model.basis()->grid(), t));
	rep.ratio = rep.w_norm > 0.0 ? rep.sandwich_norm / rep.w_norm : 0.0;
	return rep;
}

double estimate_Mg(const ModelOperators& model, std::span<const double> times)
{
	if(times.empty())
		throw DomainError("estimate_Mg needs a nonempty time grid");
	double mg = 0.0;
	for(const double t : times)
		mg = std::max(mg, -lambda_min(model.hamiltonian(t)));
	return mg;
}

// ---------------------------------------------------------------------------

ScaleNorms::ScaleNorms(const ModelOperators& model) : ScaleNorms(model.free_energies()) { }

ScaleNorms::ScaleNorms(RealVector free_energies)
	: plus_(free_energies.array() + 1.0), inverse_(plus_.cwiseInverse())
{
}

double ScaleNorms::norm_plus2(const Vector& psi) const
{
	return (plus_.cast<cplx>().asDiagonal() * psi).norm();
}

double ScaleNorms::norm_minus2(const Vector& psi) const
{
	return (inverse_.cast<cplx>().asDiagonal() * psi).norm();
}

double ScaleNorms::sandwich_norm(const DenseMatrix& b) const
{
	return op_norm(diagonal_sandwich(inverse_, b, inverse_));
}

// ---------------------------------------------------------------------------

namespace
{

double fit_or_flag(const std::vector<double>& h, const std::vector<double>& d, bool& vanishes)
{
	std::vector<double> hx, dy;
	for(std::size_t i = 0; i < h.size(); ++i)
		if(d[i] > 0.0)
		{
			hx.push_back(h[i]);
			dy.push_back(d[i]);
		}
	vanishes = hx.empty();
	if(hx.size() < 2)
		return std::numeric_limits<double>::quiet_NaN();
	return loglog_slope(hx, dy);
}

} // namespace

SmoothnessReport smoothness_report(const ModelOperators& model, double t, std::span<const double> h_list)
{
	if(h_list.empty())
		throw DomainError("smoothness report needs step sizes");
	for(std::size_t i = 0; i < h_list.size(); ++i)
		if(!(h_list[i] > 0.0) || (i > 0 && !(h_list[i] < h_list[i - 1])))
			throw DomainError("step sizes must be positive and decreasing");

	const ScaleNorms scale(model);
	const auto& g = model.coupling();
	const CouplingFunction g1 = g.is_zero() ? g : g.time_derivative(1);
	const CouplingFunction g2 = g.is_zero() ? g : g.time_derivative(2);
	const auto n = static_cast<Eigen::Index>(model.dimension());

	SmoothnessReport rep;
	rep.h.assign(h_list.begin(), h_list.end());
	for(const double h : h_list)
	{
		// the temporal weights carry all the t dependence
		DenseMatrix d1 = DenseMatrix::Zero(n, n);
		DenseMatrix d2 = DenseMatrix::Zero(n, n);
		for(std::size_t i = 0; i < model.term_operators().size(); ++i)
		{
			const double c1 = (g.temporal_weight(i, t + h) - g.temporal_weight(i, t)) / h - g1.temporal_weight(i, t);
			const double c2 = (g1.temporal_weight(i, t + h) - g1.temporal_weight(i, t)) / h - g2.temporal_weight(i, t);
			d1 += c1 * model.term_operators()[i];
			d2 += c2 * model.term_operators()[i];
		}
		rep.first_defects.push_back(scale.sandwich_norm(d1));
		rep.second_defects.push_back(scale.sandwich_norm(d2));
	}
	rep.first_slope = fit_or_flag(rep.h, rep.first_defects, rep.first_vanishes);
	rep.second_slope = fit_or_flag(rep.h, rep.second_defects, rep.second_vanishes);
	return rep;
}

} // namespace phi4lab
