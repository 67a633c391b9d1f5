#include "phi4lab/fock.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "phi4lab/errors.hpp"

namespace phi4lab
{

ModeGrid::ModeGrid(double mass, double box_length, int mode_cutoff)
	: mass_(mass), box_length_(box_length), cutoff_(mode_cutoff)
{
	if(!(mass > 0.0) || !std::isfinite(mass))
		throw DomainError("mass must be positive");
	if(!(box_length > 0.0) || !std::isfinite(box_length))
		throw DomainError("box length must be positive");
	if(mode_cutoff < 0)
		throw DomainError("mode cutoff must be nonnegative");
}

double ModeGrid::dk() const noexcept
{
	return 2.0 * std::numbers::pi / box_length_;
}

int ModeGrid::slot(int j) const
{
	if(j < -cutoff_ || j > cutoff_)
		throw DomainError("mode index " + std::to_string(j) + " outside [-J, J]");
	return j + cutoff_;
}

double ModeGrid::momentum(int j) const
{
	slot(j);
	return dk() * j;
}

double ModeGrid::omega(int j) const
{
	const double k = momentum(j);
	return std::sqrt(k * k + mass_ * mass_);
}

std::size_t basis_dimension(int modes, int n_max)
{
	// sum_{n <= N} C(M + n - 1, n) = C(M + N, N)
	if(modes < 0 || n_max < 0)
		return 0;
	long double c = 1.0L;
	for(int i = 1; i <= n_max; ++i)
		c = c * static_cast<long double>(modes + i) / static_cast<long double>(i);
	return static_cast<std::size_t>(std::llround(c));
}

namespace
{

void compositions(int remaining, std::size_t pos, std::vector<int>& current, std::vector<int>& out)
{
	if(pos + 1 == current.size())
	{
		current[pos] = remaining;
		out.insert(out.end(), current.begin(), current.end());
		return;
	}
	for(int n = 0; n <= remaining; ++n)
	{
		current[pos] = n;
		compositions(remaining - n, pos + 1, current, out);
	}
}

} // namespace

FockBasis::FockBasis(ModeGrid grid, int particle_cutoff, std::size_t max_dimension)
	: grid_(grid), n_max_(particle_cutoff)
{
	if(particle_cutoff < 0)
		throw DomainError("particle cutoff must be nonnegative");
	const int modes = grid_.mode_count();
	const std::size_t dim = basis_dimension(modes, particle_cutoff);
	if(dim > max_dimension)
		throw ResourceLimitError("Fock basis dimension " + std::to_string(dim) + " exceeds limit "
		                         + std::to_string(max_dimension));

	std::vector<int> current(static_cast<std::size_t>(modes));
	for(int n = 0; n <= particle_cutoff; ++n)
	{
		const std::size_t before = occupations_.size();
		compositions(n, 0, current, occupations_);
		const std::size_t added = (occupations_.size() - before) / static_cast<std::size_t>(modes);
		particle_numbers_.insert(particle_numbers_.end(), added, n);
	}

	Fnv1a h;
	h.update_value(grid_.mass());
	h.update_value(grid_.box_length());
	h.update_value(grid_.cutoff());
	h.update_value(n_max_);
	for(std::size_t s = 0; s < dimension(); ++s)
	{
		const auto occ = occupation(s);
		index_.emplace(std::vector<int>(occ.begin(), occ.end()), s);
		h.update(occ.data(), occ.size_bytes());
	}
	hash_ = h.digest();

	lower_.assign(dimension() * static_cast<std::size_t>(modes), -1);
	raise_.assign(dimension() * static_cast<std::size_t>(modes), -1);
	std::vector<int> work(static_cast<std::size_t>(modes));
	for(std::size_t s = 0; s < dimension(); ++s)
	{
		const auto occ = occupation(s);
		for(int slot = 0; slot < modes; ++slot)
		{
			const auto k = static_cast<std::size_t>(slot);
			std::copy(occ.begin(), occ.end(), work.begin());
			if(occ[k] > 0)
			{
				--work[k];
				lower_[s * static_cast<std::size_t>(modes) + k] = static_cast<std::ptrdiff_t>(index_.at(work));
				++work[k];
			}
			if(particle_numbers_[s] < n_max_)
			{
				++work[k];
				raise_[s * static_cast<std::size_t>(modes) + k] = static_cast<std::ptrdiff_t>(index_.at(work));
			}
		}
	}
}

std::span<const int> FockBasis::occupation(std::size_t index) const
{
	if(index >= dimension())
		throw DomainError("basis index out of range");
	const auto m = static_cast<std::size_t>(grid_.mode_count());
	return {occupations_.data() + index * m, m};
}

std::optional<std::size_t> FockBasis::index_of(std::span<const int> occupation) const
{
	const auto it = index_.find(std::vector<int>(occupation.begin(), occupation.end()));
	if(it == index_.end())
		return std::nullopt;
	return it->second;
}

std::ptrdiff_t FockBasis::lowered(std::size_t s, int j) const
{
	return lower_.at(s * static_cast<std::size_t>(grid_.mode_count()) + static_cast<std::size_t>(grid_.slot(j)));
}

std::ptrdiff_t FockBasis::raised(std::size_t s, int j) const
{
	return raise_.at(s * static_cast<std::size_t>(grid_.mode_count()) + static_cast<std::size_t>(grid_.slot(j)));
}

BasisPtr enumerate_basis(const ModeGrid& grid, int n_max, std::size_t max_dimension)
{
	return std::make_shared<const FockBasis>(grid, n_max, max_dimension);
}

// ---------------------------------------------------------------------------

FockOperator::FockOperator(BasisPtr basis, DenseMatrix matrix, bool hermitian_claim)
	: basis_(std::move(basis)), matrix_(std::move(matrix)), hermitian_(hermitian_claim)
{
	check();
}

FockOperator::FockOperator(BasisPtr basis, SparseMatrix matrix, bool hermitian_claim)
	: basis_(std::move(basis)), matrix_(std::move(matrix)), hermitian_(hermitian_claim)
{
	std::get<SparseMatrix>(matrix_).makeCompressed();
	check();
}

FockOperator FockOperator::from_triplets(BasisPtr basis, const std::vector<Triplet>& triplets, bool hermitian_claim,
                                         std::size_t dense_limit)
{
	const auto n = static_cast<Eigen::Index>(basis->dimension());
	SparseMatrix m(n, n);
	m.setFromTriplets(triplets.begin(), triplets.end());
	if(basis->dimension() <= dense_limit)
		return {std::move(basis), DenseMatrix(m), hermitian_claim};
	return {std::move(basis), std::move(m), hermitian_claim};
}

void FockOperator::check() const
{
	if(!basis_)
		throw DomainError("operator without basis");
	const auto n = static_cast<Eigen::Index>(basis_->dimension());
	const bool shape_ok = std::visit([n](const auto& m) { return m.rows() == n && m.cols() == n; }, matrix_);
	if(!shape_ok)
		throw DomainError("operator shape does not match basis dimension");
	if(!hermitian_)
		return;
	double defect = 0.0;
	double scale = 0.0;
	if(is_dense())
	{
		const auto& a = std::get<DenseMatrix>(matrix_);
		defect = hermitian_defect(a);
		scale = op_norm(a);
	}
	else
	{
		// Frobenius norms bound the spectral ones from above
		const auto& a = std::get<SparseMatrix>(matrix_);
		defect = SparseMatrix(a - SparseMatrix(a.adjoint())).norm();
		scale = op_norm(a);
	}
	if(defect > 1e-12 * std::max(1.0, scale))
		throw NumericalError("operator claimed hermitian has defect " + std::to_string(defect));
}

DenseMatrix FockOperator::dense() const
{
	if(is_dense())
		return std::get<DenseMatrix>(matrix_);
	return DenseMatrix(std::get<SparseMatrix>(matrix_));
}

SparseMatrix FockOperator::sparse() const
{
	if(!is_dense())
		return std::get<SparseMatrix>(matrix_);
	return std::get<DenseMatrix>(matrix_).sparseView();
}

Vector FockOperator::apply(const Vector& psi) const
{
	return std::visit([&psi](const auto& m) -> Vector { return m * psi; }, matrix_);
}

double FockOperator::norm() const
{
	return std::visit([](const auto& m) { return op_norm(m); }, matrix_);
}

FockOperator FockOperator::adjoint() const
{
	if(is_dense())
		return {basis_, DenseMatrix(std::get<DenseMatrix>(matrix_).adjoint()), hermitian_};
	return {basis_, SparseMatrix(std::get<SparseMatrix>(matrix_).adjoint()), hermitian_};
}

// ---------------------------------------------------------------------------

FockOperator annihilator(const BasisPtr& basis, int mode)
{
	const int slot = basis->grid().slot(mode);
	std::vector<FockOperator::Triplet> t;
	for(std::size_t s = 0; s < basis->dimension(); ++s)
	{
		const auto target = basis->lowered(s, mode);
		if(target < 0)
			continue;
		const int n = basis->occupation(s)[static_cast<std::size_t>(slot)];
		t.emplace_back(static_cast<int>(target), static_cast<int>(s), std::sqrt(static_cast<double>(n)));
	}
	return FockOperator::from_triplets(basis, t, false);
}

FockOperator creator(const BasisPtr& basis, int mode)
{
	return annihilator(basis, mode).adjoint();
}

namespace
{

template<class Weight>
FockOperator diagonal_operator(const BasisPtr& basis, Weight&& weight)
{
	const ModeGrid& grid = basis->grid();
	std::vector<FockOperator::Triplet> t;
	for(std::size_t s = 0; s < basis->dimension(); ++s)
	{
		const auto occ = basis->occupation(s);
		double value = 0.0;
		for(int slot = 0; slot < grid.mode_count(); ++slot)
			value += weight(grid.mode_at(slot)) * occ[static_cast<std::size_t>(slot)];
		t.emplace_back(static_cast<int>(s), static_cast<int>(s), value);
	}
	return FockOperator::from_triplets(basis, t, true);
}

} // namespace

FockOperator number_operator(const BasisPtr& basis)
{
	return diagonal_operator(basis, [](int) { return 1.0; });
}

FockOperator free_hamiltonian(const BasisPtr& basis)
{
	const ModeGrid& grid = basis->grid();
	return diagonal_operator(basis, [&grid](int j) { return grid.omega(j); });
}

namespace
{

FockOperator field_part(const BasisPtr& basis, double x, bool creation)
{
	const ModeGrid& grid = basis->grid();
	const double pref = std::sqrt(grid.dk() / (4.0 * std::numbers::pi));
	std::vector<FockOperator::Triplet> t;
	for(int j = -grid.cutoff(); j <= grid.cutoff(); ++j)
	{
		const cplx c = pref * std::exp(-I * grid.momentum(j) * x) / std::sqrt(grid.omega(j));
		// the annihilation part carries a_{-j} with the e^{-i k_j x} phase
		const int mode = creation ? j : -j;
		const int slot = grid.slot(mode);
		for(std::size_t s = 0; s < basis->dimension(); ++s)
		{
			const int n = basis->occupation(s)[static_cast<std::size_t>(slot)];
			if(creation)
			{
				const auto target = basis->raised(s, mode);
				if(target >= 0)
					t.emplace_back(static_cast<int>(target), static_cast<int>(s), c * std::sqrt(n + 1.0));
			}
			else
			{
				const auto target = basis->lowered(s, mode);
				if(target >= 0)
					t.emplace_back(static_cast<int>(target), static_cast<int>(s), c * std::sqrt(static_cast<double>(n)));
			}
		}
	}
	return FockOperator::from_triplets(basis, t, false);
}

} // namespace

FockOperator field_creation_part(const BasisPtr& basis, double x)
{
	return field_part(basis, x, true);
}

FockOperator field_annihilation_part(const BasisPtr& basis, double x)
{
	return field_part(basis, x, false);
}

FockOperator field_operator(const BasisPtr& basis, double x)
{
	const double half = 0.5 * basis->grid().box_length();
	if(x < -half || x > half)
		throw DomainError("field position outside the box");
	SparseMatrix m = field_creation_part(basis, x).sparse() + field_annihilation_part(basis, x).sparse();
	if(basis->dimension() <= dense_storage_limit)
		return {basis, DenseMatrix(m), true};
	return {basis, std::move(m), true};
}

} // namespace phi4lab
