#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "phi4lab/linalg.hpp"

namespace phi4lab
{

/// Periodic box [-L/2, L/2] with modes k_j = 2 pi j / L, j = -J..J.
/// Continuum integrals become dk-weighted mode sums and a(k_j) <-> a_j / sqrt(dk).
class ModeGrid
{
public:
	ModeGrid(double mass, double box_length, int mode_cutoff);

	[[nodiscard]] double mass() const noexcept { return mass_; }
	[[nodiscard]] double box_length() const noexcept { return box_length_; }
	[[nodiscard]] int cutoff() const noexcept { return cutoff_; }
	[[nodiscard]] int mode_count() const noexcept { return 2 * cutoff_ + 1; }
	[[nodiscard]] double dk() const noexcept;
	[[nodiscard]] double momentum(int j) const;
	[[nodiscard]] double omega(int j) const;
	/// Position of mode j in occupation vectors (j = -J maps to 0).
	[[nodiscard]] int slot(int j) const;
	[[nodiscard]] int mode_at(int slot) const noexcept { return slot - cutoff_; }

	friend bool operator==(const ModeGrid&, const ModeGrid&) = default;

private:
	double mass_;
	double box_length_;
	int cutoff_;
};

inline constexpr std::size_t default_max_dimension = 20000;

/// Number of occupation vectors over `modes` modes with total particle number <= n_max.
std::size_t basis_dimension(int modes, int n_max);

/// Occupation-number states with sum n_j <= N_max, graded by particle number and
/// lexicographic within a sector. Immutable after construction.
class FockBasis
{
public:
	FockBasis(ModeGrid grid, int particle_cutoff, std::size_t max_dimension = default_max_dimension);

	[[nodiscard]] const ModeGrid& grid() const noexcept { return grid_; }
	[[nodiscard]] int particle_cutoff() const noexcept { return n_max_; }
	[[nodiscard]] std::size_t dimension() const noexcept { return particle_numbers_.size(); }
	[[nodiscard]] std::span<const int> occupation(std::size_t index) const;
	[[nodiscard]] int particle_number(std::size_t index) const { return particle_numbers_.at(index); }
	[[nodiscard]] std::optional<std::size_t> index_of(std::span<const int> occupation) const;

	/// Index of the state a_j|s> points to, or -1 when n_j = 0.
	[[nodiscard]] std::ptrdiff_t lowered(std::size_t s, int j) const;
	/// Index of the state a_j^dagger|s> points to, or -1 at the particle cutoff.
	[[nodiscard]] std::ptrdiff_t raised(std::size_t s, int j) const;

	/// Digest of the grid parameters and the ordered state list.
	[[nodiscard]] std::uint64_t hash() const noexcept { return hash_; }

private:
	ModeGrid grid_;
	int n_max_;
	std::vector<int> occupations_;  // dimension x mode_count, row-major
	std::vector<int> particle_numbers_;
	std::map<std::vector<int>, std::size_t> index_;
	std::vector<std::ptrdiff_t> lower_;
	std::vector<std::ptrdiff_t> raise_;
	std::uint64_t hash_ = 0;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

BasisPtr enumerate_basis(const ModeGrid& grid, int n_max, std::size_t max_dimension = default_max_dimension);

/// Matrices up to this dimension are stored dense, larger ones sparse.
inline constexpr std::size_t dense_storage_limit = 512;

/// A matrix over a FockBasis with a hermiticity claim that is checked on construction.
class FockOperator
{
public:
	using Triplet = Eigen::Triplet<cplx>;

	FockOperator(BasisPtr basis, DenseMatrix matrix, bool hermitian_claim = false);
	FockOperator(BasisPtr basis, SparseMatrix matrix, bool hermitian_claim = false);

	/// Assembles from triplets (duplicates are summed) and picks the storage from `dense_limit`.
	static FockOperator from_triplets(BasisPtr basis, const std::vector<Triplet>& triplets, bool hermitian_claim,
	                                  std::size_t dense_limit = dense_storage_limit);

	[[nodiscard]] const BasisPtr& basis() const noexcept { return basis_; }
	[[nodiscard]] std::size_t dimension() const noexcept { return basis_->dimension(); }
	[[nodiscard]] bool hermitian_claim() const noexcept { return hermitian_; }
	[[nodiscard]] bool is_dense() const noexcept { return std::holds_alternative<DenseMatrix>(matrix_); }

	[[nodiscard]] DenseMatrix dense() const;
	[[nodiscard]] SparseMatrix sparse() const;
	[[nodiscard]] Vector apply(const Vector& psi) const;
	[[nodiscard]] double norm() const;

	[[nodiscard]] FockOperator adjoint() const;

private:
	void check() const;

	BasisPtr basis_;
	std::variant<DenseMatrix, SparseMatrix> matrix_;
	bool hermitian_;
};

FockOperator annihilator(const BasisPtr& basis, int mode);
FockOperator creator(const BasisPtr& basis, int mode);
FockOperator number_operator(const BasisPtr& basis);
/// sum_j omega_j a_j^dagger a_j.
FockOperator free_hamiltonian(const BasisPtr& basis);

/// Creation part (4 pi)^{-1/2} sum_j sqrt(dk) e^{-i k_j x} omega_j^{-1/2} a_j^dagger of the time-zero field.
FockOperator field_creation_part(const BasisPtr& basis, double x);
/// Annihilation part (4 pi)^{-1/2} sum_j sqrt(dk) e^{-i k_j x} omega_j^{-1/2} a_{-j}.
FockOperator field_annihilation_part(const BasisPtr& basis, double x);
/// phi(x) = creation part + annihilation part, x in [-L/2, L/2].
FockOperator field_operator(const BasisPtr& basis, double x);

} // namespace phi4lab
