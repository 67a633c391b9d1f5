#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace phi4lab
{

using cplx = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};

/// Spectral (operator 2-) norm. Dense SVD; sparse input above `dense_limit`
/// goes through Lanczos on A^dagger A.
double op_norm(const DenseMatrix& a);
double op_norm(const SparseMatrix& a, Eigen::Index dense_limit = 2000);

/// Largest eigenvalue of a hermitian operator given by its action.
double lanczos_largest(const std::function<Vector(const Vector&)>& apply, Eigen::Index n);

/// ||A - A^dagger||.
double hermitian_defect(const DenseMatrix& a);

/// ||U^dagger U - 1||.
double unitarity_defect(const DenseMatrix& u);

/// Spectral decomposition of a hermitian matrix; throws EigensolverError on failure.
struct HermitianEigen
{
	RealVector values;  // ascending
	DenseMatrix vectors;
};
HermitianEigen hermitian_eigen(const DenseMatrix& h);

/// f(H) for hermitian H and a complex scalar function f applied to the spectrum.
template<class F>
DenseMatrix spectral_function(const HermitianEigen& eig, F&& f)
{
	Vector d(eig.values.size());
	for(Eigen::Index i = 0; i < eig.values.size(); ++i)
		d[i] = f(eig.values[i]);
	return eig.vectors * d.asDiagonal() * eig.vectors.adjoint();
}

/// exp(-i tau H) for hermitian H.
DenseMatrix unitary_exponential(const DenseMatrix& h, double tau);

/// Smallest eigenvalue of a hermitian matrix. Dense solver up to `dense_limit`,
/// shift-invert Lanczos above it.
double lambda_min(const SparseMatrix& h, Eigen::Index dense_limit = 2000);
double lambda_min(const DenseMatrix& h);

/// Least-squares slope of log(y) against log(x). Nonpositive y are rejected.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// 64-bit FNV-1a, used for basis and config digests.
class Fnv1a
{
public:
	void update(const void* data, std::size_t n)
	{
		const auto* p = static_cast<const unsigned char*>(data);
		for(std::size_t i = 0; i < n; ++i)
		{
			h_ ^= p[i];
			h_ *= 0x100000001b3ULL;
		}
	}
	template<class T>
	void update_value(const T& v) { update(&v, sizeof(T)); }
	[[nodiscard]] std::uint64_t digest() const noexcept { return h_; }

private:
	std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

} // namespace phi4lab
