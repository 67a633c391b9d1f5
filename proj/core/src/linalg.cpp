#include "phi4lab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include "phi4lab/errors.hpp"

namespace phi4lab
{

double op_norm(const DenseMatrix& a)
{
	if(a.size() == 0)
		return 0.0;
	Eigen::BDCSVD<DenseMatrix> svd(a);
	return svd.singularValues()(0);
}

double hermitian_defect(const DenseMatrix& a)
{
	return op_norm(a - a.adjoint());
}

double unitarity_defect(const DenseMatrix& u)
{
	return op_norm(u.adjoint() * u - DenseMatrix::Identity(u.rows(), u.cols()));
}

HermitianEigen hermitian_eigen(const DenseMatrix& h)
{
	Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
	if(es.info() != Eigen::Success)
		throw EigensolverError("hermitian eigensolver did not converge");
	return {es.eigenvalues(), es.eigenvectors()};
}

DenseMatrix unitary_exponential(const DenseMatrix& h, double tau)
{
	const auto eig = hermitian_eigen(h);
	return spectral_function(eig, [tau](double lambda) { return std::exp(-I * tau * lambda); });
}

double lambda_min(const DenseMatrix& h)
{
	if(h.rows() == 0)
		throw EigensolverError("empty matrix has no spectrum");
	Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
	if(es.info() != Eigen::Success)
		throw EigensolverError("hermitian eigensolver did not converge");
	return es.eigenvalues()(0);
}

double lanczos_largest(const std::function<Vector(const Vector&)>& apply, Eigen::Index n)
{
	if(n == 0)
		return 0.0;
	const Eigen::Index max_iter = std::min<Eigen::Index>(n, 300);
	std::vector<Vector> basis;
	std::vector<double> alpha, beta;
	Vector q = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
	double previous = 0.0;
	for(Eigen::Index it = 0; it < max_iter; ++it)
	{
		basis.push_back(q);
		Vector w = apply(q);
		alpha.push_back(q.dot(w).real());
		// two passes of Gram-Schmidt keep the Krylov basis orthogonal to roundoff
		for(int pass = 0; pass < 2; ++pass)
			for(const auto& b : basis)
				w -= b * b.dot(w);
		const double bnorm = w.norm();

		const auto m = static_cast<Eigen::Index>(alpha.size());
		Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
		for(Eigen::Index i = 0; i < m; ++i)
		{
			t(i, i) = alpha[static_cast<std::size_t>(i)];
			if(i + 1 < m)
				t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
		}
		Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(t);
		const double mu = tes.eigenvalues()(m - 1);
		const double residual = bnorm * std::abs(tes.eigenvectors()(m - 1, m - 1));
		if(residual <= 1e-14 * std::abs(mu) || bnorm <= 1e-14 * std::abs(mu) || m == n
		   || (it > 0 && std::abs(mu - previous) <= 1e-16 * std::abs(mu)))
			return mu;
		previous = mu;
		beta.push_back(bnorm);
		q = w / bnorm;
	}
	throw EigensolverError("Lanczos iteration did not converge");
}

namespace
{

double gershgorin_lower(const SparseMatrix& h)
{
	double bound = 0.0;
	for(Eigen::Index k = 0; k < h.outerSize(); ++k)
	{
		double radius = 0.0;
		double diag = 0.0;
		for(SparseMatrix::InnerIterator it(h, k); it; ++it)
		{
			if(it.row() == it.col())
				diag = it.value().real();
			else
				radius += std::abs(it.value());
		}
		bound = (k == 0) ? diag - radius : std::min(bound, diag - radius);
	}
	return bound;
}

} // namespace

double op_norm(const SparseMatrix& a, Eigen::Index dense_limit)
{
	if(a.rows() <= dense_limit)
		return op_norm(DenseMatrix(a));
	const SparseMatrix adj = a.adjoint();
	const double mu = lanczos_largest([&](const Vector& x) -> Vector { return adj * (a * x); }, a.cols());
	return std::sqrt(std::max(mu, 0.0));
}

double lambda_min(const SparseMatrix& h, Eigen::Index dense_limit)
{
	if(h.rows() <= dense_limit)
		return lambda_min(DenseMatrix(h));
	const double sigma = gershgorin_lower(h) - 1.0;
	SparseMatrix shifted = h;
	for(Eigen::Index i = 0; i < h.rows(); ++i)
		shifted.coeffRef(i, i) -= sigma;
	Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
	if(ldlt.info() != Eigen::Success)
		throw EigensolverError("shift-invert factorization failed");
	const double mu = lanczos_largest([&](const Vector& x) -> Vector { return ldlt.solve(x); }, h.rows());
	return sigma + 1.0 / mu;
}

double loglog_slope(std::span<const double> x, std::span<const double> y)
{
	if(x.size() != y.size() || x.size() < 2)
		throw DomainError("loglog_slope needs at least two matching points");
	double sx = 0, sy = 0, sxx = 0, sxy = 0;
	const auto n = static_cast<double>(x.size());
	for(std::size_t i = 0; i < x.size(); ++i)
	{
		if(!(x[i] > 0.0) || !(y[i] > 0.0))
			throw DomainError("loglog_slope needs positive data");
		const double lx = std::log(x[i]);
		const double ly = std::log(y[i]);
		sx += lx;
		sy += ly;
		sxx += lx * lx;
		sxy += lx * ly;
	}
	return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace phi4lab
