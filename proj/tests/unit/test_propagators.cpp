#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "corpus.hpp"
#include "phi4lab/errors.hpp"
#include "phi4lab/propagators.hpp"

using namespace phi4lab;

namespace
{

DenseMatrix random_hermitian(Eigen::Index n, unsigned seed)
{
	std::mt19937 rng(seed);
	std::normal_distribution<double> d;
	DenseMatrix a(n, n);
	for(Eigen::Index i = 0; i < n; ++i)
		for(Eigen::Index j = 0; j < n; ++j)
			a(i, j) = cplx(d(rng), d(rng));
	return 0.5 * (a + a.adjoint());
}

// exp(M) by scaling and squaring of a long Taylor series
DenseMatrix taylor_exp(const DenseMatrix& m)
{
	int squarings = 0;
	double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
	while(norm > 0.1)
	{
		norm /= 2;
		++squarings;
	}
	const DenseMatrix a = m / std::pow(2.0, squarings);
	DenseMatrix term = DenseMatrix::Identity(m.rows(), m.cols());
	DenseMatrix sum = term;
	for(int k = 1; k < 30; ++k)
	{
		term = term * a / static_cast<double>(k);
		sum += term;
	}
	for(int i = 0; i < squarings; ++i)
		sum = sum * sum;
	return sum;
}

// one mode, at most one particle: H~ = diag(M, omega + M)
ModelOperators two_level(double shift)
{
	return {enumerate_basis(ModeGrid(0.8, 1.0, 0), 1), CouplingFunction(), shift};
}

} // namespace

TEST(Exponential, MatchesTaylorSeries)
{
	for(const unsigned seed : {1u, 2u, 3u})
	{
		const DenseMatrix h = random_hermitian(12, seed);
		for(const double tau : {0.01, 0.7, 3.0})
		{
			const DenseMatrix u = unitary_exponential(h, tau);
			EXPECT_LT((u - taylor_exp(DenseMatrix(-I * tau * h))).norm(), 1e-12);
			EXPECT_LT(unitarity_defect(u), 1e-13);
		}
	}
}

TEST(TimeGrid, StepsNodesAndLookup)
{
	const TimeGrid g(1.0, 1.0, 0.01);
	EXPECT_EQ(g.steps(), 200);
	EXPECT_DOUBLE_EQ(g.node(0), -1.0);
	EXPECT_DOUBLE_EQ(g.node(200), 1.0);
	EXPECT_EQ(g.index_of(0.0), 100);
	EXPECT_EQ(g.index_of(0.25), 125);
	EXPECT_THROW(g.index_of(0.0012), DomainError);
	EXPECT_EQ(g.refined(4).steps(), 800);
	EXPECT_EQ(g.nodes(50).size(), 5u);
	// a step that does not divide the window is rounded down
	const TimeGrid odd(1.0, 0.5, 0.4);
	EXPECT_EQ(odd.steps(), 4);
	EXPECT_DOUBLE_EQ(odd.dt(), 0.375);
	EXPECT_THROW(TimeGrid(1.0, -2.0, 0.1), DomainError);
}

TEST(TimeGrid, SupportMustBeInsideWindow)
{
	const TimeGrid g(1.0, 1.0, 0.1);
	EXPECT_NO_THROW(g.require_support_inside(corpus::couplings()[0].g));
	const CouplingFunction gaussian_t({{1.0, Profile::bump(0, 1), Profile::gaussian(0, 0.2)}});
	EXPECT_THROW(g.require_support_inside(gaussian_t), DomainError);
	const CouplingFunction late({{1.0, Profile::bump(0, 1), Profile::bump(0.5, 0.6)}});
	EXPECT_THROW(g.require_support_inside(late), DomainError);
}

TEST(Yosida, GeneratorOnTwoLevelSystem)
{
	const auto m = two_level(0.3);
	const DenseMatrix a = -I * m.shifted_hamiltonian(0.0);
	const auto id = DenseMatrix::Identity(2, 2);
	for(const int n : {1, 4, 64})
	{
		const DenseMatrix direct = static_cast<double>(n) * a * (static_cast<double>(n) * id - a).inverse();
		EXPECT_LT((yosida_generator(m, 0.0, n).dense() - direct).norm(), 1e-14);
	}
	EXPECT_THROW(yosida_generator(m, 0.0, 0), DomainError);
}

TEST(Yosida, ConstantGeneratorIsExactPerSliceAndConvergesLikeOneOverN)
{
	const auto m = two_level(0.3);
	const TimeGrid w(1.0, 1.0, 0.01);
	const DenseMatrix exact = unitary_exponential(m.shifted_hamiltonian(0.0), 2.0);
	std::vector<double> errors;
	for(const int n : {16, 32, 64, 128})
	{
		const auto u8 = sliced_propagator(m, w, n, 8, 1.0, -1.0);
		const auto u64 = sliced_propagator(m, w, n, 64, 1.0, -1.0);
		EXPECT_LT((u8.matrix - u64.matrix).norm(), 1e-13);
		// exp(t A_n) is a contraction
		EXPECT_LE(op_norm(u8.matrix), 1.0 + 1e-14);
		errors.push_back(op_norm(DenseMatrix(u8.matrix - exact)));
	}
	for(std::size_t i = 1; i < errors.size(); ++i)
		EXPECT_NEAR(errors[i - 1] / errors[i], 2.0, 0.1);
}

TEST(Yosida, RichardsonNeedsEvenSliceCount)
{
	const auto m = two_level(0.3);
	const TimeGrid w(1.0, 1.0, 0.01);
	EXPECT_THROW(yosida_propagator(m, w, 4, 1.0, -1.0, 7), DomainError);
	const auto r = yosida_propagator(m, w, 4, 1.0, -1.0, 8);
	EXPECT_LT(r.error_estimate, 1e-13);
	EXPECT_EQ(r.tag(), "yosida(4,8)");
}

TEST(Reference, UnitarityIdentityComposition)
{
	const auto b = corpus::basis(2, 3);
	const auto m = corpus::model(b, corpus::couplings()[2].g);
	const TimeGrid g(corpus::t1, corpus::t2, 1e-2);
	const auto full = reference_propagator(m, g, 1.0, -1.0);
	EXPECT_LT(full.unitarity_defect, 1e-10);
	const auto same = reference_propagator(m, g, 0.3, 0.3);
	EXPECT_TRUE(same.matrix == DenseMatrix::Identity(56, 56));
	const auto a = reference_propagator(m, g, 0.5, -0.2);
	const auto c = reference_propagator(m, g, -0.2, -0.7);
	const auto ac = reference_propagator(m, g, 0.5, -0.7);
	EXPECT_LT(op_norm(DenseMatrix(a.matrix * c.matrix - ac.matrix)), 1e-8);
	EXPECT_THROW(reference_propagator(m, g, -0.5, 0.5), DomainError);
}

TEST(Reference, SecondOrderConvergence)
{
	const auto b = corpus::basis(1, 2);
	const auto m = corpus::model(b, corpus::couplings()[0].g);
	const TimeGrid g(1.0, 1.0, 2e-2);
	const DenseMatrix fine = reference_propagator(m, g.refined(16), 1.0, -1.0).matrix;
	std::vector<double> dts, errs;
	for(const long f : {1L, 2L, 4L})
	{
		const auto level = g.refined(f);
		dts.push_back(level.dt());
		errs.push_back(op_norm(DenseMatrix(reference_propagator(m, level, 1.0, -1.0).matrix - fine)));
	}
	EXPECT_NEAR(loglog_slope(dts, errs), 2.0, 0.2);
}

TEST(SMatrix, ZeroCouplingIsIdentityAndShiftInvariant)
{
	const auto b = corpus::basis(1, 3);
	const TimeGrid g(1.0, 1.0, 1e-2);
	const ModelOperators zero(b, CouplingFunction(), 0.4);
	const auto n = static_cast<Eigen::Index>(b->dimension());
	EXPECT_LT(op_norm(DenseMatrix(s_matrix(zero, g).matrix - DenseMatrix::Identity(n, n))), 1e-12);

	const auto m = corpus::model(b, corpus::couplings()[1].g);
	const DenseMatrix s = s_matrix(m, g).matrix;
	const DenseMatrix s5 = s_matrix(m.with_shift(m.shift() + 5.0), g).matrix;
	EXPECT_LT(op_norm(DenseMatrix(s - s5)), 1e-10);
	EXPECT_LT(unitarity_defect(s), 1e-10);
}

TEST(SMatrix, RejectsSupportOutsideWindow)
{
	const auto b = corpus::basis(1, 2);
	const ModelOperators m(b, corpus::couplings()[0].g, 0.5);
	EXPECT_THROW(s_matrix(m, TimeGrid(0.5, 1.0, 1e-2)), DomainError);
}

TEST(Dirac, GeneratorIsTheInteractionPictureHamiltonian)
{
	const auto b = corpus::basis(1, 2);
	const auto m = corpus::model(b, corpus::couplings()[0].g);
	const TimeGrid g(1.0, 1.0, 1e-3);
	const std::vector<double> h{1e-2, 5e-3, 2.5e-3};
	const auto rep = dirac_generator_check(m, g, 0.1, -0.5, h);
	EXPECT_NEAR(rep.slope, 1.0, 0.2);
	EXPECT_LT(rep.defects.back(), 1e-2 * op_norm(dirac_hamiltonian(m, 0.1)));
	EXPECT_LT(hermitian_defect(dirac_hamiltonian(m, 0.1)), 1e-13);
}
