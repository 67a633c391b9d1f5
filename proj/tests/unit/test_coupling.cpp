#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "corpus.hpp"
#include "phi4lab/coupling.hpp"
#include "phi4lab/errors.hpp"

using namespace phi4lab;
using std::numbers::pi;

namespace
{

double bump_unit(double u)
{
	return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
}

double cos_transform_reference(double kappa)
{
	// split [-1, 1] into panels so the oscillation stays resolved
	const int panels = 8 + static_cast<int>(kappa);
	double sum = 0.0;
	for(int i = 0; i < panels; ++i)
	{
		const double a = -1.0 + 2.0 * i / panels, b = -1.0 + 2.0 * (i + 1) / panels;
		sum += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
			[kappa](double u) { return std::cos(kappa * u) * bump_unit(u); }, a, b, 10, 1e-15);
	}
	return sum;
}

} // namespace

TEST(Bump, IntegralMatchesTanhSinh)
{
	boost::math::quadrature::tanh_sinh<double> ts;
	const double ref = ts.integrate([](double u) { return bump_unit(u); }, -1.0, 1.0, 1e-15);
	EXPECT_NEAR(bump_integral(), ref, 1e-14);
	EXPECT_NEAR(bump_integral(), 0.4439938161680799, 1e-15);
	EXPECT_NEAR(bump_fourier(0.0), bump_integral(), 1e-15);
}

TEST(Bump, FourierMatchesDirectQuadrature)
{
	for(const double kappa : {0.5, 1.0, 3.0, 10.0, 25.0, 60.0})
		EXPECT_NEAR(bump_fourier(kappa), cos_transform_reference(kappa), 1e-14) << "kappa=" << kappa;
	EXPECT_DOUBLE_EQ(bump_fourier(-7.0), bump_fourier(7.0));
}

TEST(Bump, FourierDecaysFasterThanAnyPower)
{
	const double a = std::abs(bump_fourier(50.0));
	const double b = std::abs(bump_fourier(200.0));
	EXPECT_LT(b, a);
	EXPECT_LT(b, 1e-7);
	for(const double k : {0.0, 3.0, 40.0, 300.0})
	{
		const auto p = Profile::bump(0.0, 1.0);
		EXPECT_LE(std::abs(p.fourier(k)), p.fourier_envelope(k) * (1 + 1e-12) + 1e-300);
	}
}

TEST(Profile, ScaledBumpTransform)
{
	const auto p = Profile::bump(0.7, 2.5);
	for(const double k : {0.0, 0.3, 2.0})
	{
		const cplx expect = 2.5 * std::exp(I * k * 0.7) * bump_fourier(2.5 * k);
		EXPECT_LT(std::abs(p.fourier(k) - expect), 1e-15);
	}
	EXPECT_DOUBLE_EQ(p.support()->first, 0.7 - 2.5);
	EXPECT_DOUBLE_EQ(p.support()->second, 0.7 + 2.5);
	EXPECT_DOUBLE_EQ(p.integral(), 2.5 * bump_integral());
}

TEST(Profile, GaussianTransformClosedForm)
{
	const double sigma = 1.3, c = -0.4;
	const auto p = Profile::gaussian(c, sigma);
	for(const double k : {0.0, 0.5, 1.7, 4.0})
	{
		const cplx expect = sigma * std::sqrt(2 * pi) * std::exp(-0.5 * sigma * sigma * k * k) * std::exp(I * k * c);
		EXPECT_LT(std::abs(p.fourier(k) - expect), 1e-14);
	}
	EXPECT_FALSE(p.support().has_value());
}

TEST(Profile, DerivativeMatchesFiniteDifference)
{
	const CouplingFunction g({{1.0, Profile::gaussian(0.0, 1.0), Profile::bump(0.1, 0.5)}});
	const auto d1 = g.time_derivative(1);
	const auto d2 = g.time_derivative(2);
	const double h = 1e-5;
	for(const double t : {-0.2, 0.05, 0.3})
	{
		const double fd1 = (g.evaluate(0.3, t + h) - g.evaluate(0.3, t - h)) / (2 * h);
		const double fd2 = (g.evaluate(0.3, t + h) - 2 * g.evaluate(0.3, t) + g.evaluate(0.3, t - h)) / (h * h);
		EXPECT_NEAR(d1.evaluate(0.3, t), fd1, 1e-6 * std::max(1.0, std::abs(fd1)));
		EXPECT_NEAR(d2.evaluate(0.3, t), fd2, 1e-3 * std::max(1.0, std::abs(fd2)));
	}
}

TEST(Coupling, SupportsAndSums)
{
	const auto gs = corpus::couplings();
	const auto mixed = gs[2].g;
	const auto ts = mixed.time_support();
	ASSERT_TRUE(ts.has_value());
	EXPECT_DOUBLE_EQ(ts->first, -0.8);
	EXPECT_DOUBLE_EQ(ts->second, 0.85);
	EXPECT_FALSE(mixed.space_support().has_value());
	EXPECT_TRUE(CouplingFunction().is_zero());
	const auto sum = gs[0].g + gs[1].g;
	EXPECT_EQ(sum.terms().size(), 2u);
	EXPECT_DOUBLE_EQ(sum.evaluate(0.3, 0.1), gs[0].g.evaluate(0.3, 0.1) + gs[1].g.evaluate(0.3, 0.1));
	EXPECT_THROW(Profile::bump(0.0, -1.0), DomainError);
}

TEST(OmegaNorm, GammaClosedForm)
{
	for(const double m : {0.2, 1.0, 3.0})
		for(const double r : {16.0 / 15.0, 8.0 / 7.0, 4.0 / 3.0, 2.0, 3.0})
		{
			const double integral = std::pow(m, 1.0 - r) * std::sqrt(pi) * std::tgamma((r - 1) / 2) / std::tgamma(r / 2);
			EXPECT_NEAR(omega_inverse_norm(m, r) / std::pow(integral, 1.0 / r), 1.0, 1e-12) << m << " " << r;
		}
	EXPECT_NEAR(omega_inverse_norm(0.5, 2.0), std::sqrt(pi / 0.5), 1e-13);
	EXPECT_THROW(omega_inverse_norm(1.0, 1.0), DomainError);
}

TEST(GNorm, GaussianClosedForm)
{
	const double a = 1.7, sigma = 0.9, t = 0.1;
	const CouplingFunction g({{a, Profile::gaussian(0.3, sigma), Profile::bump(0.0, 0.5)}});
	const double tau = Profile::bump(0.0, 0.5).value(t);
	for(const double r : {32.0 / 15.0, 2.0, 3.0})
	{
		const double expect =
			a * tau * sigma * std::sqrt(2 * pi) * std::pow(2 * pi / (r * sigma * sigma), 1.0 / (2 * r));
		EXPECT_NEAR(g_r_norm(g, t, r) / expect, 1.0, 1e-9) << r;
	}
	EXPECT_THROW(g_r_norm(g, t, 1.0), DomainError);
}

TEST(Kernel, DefinitionAndSymmetry)
{
	const auto g = corpus::couplings()[2].g;
	const ModeGrid grid(corpus::mass, corpus::box, 2);
	const double t = 0.2;
	const auto w = build_kernel(g, grid, t);
	for(int a = -2; a <= 2; ++a)
		for(int b = -2; b <= 2; ++b)
			for(int c = -2; c <= 2; c += 2)
				for(int d = -1; d <= 1; ++d)
				{
					const double ksum = grid.momentum(a) + grid.momentum(b) + grid.momentum(c) + grid.momentum(d);
					const double weight =
						1.0 / std::sqrt(grid.omega(a) * grid.omega(b) * grid.omega(c) * grid.omega(d));
					EXPECT_LT(std::abs(w(a, b, c, d) - g.fourier_spatial(-ksum, t) * weight), 1e-14);
					// equal up to the order of the omega product
					EXPECT_LT(std::abs(w(a, b, c, d) - w(d, c, b, a)), 1e-15 * std::abs(w(a, b, c, d)) + 1e-300);
					EXPECT_LT(std::abs(w(a, b, c, d) - w(b, a, d, c)), 1e-15 * std::abs(w(a, b, c, d)) + 1e-300);
				}
	const auto zero = build_kernel(CouplingFunction(), grid, t);
	EXPECT_EQ(w_l2_norm(zero), 0.0);
}

TEST(Young, ChainHoldsOnCorpus)
{
	for(const auto& c : corpus::couplings())
		for(const int j : {1, 2})
		{
			const ModeGrid grid(corpus::mass, corpus::box, j);
			for(const double t : c.interior_times)
			{
				const auto rep = young_chain_report(c.g, grid, t);
				EXPECT_TRUE(rep.young_relations_hold);
				EXPECT_TRUE(rep.bound_holds) << c.name << " t=" << t << " w=" << rep.w_norm << " bound=" << rep.bound;
				EXPECT_NEAR(rep.g_norm * rep.g_norm, rep.gtilde_squared_norm, 1e-12 * rep.gtilde_squared_norm);
				EXPECT_NEAR(rep.exponents[7], 16.0 / 15.0, 1e-15);
			}
		}
}
