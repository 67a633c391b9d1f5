#include "phi4lab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "phi4lab/errors.hpp"

namespace phi4lab
{

namespace
{

using Poly = std::vector<double>;  // ascending coefficients

double eval_poly(const Poly& p, double u)
{
	double r = 0.0;
	for(auto it = p.rbegin(); it != p.rend(); ++it)
		r = r * u + *it;
	return r;
}

Poly poly_mul(const Poly& a, const Poly& b)
{
	Poly r(a.size() + b.size() - 1, 0.0);
	for(std::size_t i = 0; i < a.size(); ++i)
		for(std::size_t j = 0; j < b.size(); ++j)
			r[i + j] += a[i] * b[j];
	return r;
}

Poly poly_add(Poly a, const Poly& b)
{
	if(a.size() < b.size())
		a.resize(b.size(), 0.0);
	for(std::size_t i = 0; i < b.size(); ++i)
		a[i] += b[i];
	return a;
}

Poly poly_derivative(const Poly& p)
{
	if(p.size() <= 1)
		return {0.0};
	Poly r(p.size() - 1);
	for(std::size_t i = 1; i < p.size(); ++i)
		r[i - 1] = static_cast<double>(i) * p[i];
	return r;
}

// d^n/du^n exp(-1/q), q = 1 - u^2, equals P_n(u) q^{-2n} exp(-1/q) with
// P_{n+1} = P_n' q^2 + 4 n u q P_n - 2 u P_n.
Poly bump_derivative_poly(int n)
{
	const Poly q{1.0, 0.0, -1.0};
	const Poly q2 = poly_mul(q, q);
	Poly p{1.0};
	for(int i = 0; i < n; ++i)
	{
		const Poly a = poly_mul(poly_derivative(p), q2);
		const Poly b = poly_mul(poly_mul(Poly{0.0, 4.0 * i}, q), p);
		const Poly c = poly_mul(Poly{0.0, -2.0}, p);
		p = poly_add(poly_add(a, b), c);
	}
	return p;
}

double bump_unit(double u, int n)
{
	if(!(std::abs(u) < 1.0))
		return 0.0;
	const double q = 1.0 - u * u;
	if(n == 0)
		return std::exp(-1.0 / q);
	const Poly p = bump_derivative_poly(n);
	return eval_poly(p, u) * std::exp(-1.0 / q - 2.0 * n * std::log(q));
}

// probabilists' Hermite He_n
double hermite(int n, double u)
{
	double h0 = 1.0;
	if(n == 0)
		return h0;
	double h1 = u;
	for(int k = 1; k < n; ++k)
	{
		const double h2 = u * h1 - k * h0;
		h0 = h1;
		h1 = h2;
	}
	return h1;
}

constexpr int envelope_orders = 10;

// ||b^{(n)}||_1 for n = 0..envelope_orders, with a small safety margin; the bound
// |B(kappa)| <= ||b^{(n)}||_1 / kappa^n follows from n partial integrations.
const std::array<double, envelope_orders + 1>& bump_derivative_l1()
{
	static const std::array<double, envelope_orders + 1> norms = [] {
		std::array<double, envelope_orders + 1> r{};
		boost::math::quadrature::tanh_sinh<double> ts;
		for(int n = 0; n <= envelope_orders; ++n)
		{
			const Poly p = bump_derivative_poly(n);
			auto f = [&p, n](double u) {
				const double q = 1.0 - u * u;
				if(q <= 0.0)
					return 0.0;
				return std::abs(eval_poly(p, u) * std::exp(-1.0 / q - 2.0 * n * std::log(q)));
			};
			// split at the origin and on a fine grid so kinks of |P_n| are resolved
			double total = 0.0;
			const int panels = 64;
			for(int i = 0; i < panels; ++i)
			{
				const double a = -1.0 + 2.0 * i / panels;
				const double b = -1.0 + 2.0 * (i + 1) / panels;
				total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-9);
			}
			r[static_cast<std::size_t>(n)] = 1.01 * total;
		}
		return r;
	}();
	return norms;
}

double bump_fourier_envelope(double kappa)
{
	const auto& l1 = bump_derivative_l1();
	double best = l1[0];
	const double ak = std::abs(kappa);
	if(ak <= 0.0)
		return best;
	double power = 1.0;
	for(int n = 1; n <= envelope_orders; ++n)
	{
		power *= ak;
		best = std::min(best, l1[static_cast<std::size_t>(n)] / power);
	}
	return best;
}

} // namespace

// ---------------------------------------------------------------------------

Profile Profile::bump(double center, double halfwidth)
{
	if(!(halfwidth > 0.0))
		throw DomainError("bump halfwidth must be positive");
	return {ProfileKind::bump, center, halfwidth, 0};
}

Profile Profile::gaussian(double center, double sigma)
{
	if(!(sigma > 0.0))
		throw DomainError("gaussian sigma must be positive");
	return {ProfileKind::gaussian, center, sigma, 0};
}

double Profile::value(double s) const
{
	const double u = (s - center) / width;
	const double scale = std::pow(width, -derivative);
	if(kind == ProfileKind::bump)
		return scale * bump_unit(u, derivative);
	const double sign = (derivative % 2 == 0) ? 1.0 : -1.0;
	return sign * scale * hermite(derivative, u) * std::exp(-0.5 * u * u);
}

std::optional<std::pair<double, double>> Profile::support() const
{
	if(kind == ProfileKind::gaussian)
		return std::nullopt;
	return std::make_pair(center - width, center + width);
}

double Profile::integral() const
{
	if(derivative != 0)
		return 0.0;
	if(kind == ProfileKind::gaussian)
		return width * std::sqrt(2.0 * std::numbers::pi);
	return width * bump_integral();
}

cplx Profile::fourier(double k) const
{
	if(derivative != 0)
		throw DomainError("Fourier transform is only provided for underived profiles");
	const cplx phase = std::exp(I * k * center);
	if(kind == ProfileKind::gaussian)
		return phase * width * std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * width * width * k * k);
	return phase * width * bump_fourier(k * width);
}

double Profile::fourier_envelope(double k) const
{
	if(kind == ProfileKind::gaussian)
		return width * std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * width * width * k * k);
	return width * bump_fourier_envelope(k * width);
}

// ---------------------------------------------------------------------------

CouplingFunction::CouplingFunction(std::vector<SeparableTerm> terms) : terms_(std::move(terms))
{
	for(const auto& term : terms_)
	{
		if(!std::isfinite(term.amplitude))
			throw DomainError("coupling amplitude must be finite");
		if(!(term.spatial.width > 0.0) || !(term.temporal.width > 0.0))
			throw DomainError("profile widths must be positive");
		if(term.spatial.derivative != 0)
			throw DomainError("spatial profiles are never differentiated");
	}
}

bool CouplingFunction::is_zero() const noexcept
{
	return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.amplitude == 0.0; });
}

bool CouplingFunction::bump_only() const noexcept
{
	return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) {
		return t.spatial.kind == ProfileKind::bump && t.temporal.kind == ProfileKind::bump;
	});
}

double CouplingFunction::evaluate(double x, double t) const
{
	double sum = 0.0;
	for(const auto& term : terms_)
		sum += term.amplitude * term.spatial.value(x) * term.temporal.value(t);
	return sum;
}

CouplingFunction CouplingFunction::time_derivative(int order) const
{
	if(order < 1)
		throw DomainError("derivative order must be at least 1");
	CouplingFunction r = *this;
	for(auto& term : r.terms_)
		term.temporal.derivative += order;
	return r;
}

cplx CouplingFunction::fourier_spatial(double k, double t) const
{
	cplx sum = 0.0;
	for(std::size_t i = 0; i < terms_.size(); ++i)
	{
		const double w = temporal_weight(i, t);
		if(w != 0.0)
			sum += w * terms_[i].spatial.fourier(k);
	}
	return sum;
}

double CouplingFunction::temporal_weight(std::size_t term, double t) const
{
	const auto& s = terms_.at(term);
	return s.amplitude * s.temporal.value(t);
}

CouplingFunction CouplingFunction::scaled(double factor) const
{
	CouplingFunction r = *this;
	for(auto& term : r.terms_)
		term.amplitude *= factor;
	return r;
}

CouplingFunction CouplingFunction::operator+(const CouplingFunction& other) const
{
	CouplingFunction r = *this;
	r.terms_.insert(r.terms_.end(), other.terms_.begin(), other.terms_.end());
	return r;
}

namespace
{

template<class Get>
std::optional<std::pair<double, double>> hull(const std::vector<SeparableTerm>& terms, Get&& get)
{
	std::optional<std::pair<double, double>> r;
	for(const auto& term : terms)
	{
		const auto s = get(term).support();
		if(!s)
			return std::nullopt;
		if(!r)
			r = s;
		else
			r = std::make_pair(std::min(r->first, s->first), std::max(r->second, s->second));
	}
	return r;
}

} // namespace

std::optional<std::pair<double, double>> CouplingFunction::time_support() const
{
	return hull(terms_, [](const SeparableTerm& t) -> const Profile& { return t.temporal; });
}

std::optional<std::pair<double, double>> CouplingFunction::space_support() const
{
	return hull(terms_, [](const SeparableTerm& t) -> const Profile& { return t.spatial; });
}

// ---------------------------------------------------------------------------

double bump_integral()
{
	return bump_fourier(0.0);
}

double bump_fourier(double kappa)
{
	// The periodic extension of the bump is smooth, so the trapezoidal sum with N points on
	// [-1, 1] equals sum_m B(kappa + m pi N) (Poisson). For m != 0, |kappa + m pi N| >= |m| D
	// with D = pi N - kappa, and every envelope order n >= 2 is summable over m, giving an
	// aliasing error of at most 2 zeta(2) envelope(D).
	static const double gap = [] {
		double d = 8.0;
		while(2.0 * 1.645 * bump_fourier_envelope(d) > 1e-16)
			d *= 1.25;
		return d;
	}();
	const double key = std::abs(kappa);
	const auto n = static_cast<long>(std::ceil((key + gap) / std::numbers::pi));
	if(n > 50'000'000)
		throw QuadratureError("bump Fourier transform needs too many points at kappa = " + std::to_string(key));
	// even integrand: u_0 = 0 once, then the pairs +-u_i
	const double step = 2.0 / static_cast<double>(n);
	double sum = bump_unit(0.0, 0);
	for(long i = 1; 2 * i < n; ++i)
	{
		const double u = step * static_cast<double>(i);
		sum += 2.0 * std::cos(key * u) * bump_unit(u, 0);
	}
	if(n % 2 == 0)
		sum += std::cos(key) * bump_unit(1.0, 0);  // zero, kept for the pairing
	return step * sum;
}

// ---------------------------------------------------------------------------

KernelW::KernelW(ModeGrid grid, double t, std::vector<cplx> values)
	: grid_(grid), t_(t), values_(std::move(values))
{
	const auto m = static_cast<std::size_t>(grid_.mode_count());
	if(values_.size() != m * m * m * m)
		throw DomainError("kernel size does not match the mode grid");
}

cplx KernelW::operator()(int j1, int j2, int j3, int j4) const
{
	const auto m = static_cast<std::size_t>(grid_.mode_count());
	const auto s = [this](int j) { return static_cast<std::size_t>(grid_.slot(j)); };
	return values_[((s(j1) * m + s(j2)) * m + s(j3)) * m + s(j4)];
}

KernelW build_kernel(const CouplingFunction& g, const ModeGrid& grid, double t)
{
	const int cutoff = grid.cutoff();
	const int m = grid.mode_count();
	std::vector<cplx> by_total(static_cast<std::size_t>(8 * cutoff + 1));
	for(int total = -4 * cutoff; total <= 4 * cutoff; ++total)
		by_total[static_cast<std::size_t>(total + 4 * cutoff)] = g.fourier_spatial(-grid.dk() * total, t);

	std::vector<double> inv_sqrt_omega(static_cast<std::size_t>(m));
	for(int s = 0; s < m; ++s)
		inv_sqrt_omega[static_cast<std::size_t>(s)] = 1.0 / std::sqrt(grid.omega(grid.mode_at(s)));

	std::vector<cplx> values(static_cast<std::size_t>(m * m * m * m));
	std::size_t idx = 0;
	for(int a = 0; a < m; ++a)
		for(int b = 0; b < m; ++b)
			for(int c = 0; c < m; ++c)
				for(int d = 0; d < m; ++d)
				{
					const int total = grid.mode_at(a) + grid.mode_at(b) + grid.mode_at(c) + grid.mode_at(d);
					const auto w = [&](int s) { return inv_sqrt_omega[static_cast<std::size_t>(s)]; };
					values[idx++] = by_total[static_cast<std::size_t>(total + 4 * cutoff)] * w(a) * w(b) * w(c) * w(d);
				}
	return {grid, t, std::move(values)};
}

double w_l2_norm(const KernelW& w)
{
	double sum = 0.0;
	for(const auto& v : w.values())
		sum += std::norm(v);
	const double dk = w.grid().dk();
	return std::sqrt(dk * dk * dk * dk * sum);
}

// ---------------------------------------------------------------------------

double g_r_norm(const CouplingFunction& g, double t, double r)
{
	if(!(r > 1.0))
		throw DomainError("r-norm needs r > 1");
	std::vector<std::pair<double, Profile>> active;
	double min_width = std::numeric_limits<double>::infinity();
	for(std::size_t i = 0; i < g.terms().size(); ++i)
	{
		const double w = g.temporal_weight(i, t);
		if(w != 0.0)
		{
			active.emplace_back(std::abs(w), g.terms()[i].spatial);
			min_width = std::min(min_width, g.terms()[i].spatial.width);
		}
	}
	if(active.empty())
		return 0.0;

	auto envelope = [&active, r](double k) {
		double e = 0.0;
		for(const auto& [w, p] : active)
			e += w * p.fourier_envelope(k);
		return std::pow(e, r);
	};
	auto integrand = [&g, t, r](double k) { return std::pow(std::abs(g.fourier_spatial(k, t)), r); };

	// |g~(-k)| = |g~(k)| for real g, so integrate the half line and double
	double cut = 4.0 / min_width;
	const double peak = envelope(0.0);
	while(envelope(cut) * cut > 1e-14 * peak / min_width)
		cut *= 1.5;

	boost::math::quadrature::exp_sinh<double> es;
	double tail_error = 0.0;
	const double tail = es.integrate([&](double s) { return envelope(cut + s); }, 1e-10, &tail_error);

	// one Kronrod pass per unit of kappa, then refine only the panels whose error estimate
	// matters against the whole integral (far panels sit at roundoff and never converge relatively)
	const int panels = std::max(8, static_cast<int>(std::ceil(cut * min_width)));
	using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
	std::vector<double> values(static_cast<std::size_t>(panels)), errors(values.size());
	for(int i = 0; i < panels; ++i)
		values[static_cast<std::size_t>(i)] =
			GK::integrate(integrand, cut * i / panels, cut * (i + 1) / panels, 0, 0.0, &errors[static_cast<std::size_t>(i)]);
	double body = 0.0;
	for(const double v : values)
		body += v;
	double error = 0.0;
	for(int i = 0; i < panels; ++i)
	{
		auto& e = errors[static_cast<std::size_t>(i)];
		if(e > 1e-12 * body)
		{
			body -= values[static_cast<std::size_t>(i)];
			values[static_cast<std::size_t>(i)] =
				GK::integrate(integrand, cut * i / panels, cut * (i + 1) / panels, 6, 1e-12, &e);
			body += values[static_cast<std::size_t>(i)];
		}
		error += e;
	}
	if(!std::isfinite(body) || error > 1e-9 * body + 1e-300 || tail > 1e-9 * body)
		throw QuadratureError("r-norm quadrature did not converge");
	return std::pow(2.0 * body, 1.0 / r);
}

double omega_inverse_norm(double mass, double r)
{
	if(!(r > 1.0))
		throw DomainError("||omega^{-1}||_r is finite only for r > 1");
	if(!(mass > 0.0))
		throw DomainError("mass must be positive");
	// k = m tan(theta) gives m^{1-r} int_0^{pi/2} sin^{r-2}(u) du; u = v^{1/(r-1)} removes the
	// endpoint singularity, leaving the smooth integrand (sin u / u)^{r-2} / (r-1).
	const double p = 1.0 / (r - 1.0);
	const auto integrand = [r, p](double v) {
		const double u = std::pow(v, p);
		const double sinc = u > 0.0 ? std::sin(u) / u : 1.0;
		return p * std::pow(sinc, r - 2.0);
	};
	double error = 0.0;
	const double half = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
		integrand, 0.0, std::pow(0.5 * std::numbers::pi, r - 1.0), 15, 1e-14, &error);
	if(!std::isfinite(half) || error > 1e-10 * half)
		throw QuadratureError("omega inverse norm quadrature did not converge");
	return std::pow(2.0 * half * std::pow(mass, 1.0 - r), 1.0 / r);
}

YoungChainReport young_chain_report(const CouplingFunction& g, const ModeGrid& grid, double t,
                                    double relative_tolerance)
{
	YoungChainReport rep;
	rep.exponents = {2.0, 2.0, 4.0 / 3.0, 4.0 / 3.0, 8.0 / 7.0, 8.0 / 7.0, 16.0 / 15.0, 16.0 / 15.0};
	const auto& e = rep.exponents;
	const auto inv = [](double x) { return 1.0 / x; };
	rep.young_relations_hold = std::abs(inv(e[0]) + inv(e[1]) - 1.0) < 1e-15
	                           && std::abs(inv(e[2]) + inv(e[3]) - 1.0 - inv(e[1])) < 1e-15
	                           && std::abs(inv(e[4]) + inv(e[5]) - 1.0 - inv(e[3])) < 1e-15
	                           && std::abs(inv(e[6]) + inv(e[7]) - 1.0 - inv(e[5])) < 1e-15;

	rep.w_norm = w_l2_norm(build_kernel(g, grid, t));
	double product = 1.0;
	for(std::size_t i = 0; i < 4; ++i)
	{
		rep.omega_norms[i] = omega_inverse_norm(grid.mass(), e[2 * i]);
		product *= rep.omega_norms[i];
	}
	rep.g_norm = g_r_norm(g, t, 2.0 * e[7]);
	rep.gtilde_squared_norm = rep.g_norm * rep.g_norm;
	rep.bound = std::sqrt(product * rep.gtilde_squared_norm);
	rep.ratio_bound = std::sqrt(product);
	rep.ratio = rep.g_norm > 0.0 ? rep.w_norm / rep.g_norm : 0.0;
	rep.bound_holds = rep.w_norm <= rep.bound * (1.0 + relative_tolerance);
	return rep;
}

} // namespace phi4lab
