#include "phi4lab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/quadrature/gauss.hpp>

#include "phi4lab/errors.hpp"

namespace phi4lab
{

namespace
{

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double slope_or_nan(const std::vector<double>& x, const std::vector<double>& y)
{
	if(x.size() < 2)
		return nan;
	for(const double v : y)
		if(!(v > 0.0) || !std::isfinite(v))
			return nan;
	return loglog_slope(x, y);
}

DenseMatrix identity(const ModelOperators& model)
{
	const auto n = static_cast<Eigen::Index>(model.dimension());
	return DenseMatrix::Identity(n, n);
}

std::vector<double> estimation_times(const TimeGrid& grid, long max_points = 400)
{
	return grid.nodes(std::max(1L, grid.steps() / max_points));
}

void hash_profile(Fnv1a& h, const Profile& p)
{
	h.update_value(static_cast<int>(p.kind));
	h.update_value(p.center);
	h.update_value(p.width);
	h.update_value(p.derivative);
}

void hash_coupling(Fnv1a& h, const CouplingFunction& g)
{
	for(const auto& term : g.terms())
	{
		h.update_value(term.amplitude);
		hash_profile(h, term.spatial);
		hash_profile(h, term.temporal);
	}
}

} // namespace

double Thresholds::get(const std::string& key, double fallback) const
{
	const auto it = values_.find(key);
	return it == values_.end() ? fallback : it->second;
}

// ---------------------------------------------------------------------------

bool ExperimentVerdict::passed() const
{
	return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

nlohmann::json ExperimentVerdict::to_json() const
{
	char digest_hex[17];
	std::snprintf(digest_hex, sizeof digest_hex, "%016llx", static_cast<unsigned long long>(digest));
	nlohmann::json j;
	j["name"] = name;
	j["digest"] = digest_hex;
	j["pass"] = passed();
	auto& list = j["checks"] = nlohmann::json::array();
	for(const auto& c : checks)
	{
		nlohmann::json e{{"name", c.name}, {"relation", c.relation}, {"provenance", c.provenance}, {"pass", c.pass}};
		// NaN is not valid JSON
		e["value"] = std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(nullptr);
		e["threshold"] = c.threshold;
		if(c.relation == "in")
			e["upper"] = c.upper;
		list.push_back(std::move(e));
	}
	j["measured"] = measured;
	return j;
}

void ExperimentVerdict::below(const std::string& check, double value, const Thresholds& th, const std::string& key,
                              double fallback)
{
	const double t = th.get(key, fallback);
	checks.push_back({check, value, "<", t, 0.0, th.overridden(key) ? "config" : "default", value < t});
}

void ExperimentVerdict::at_most(const std::string& check, double value, const Thresholds& th, const std::string& key,
                                double fallback)
{
	const double t = th.get(key, fallback);
	checks.push_back({check, value, "<=", t, 0.0, th.overridden(key) ? "config" : "default", value <= t});
}

void ExperimentVerdict::above(const std::string& check, double value, const Thresholds& th, const std::string& key,
                              double fallback)
{
	const double t = th.get(key, fallback);
	checks.push_back({check, value, ">", t, 0.0, th.overridden(key) ? "config" : "default", value > t});
}

void ExperimentVerdict::at_least(const std::string& check, double value, const Thresholds& th, const std::string& key,
                                 double fallback)
{
	const double t = th.get(key, fallback);
	checks.push_back({check, value, ">=", t, 0.0, th.overridden(key) ? "config" : "default", value >= t});
}

void ExperimentVerdict::within(const std::string& check, double value, const Thresholds& th,
                               const std::string& center_key, double center, const std::string& width_key,
                               double width)
{
	const double c = th.get(center_key, center);
	const double w = th.get(width_key, width);
	const bool config = th.overridden(center_key) || th.overridden(width_key);
	checks.push_back({check, value, "in", c - w, c + w, config ? "config" : "default",
	                  value >= c - w && value <= c + w});
}

void ExperimentVerdict::exact(const std::string& check, bool holds, double value)
{
	checks.push_back({check, value, "==", 0.0, 0.0, "identity", holds});
}

std::uint64_t digest_inputs(const ModelOperators& model, const TimeGrid& grid, const Thresholds& th,
                            std::uint64_t extra)
{
	Fnv1a h;
	h.update_value(model.basis()->hash());
	hash_coupling(h, model.coupling());
	h.update_value(model.shift());
	h.update_value(grid.t1());
	h.update_value(grid.t2());
	h.update_value(grid.steps());
	for(const auto& [key, value] : th.values())
	{
		h.update(key.data(), key.size());
		h.update_value(value);
	}
	h.update_value(extra);
	return h.digest();
}

// ---------------------------------------------------------------------------

ExperimentVerdict propagate_experiment(const ModelOperators& model, const TimeGrid& grid, const Thresholds& th)
{
	ExperimentVerdict v;
	v.name = "propagate";
	v.digest = digest_inputs(model, grid, th);
	const long k = grid.steps();

	const auto full = reference_propagator(model, grid, grid.t2(), grid.start());
	v.measured["unitarity_defect"] = full.unitarity_defect;
	v.at_most("unitarity", full.unitarity_defect, th, "propagate.unitarity", 1e-10);

	double identity_defect = 0.0;
	for(const long i : {0L, k / 2, k})
		identity_defect = std::max(identity_defect, op_norm(DenseMatrix(
		                                                reference_propagator(model, grid, grid.node(i), grid.node(i)).matrix
		                                                - identity(model))));
	v.exact("identity_at_equal_times", identity_defect == 0.0, identity_defect);

	Table triples{"composition", {"r", "s", "t", "defect"}, {}};
	double composition = 0.0;
	const long triple_index[][3] = {{0, k / 3, 2 * k / 3}, {k / 4, k / 2, k}, {0, k / 2, k}, {k / 5, k / 5 + 1, k - 1}};
	for(const auto& tri : triple_index)
	{
		const double r = grid.node(tri[0]), s = grid.node(tri[1]), t = grid.node(tri[2]);
		const DenseMatrix lhs = reference_propagator(model, grid, t, s).matrix
		                        * reference_propagator(model, grid, s, r).matrix;
		const double d = op_norm(DenseMatrix(lhs - reference_propagator(model, grid, t, r).matrix));
		triples.rows.push_back({r, s, t, d});
		composition = std::max(composition, d);
	}
	v.tables.push_back(std::move(triples));
	v.measured["composition_defect"] = composition;
	v.at_most("composition", composition, th, "propagate.composition", 1e-8);

	// error of each level against its own 4x refinement
	Table order{"order", {"dt", "error_vs_4x"}, {}};
	std::vector<double> dts, errors;
	for(const long f : {1L, 2L, 4L})
	{
		const TimeGrid coarse = grid.refined(f);
		const TimeGrid fine = grid.refined(4 * f);
		const auto uc = reference_propagator(model, coarse, coarse.t2(), coarse.start());
		const auto uf = reference_propagator(model, fine, fine.t2(), fine.start());
		dts.push_back(coarse.dt());
		errors.push_back(op_norm(DenseMatrix(uc.matrix - uf.matrix)));
		order.rows.push_back({dts.back(), errors.back()});
	}
	v.tables.push_back(std::move(order));
	if(model.coupling().is_zero())
		v.exact("order_not_applicable_for_zero_coupling", true);
	else
	{
		const double slope = slope_or_nan(dts, errors);
		v.measured["order_slope"] = std::isfinite(slope) ? nlohmann::json(slope) : nlohmann::json(nullptr);
		v.within("order", slope, th, "propagate.order", 2.0, "propagate.order_width", 0.2);
	}
	return v;
}

ExperimentVerdict smatrix_experiment(const ModelOperators& model, const TimeGrid& grid, const Thresholds& th)
{
	ExperimentVerdict v;
	v.name = "smatrix";
	v.digest = digest_inputs(model, grid, th);

	const auto s = s_matrix(model, grid);
	v.measured["unitarity_defect"] = s.unitarity_defect;
	v.at_most("unitarity", s.unitarity_defect, th, "smatrix.unitarity", 1e-10);

	if(model.coupling().is_zero())
	{
		const double d = op_norm(DenseMatrix(s.matrix - identity(model)));
		v.measured["identity_defect"] = d;
		v.at_most("identity_for_zero_coupling", d, th, "smatrix.identity", 1e-10);
	}

	const auto shifted = s_matrix(model.with_shift(model.shift() + 5.0), grid);
	const double shift_defect = op_norm(DenseMatrix(s.matrix - shifted.matrix));
	v.measured["shift_defect"] = shift_defect;
	v.at_most("shift_invariance", shift_defect, th, "smatrix.shift", 1e-10);

	// enlarge by whole steps so the old nodes stay nodes
	const long pad = std::max(1L, grid.steps() / 8);
	const TimeGrid wide(grid.t1() + static_cast<double>(pad) * grid.dt(), grid.t2() + static_cast<double>(pad) * grid.dt(),
	                    grid.dt());
	const auto s_wide = s_matrix(model, wide);
	const double window_defect = op_norm(DenseMatrix(s.matrix - s_wide.matrix));
	v.measured["window_defect"] = window_defect;
	v.at_most("window_independence", window_defect, th, "smatrix.window", 1e-8);

	// U^D is constant while both arguments stay before the support
	if(const auto support = model.coupling().time_support())
	{
		long last = 0;
		while(last + 1 < grid.steps() && grid.node(last + 1) < support->first)
			++last;
		if(last >= 2)
		{
			const auto a = dirac_propagator(model, reference_propagator(model, grid, grid.node(last), grid.node(0)));
			const auto b = dirac_propagator(model, reference_propagator(model, grid, grid.node(last - 1), grid.node(1)));
			const double d = op_norm(DenseMatrix(a.matrix - b.matrix));
			v.measured["stabilization_defect"] = d;
			v.at_most("stabilization", d, th, "smatrix.stabilization", 1e-10);
		}
	}
	return v;
}

ExperimentVerdict yosida_experiment(const ModelOperators& model, const TimeGrid& grid, std::span<const int> n_list,
                                    std::span<const long> k_list, std::span<const int> n_sweep, const Thresholds& th)
{
	ExperimentVerdict v;
	v.name = "yosida";
	Fnv1a extra;
	for(const int n : n_list)
		extra.update_value(n);
	for(const long k : k_list)
		extra.update_value(k);
	for(const int n : n_sweep)
		extra.update_value(n);
	v.digest = digest_inputs(model, grid, th, extra.digest());
	if(k_list.empty())
		throw DomainError("K list is empty");

	const double t = grid.t2(), s = grid.start();
	Table k_table{"k_sweep", {"n", "K", "defect_2K_vs_K", "norm_UnK"}, {}};
	for(const int n : n_list)
	{
		std::vector<double> ks, defects;
		double max_norm = 0.0;
		auto previous = sliced_propagator(model, grid, n, k_list[0], t, s);
		for(std::size_t i = 0; i < k_list.size(); ++i)
		{
			const long k = k_list[i];
			const auto doubled = sliced_propagator(model, grid, n, 2 * k, t, s);
			const double d = op_norm(DenseMatrix(doubled.matrix - previous.matrix));
			const double norm = op_norm(previous.matrix);
			max_norm = std::max(max_norm, norm);
			ks.push_back(static_cast<double>(k));
			defects.push_back(d);
			k_table.rows.push_back({static_cast<double>(n), static_cast<double>(k), d, norm});
			if(i + 1 < k_list.size())
				previous = (k_list[i + 1] == 2 * k) ? doubled : sliced_propagator(model, grid, n, k_list[i + 1], t, s);
		}
		const std::string tag = "n" + std::to_string(n);
		if(model.coupling().is_zero())
		{
			// frozen generator is constant, so U_{nK} is K independent
			const double worst = *std::max_element(defects.begin(), defects.end());
			v.at_most("k_independence_" + tag, worst, th, "yosida.k_independence", 1e-12);
		}
		else
		{
			const double slope = slope_or_nan(ks, defects);
			v.measured["k_slope_" + tag] = std::isfinite(slope) ? nlohmann::json(slope) : nlohmann::json(nullptr);
			v.within("k_slope_" + tag, slope, th, "yosida.k_slope", -1.0, "yosida.k_slope_width", 0.15);
		}
		v.at_most("contraction_" + tag, max_norm, th, "yosida.contraction", 1.0 + 1e-12);
	}
	v.tables.push_back(std::move(k_table));

	if(!n_sweep.empty())
	{
		const auto reference = reference_propagator(model, grid, t, s);
		const long finest = 2 * k_list.back();
		Table n_table{"n_sweep", {"n", "error_vs_reference", "richardson_estimate", "norm_Un"}, {}};
		std::vector<double> errors;
		double max_norm = 0.0;
		for(const int n : n_sweep)
		{
			const auto un = yosida_propagator(model, grid, n, t, s, finest);
			errors.push_back(op_norm(DenseMatrix(un.matrix - reference.matrix)));
			// Richardson can leave the unit ball by O(estimate)
			const double norm = op_norm(un.matrix);
			max_norm = std::max(max_norm, norm - un.error_estimate);
			n_table.rows.push_back({static_cast<double>(n), errors.back(), un.error_estimate, norm});
		}
		v.tables.push_back(std::move(n_table));
		bool monotone = true;
		for(std::size_t i = 1; i < errors.size(); ++i)
			monotone = monotone && errors[i] < errors[i - 1];
		v.exact("n_sweep_monotone", monotone, errors.back());
		v.measured["final_n_error"] = errors.back();
		v.below("final_n_error", errors.back(), th, "yosida.final_error", 1e-2);
		v.at_most("un_contraction", max_norm, th, "yosida.contraction", 1.0 + 1e-12);
	}
	return v;
}

ExperimentVerdict causality_experiment(const BasisPtr& basis, const CouplingFunction& g1, const CouplingFunction& g2,
                                       double c, const TimeGrid& grid, std::span<const long> refinements,
                                       const Thresholds& th)
{
	const auto s1 = g1.time_support();
	const auto s2 = g2.time_support();
	if((!g1.is_zero() && !s1) || (!g2.is_zero() && !s2))
		throw DomainError("causality needs compact time supports");
	double r = 0.5 * (grid.start() + grid.t2());
	if(!g1.is_zero() && !g2.is_zero())
	{
		if(!(s2->second < s1->first))
			throw SupportOverlapError("time support of g2 must lie strictly before that of g1");
		r = 0.5 * (s2->second + s1->first);
	}
	const CouplingFunction sum = g1 + g2;
	const auto times = estimation_times(grid);
	const auto common = ModelOperators::with_estimated_shift(basis, sum, c, times);
	const double m = common.shift();
	const ModelOperators m1(basis, g1, m);
	const ModelOperators m2(basis, g2, m);

	ExperimentVerdict v;
	v.name = "causality";
	Fnv1a extra;
	hash_coupling(extra, g1);
	extra.update_value(c);
	for(const long f : refinements)
		extra.update_value(f);
	v.digest = digest_inputs(common, grid, th, extra.digest());
	v.measured["gap_midpoint"] = r;
	v.measured["common_shift"] = m;

	Table table{"refinement", {"dt", "defect", "sum_error_vs_finest"}, {}};
	std::vector<double> dts, defects;
	std::vector<DenseMatrix> sums;
	for(const long f : refinements)
	{
		const TimeGrid level = grid.refined(f);
		// S(0) = 1 by definition; computing it would only add roundoff from the free phases
		const auto s_of = [&](const ModelOperators& m) {
			return m.coupling().is_zero() ? identity(m) : s_matrix(m, level).matrix;
		};
		const DenseMatrix s12 = s_of(common);
		const DenseMatrix product = s_of(m1) * s_of(m2);
		dts.push_back(level.dt());
		defects.push_back(op_norm(DenseMatrix(s12 - product)));
		sums.push_back(s12);
	}
	for(std::size_t i = 0; i < dts.size(); ++i)
		table.rows.push_back({dts[i], defects[i], op_norm(DenseMatrix(sums[i] - sums.back()))});
	v.tables.push_back(std::move(table));

	v.measured["defect"] = defects.front();
	v.below("factorization_defect", defects.front(), th, "causality.defect", 1e-6);

	if(g1.is_zero() || g2.is_zero())
		v.exact("order_not_applicable_for_zero_coupling", true);
	else
	{
		const double slope = slope_or_nan(dts, defects);
		v.measured["defect_order"] = std::isfinite(slope) ? nlohmann::json(slope) : nlohmann::json(nullptr);
		v.within("defect_order", slope, th, "causality.order", 2.0, "causality.order_width", 0.3);
	}

	// S(g1) with its own shift must agree with the common-shift one
	if(!g1.is_zero())
	{
		const auto own = ModelOperators::with_estimated_shift(basis, g1, c, times);
		const double d = op_norm(DenseMatrix(s_matrix(own, grid).matrix - s_matrix(m1, grid).matrix));
		v.measured["shift_defect"] = d;
		v.at_most("shift_invariance", d, th, "causality.shift", 1e-10);
	}
	return v;
}

// ---------------------------------------------------------------------------

FockOperator q_operator(const ModelOperators& model, const TimeGrid& grid, double t)
{
	if(t == grid.start())
		return {model.basis(), identity(model), true};
	const DenseMatrix a = model.shifted_hamiltonian(grid.start());
	Eigen::LLT<DenseMatrix> llt(a);
	if(llt.info() != Eigen::Success)
		throw EigensolverError("H~(-T1) is not positive definite");
	return {model.basis(), DenseMatrix(llt.solve(model.shifted_hamiltonian(t))), false};
}

ExperimentVerdict q_positivity(const ModelOperators& model, const TimeGrid& grid, std::span<const double> t_list,
                               const Thresholds& th)
{
	ExperimentVerdict v;
	v.name = "qcheck";
	Fnv1a extra;
	for(const double t : t_list)
		extra.update_value(t);
	v.digest = digest_inputs(model, grid, th, extra.digest());

	const DenseMatrix a = model.shifted_hamiltonian(grid.start());
	const double a_max = hermitian_eigen(a).values.maxCoeff();
	const double c = std::isnan(model.estimated_Mg()) ? nan : model.shift() - model.estimated_Mg();

	const FockOperator q0 = q_operator(model, grid, grid.start());
	v.exact("q_identity_at_start", q0.dense() == identity(model));

	Table table{"q", {"t", "residual", "form_hermiticity", "lambda_min", "lambda_max", "a_t"}, {}};
	double residual = 0.0, form = 0.0, lmin = std::numeric_limits<double>::infinity(), bound_ratio = lmin;
	for(const double t : t_list)
	{
		const DenseMatrix b = model.shifted_hamiltonian(t);
		const DenseMatrix q = q_operator(model, grid, t).dense();
		const DenseMatrix aq = a * q;
		const double res = op_norm(DenseMatrix(aq - b)) / std::max(1.0, op_norm(b));
		const double herm = hermitian_defect(aq);
		Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> pencil(b, a, Eigen::EigenvaluesOnly);
		if(pencil.info() != Eigen::Success)
			throw EigensolverError("generalized eigensolver failed");
		const double lo = pencil.eigenvalues().minCoeff();
		const double hi = pencil.eigenvalues().maxCoeff();
		const double at = std::sqrt(std::max(hi, 1.0 / lo));
		table.rows.push_back({t, res, herm, lo, hi, at});
		residual = std::max(residual, res);
		form = std::max(form, herm);
		lmin = std::min(lmin, lo);
		if(std::isfinite(c))
			bound_ratio = std::min(bound_ratio, lo / (c / a_max));
	}
	v.tables.push_back(std::move(table));
	v.measured["lambda_min"] = lmin;
	v.at_most("solve_residual", residual, th, "qcheck.residual", 1e-10);
	v.below("form_hermiticity", form, th, "qcheck.hermiticity", 1e-10);
	v.above("positivity", lmin, th, "qcheck.positivity", 0.0);
	if(std::isfinite(c) && std::isfinite(bound_ratio))
	{
		v.measured["lower_bound_ratio"] = bound_ratio;
		// lambda_min >= c / lambda_max(H~(-T1)) up to roundoff
		v.at_least("lower_bound_consistency", bound_ratio, th, "qcheck.lower_bound", 1.0 - 1e-9);
	}
	return v;
}

ExperimentVerdict embedding_experiment(const ModelOperators& model, std::span<const double> t_list,
                                       std::size_t samples, std::uint64_t seed, const Thresholds& th)
{
	if(samples == 0)
		throw DomainError("embedding experiment needs sample states");
	ExperimentVerdict v;
	v.name = "embedding";
	Fnv1a extra;
	for(const double t : t_list)
		extra.update_value(t);
	extra.update_value(samples);
	extra.update_value(seed);
	const TimeGrid dummy(1.0, 1.0, 1.0);
	v.digest = digest_inputs(model, dummy, th, extra.digest());
	v.measured["seed"] = seed;

	const ScaleNorms scale(model);
	const auto n = static_cast<Eigen::Index>(model.dimension());
	std::mt19937_64 rng(seed);
	std::normal_distribution<double> normal;
	std::vector<Vector> states;
	for(std::size_t i = 0; i < samples; ++i)
	{
		Vector psi(n);
		for(Eigen::Index k = 0; k < n; ++k)
			psi[k] = cplx(normal(rng), normal(rng));
		states.push_back(psi / psi.norm());
	}

	Table table{"embedding", {"t", "sandwich_norm", "max_form_over_bound"}, {}};
	double worst = -std::numeric_limits<double>::infinity();
	double homogeneity = 0.0;
	for(const double t : t_list)
	{
		const DenseMatrix h = model.shifted_hamiltonian(t);
		const double sand = scale.sandwich_norm(h);
		double local = -std::numeric_limits<double>::infinity();
		for(const auto& psi : states)
		{
			const double form = psi.dot(h * psi).real();
			const double p2 = scale.norm_plus2(psi);
			local = std::max(local, (form - sand * p2 * p2) / (sand * p2 * p2));
		}
		const Vector psi2 = 2.0 * states.front();
		const double f1 = states.front().dot(h * states.front()).real();
		const double f2 = psi2.dot(h * psi2).real();
		const double p1 = scale.norm_plus2(states.front()), p2 = scale.norm_plus2(psi2);
		homogeneity = std::max({homogeneity, std::abs(f2 / f1 - 4.0), std::abs(p2 * p2 / (p1 * p1) - 4.0)});
		table.rows.push_back({t, sand, local});
		worst = std::max(worst, local);
	}
	v.tables.push_back(std::move(table));
	v.measured["max_relative_excess"] = worst;
	// relative excess of the form over the bound; <= 0 up to roundoff
	v.at_most("embedding_bound", worst, th, "embedding.slack", 1e-12);
	v.at_most("homogeneity", homogeneity, th, "embedding.homogeneity", 1e-12);
	return v;
}

// ---------------------------------------------------------------------------

ExperimentVerdict bounds_experiment(const ModelOperators& model, std::span<const double> t_list, int oracle_points,
                                    const Thresholds& th)
{
	ExperimentVerdict v;
	v.name = "bounds";
	Fnv1a extra;
	for(const double t : t_list)
		extra.update_value(t);
	extra.update_value(oracle_points);
	const TimeGrid dummy(1.0, 1.0, 1.0);
	v.digest = digest_inputs(model, dummy, th, extra.digest());

	const double rel = th.get("bounds.young_rel_tol", 1e-6);
	Table young{"young", {"t", "w_norm", "bound", "w_over_bound"}, {}};
	Table sandwich{"sandwich", {"t", "j", "sandwich_norm", "w_norm", "ratio"}, {}};
	Table oracle{"xspace_oracle", {"t", "relative_difference"}, {}};
	double worst_young = 0.0, worst_oracle = 0.0;
	bool relations = true;
	for(const double t : t_list)
	{
		const auto rep = young_chain_report(model.coupling(), model.basis()->grid(), t, rel);
		relations = relations && rep.young_relations_hold;
		const double used = rep.bound > 0.0 ? rep.w_norm / rep.bound : 0.0;
		young.rows.push_back({t, rep.w_norm, rep.bound, used});
		worst_young = std::max(worst_young, used);
		for(int j = 0; j <= 4; ++j)
		{
			const auto sr = sandwich_bound_report(model, t, j);
			sandwich.rows.push_back({t, static_cast<double>(j), sr.sandwich_norm, sr.w_norm, sr.ratio});
		}
		if(oracle_points > 0)
		{
			const DenseMatrix k = model.interaction(t);
			const DenseMatrix x = interaction_xspace_oracle(model, t, oracle_points).dense();
			const double scale = op_norm(k);
			const double d = scale > 0.0 ? op_norm(DenseMatrix(k - x)) / scale : op_norm(x);
			oracle.rows.push_back({t, d});
			worst_oracle = std::max(worst_oracle, d);
		}
	}
	v.tables.push_back(std::move(young));
	v.tables.push_back(std::move(sandwich));
	v.exact("young_exponent_relations", relations);
	v.measured["max_w_over_bound"] = worst_young;
	v.at_most("young_bound", worst_young, th, "bounds.young", 1.0 + rel);
	if(oracle_points > 0)
	{
		v.tables.push_back(std::move(oracle));
		v.measured["max_oracle_difference"] = worst_oracle;
		v.at_most("xspace_oracle", worst_oracle, th, "bounds.oracle", 1e-8);
	}
	return v;
}

ExperimentVerdict uniformity_sweep(double mass, double box_length, const CouplingFunction& g, double t,
                                   std::span<const Truncation> truncations, const Thresholds& th)
{
	if(truncations.size() < 2)
		throw DomainError("uniformity sweep needs at least two truncations");
	ExperimentVerdict v;
	v.name = "sweep";
	Fnv1a h;
	h.update_value(mass);
	h.update_value(box_length);
	h.update_value(t);
	hash_coupling(h, g);
	for(const auto& tr : truncations)
	{
		h.update_value(tr.mode_cutoff);
		h.update_value(tr.particle_cutoff);
	}
	for(const auto& [key, value] : th.values())
	{
		h.update(key.data(), key.size());
		h.update_value(value);
	}
	v.digest = h.digest();

	const double r = 32.0 / 15.0;
	const double g_norm = g.is_zero() ? 0.0 : g_r_norm(g, t, r);
	v.measured["g_norm"] = g_norm;
	v.measured["r"] = r;

	Table table{"sweep", {"J", "N_max", "dimension", "scale_ratio", "j0", "j1", "j2", "j3", "j4"}, {}};
	std::vector<double> ratios;
	std::array<std::vector<double>, 5> sandwich;
	for(const auto& tr : truncations)
	{
		const auto basis = enumerate_basis(ModeGrid(mass, box_length, tr.mode_cutoff), tr.particle_cutoff);
		const ModelOperators model(basis, g, 0.0);
		const ScaleNorms scale(model);
		const double num = scale.sandwich_norm(model.interaction(t));
		ratios.push_back(g_norm > 0.0 ? num / g_norm : 0.0);
		std::vector<double> row{static_cast<double>(tr.mode_cutoff), static_cast<double>(tr.particle_cutoff),
		                        static_cast<double>(basis->dimension()), ratios.back()};
		for(int j = 0; j <= 4; ++j)
		{
			sandwich[static_cast<std::size_t>(j)].push_back(sandwich_bound_report(model, t, j).ratio);
			row.push_back(sandwich[static_cast<std::size_t>(j)].back());
		}
		table.rows.push_back(std::move(row));
	}
	v.tables.push_back(std::move(table));

	auto growth = [](const std::vector<double>& x) {
		const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
		if(*hi == 0.0)
			return 1.0;  // identically zero
		return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
	};
	v.measured["scale_ratio_growth"] = growth(ratios);
	v.at_most("scale_ratio_growth", growth(ratios), th, "sweep.growth", 2.0);
	for(int j = 0; j <= 4; ++j)
	{
		const double gr = growth(sandwich[static_cast<std::size_t>(j)]);
		v.measured["sandwich_growth_j" + std::to_string(j)] = gr;
		v.at_most("sandwich_growth_j" + std::to_string(j), gr, th, "sweep.sandwich_growth", 2.0);
	}
	return v;
}

ExperimentVerdict smoothness_experiment(const ModelOperators& model, double t, std::span<const double> h_list,
                                        const Thresholds& th)
{
	ExperimentVerdict v;
	v.name = "smoothness";
	Fnv1a extra;
	extra.update_value(t);
	for(const double h : h_list)
		extra.update_value(h);
	const TimeGrid dummy(1.0, 1.0, 1.0);
	v.digest = digest_inputs(model, dummy, th, extra.digest());

	const auto rep = smoothness_report(model, t, h_list);
	Table table{"smoothness", {"h", "first_defect", "second_defect"}, {}};
	for(std::size_t i = 0; i < rep.h.size(); ++i)
		table.rows.push_back({rep.h[i], rep.first_defects[i], rep.second_defects[i]});
	v.tables.push_back(std::move(table));
	v.measured["first_slope"] = std::isfinite(rep.first_slope) ? nlohmann::json(rep.first_slope) : nlohmann::json(nullptr);
	v.measured["second_slope"] =
		std::isfinite(rep.second_slope) ? nlohmann::json(rep.second_slope) : nlohmann::json(nullptr);
	if(rep.first_vanishes)
		v.exact("first_derivative_defect_vanishes", true);
	else
		v.at_least("first_derivative_slope", rep.first_slope, th, "smoothness.slope", 0.9);
	if(rep.second_vanishes)
		v.exact("second_derivative_defect_vanishes", true);
	else
		v.at_least("second_derivative_slope", rep.second_slope, th, "smoothness.slope", 0.9);
	return v;
}

// ---------------------------------------------------------------------------

namespace
{

constexpr int gauss_points = 10;

struct Rule
{
	std::vector<double> nodes;    // on [-1, 1]
	std::vector<double> weights;
};

const Rule& gauss_rule()
{
	static const Rule rule = [] {
		using G = boost::math::quadrature::gauss<double, gauss_points>;
		Rule r;
		const auto& x = G::abscissa();
		const auto& w = G::weights();
		for(std::size_t i = 0; i < x.size(); ++i)
		{
			r.nodes.push_back(x[i]);
			r.weights.push_back(w[i]);
			if(x[i] != 0.0)
			{
				r.nodes.push_back(-x[i]);
				r.weights.push_back(w[i]);
			}
		}
		return r;
	}();
	return rule;
}

// H^D(t) from the cached term matrices
DenseMatrix dirac_interaction(const ModelOperators& model, double t)
{
	const auto n = static_cast<Eigen::Index>(model.dimension());
	DenseMatrix v = DenseMatrix::Zero(n, n);
	for(std::size_t i = 0; i < model.term_operators().size(); ++i)
	{
		const double w = model.coupling().temporal_weight(i, t);
		if(w != 0.0)
			v += w * model.term_operators()[i];
	}
	Vector phase(n);
	const RealVector& e = model.free_energies();
	for(Eigen::Index i = 0; i < n; ++i)
		phase[i] = std::exp(I * e[i] * t);
	return phase.asDiagonal() * v * phase.conjugate().asDiagonal();
}

DenseMatrix integrate(const ModelOperators& model, double a, double b)
{
	const auto& rule = gauss_rule();
	const auto n = static_cast<Eigen::Index>(model.dimension());
	DenseMatrix sum = DenseMatrix::Zero(n, n);
	const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
	for(std::size_t i = 0; i < rule.nodes.size(); ++i)
		sum += (half * rule.weights[i]) * dirac_interaction(model, mid + half * rule.nodes[i]);
	return sum;
}

} // namespace

DenseMatrix dyson_oracle(const ModelOperators& model, const TimeGrid& grid, int order, int panels)
{
	if(order != 1 && order != 2)
		throw DomainError("Dyson order must be 1 or 2");
	if(panels < 1)
		throw DomainError("Dyson quadrature needs at least one panel");
	const DenseMatrix one = identity(model);
	if(model.coupling().is_zero())
		return one;
	grid.require_support_inside(model.coupling());
	const auto [a, b] = *model.coupling().time_support();
	const double width = (b - a) / panels;
	const auto& rule = gauss_rule();
	const auto n = static_cast<Eigen::Index>(model.dimension());

	DenseMatrix first = DenseMatrix::Zero(n, n);
	DenseMatrix second = DenseMatrix::Zero(n, n);
	DenseMatrix before = DenseMatrix::Zero(n, n);  // int_a^{panel start} H^D
	for(int p = 0; p < panels; ++p)
	{
		const double lo = a + width * p;
		const double hi = (p + 1 == panels) ? b : a + width * (p + 1);
		const double half = 0.5 * (hi - lo), mid = 0.5 * (lo + hi);
		for(std::size_t i = 0; i < rule.nodes.size(); ++i)
		{
			const double t = mid + half * rule.nodes[i];
			const DenseMatrix h = dirac_interaction(model, t);
			first += (half * rule.weights[i]) * h;
			if(order == 2)
				second += (half * rule.weights[i]) * h * (before + integrate(model, lo, t));
		}
		if(order == 2)
			before += integrate(model, lo, hi);
	}
	if(order == 1)
		return one - I * first;
	return one - I * first - second;
}

ExperimentVerdict dyson_experiment(const BasisPtr& basis, const CouplingFunction& g, double c, const TimeGrid& grid,
                                   std::span<const double> lambdas, bool extrapolate, const Thresholds& th)
{
	if(lambdas.size() < 2)
		throw DomainError("Dyson experiment needs at least two couplings");
	ExperimentVerdict v;
	v.name = "dyson";
	const int panels = static_cast<int>(th.get("dyson.panels", 256));
	const auto times = estimation_times(grid);

	Fnv1a extra;
	for(const double l : lambdas)
		extra.update_value(l);
	extra.update_value(extrapolate);
	extra.update_value(c);
	v.digest = digest_inputs(ModelOperators(basis, g, 0.0), grid, th, extra.digest());
	v.measured["extrapolated_in_dt"] = extrapolate;

	Table table{"dyson", {"lambda", "error_order1", "error_order2", "error_order2_over_lambda3", "unitarity_defect"}, {}};
	std::vector<double> ls, e1, e2, c3;
	for(const double lambda : lambdas)
	{
		const auto model = ModelOperators::with_estimated_shift(basis, g.scaled(lambda), c, times);
		const auto s = s_matrix(model, grid);
		DenseMatrix sm = s.matrix;
		if(extrapolate)
			sm = (4.0 * s_matrix(model, grid.refined(2)).matrix - s.matrix) / 3.0;
		const double d1 = op_norm(DenseMatrix(sm - dyson_oracle(model, grid, 1, panels)));
		const double d2 = op_norm(DenseMatrix(sm - dyson_oracle(model, grid, 2, panels)));
		ls.push_back(std::abs(lambda));
		e1.push_back(d1);
		e2.push_back(d2);
		c3.push_back(d2 / std::pow(std::abs(lambda), 3));
		table.rows.push_back({lambda, d1, d2, c3.back(), s.unitarity_defect});
	}
	v.tables.push_back(std::move(table));

	const auto [lo, hi] = std::minmax_element(c3.begin(), c3.end());
	const double spread = *lo > 0.0 ? *hi / *lo - 1.0 : std::numeric_limits<double>::infinity();
	v.measured["cubic_constant_spread"] = spread;
	v.at_most("cubic_constant_spread", spread, th, "dyson.spread", 0.2);
	const double k1 = slope_or_nan(ls, e1), k2 = slope_or_nan(ls, e2);
	v.measured["order1_exponent"] = std::isfinite(k1) ? nlohmann::json(k1) : nlohmann::json(nullptr);
	v.measured["order2_exponent"] = std::isfinite(k2) ? nlohmann::json(k2) : nlohmann::json(nullptr);
	v.within("order1_exponent", k1, th, "dyson.order1", 2.0, "dyson.order_width", 0.2);
	v.within("order2_exponent", k2, th, "dyson.order2", 3.0, "dyson.order_width", 0.2);
	return v;
}

} // namespace phi4lab
