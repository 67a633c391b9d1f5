#include "phi4lab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "phi4lab/errors.hpp"

namespace phi4lab
{

namespace
{

const std::set<std::string> time_window_experiments = {"propagate", "smatrix", "causality", "qcheck", "dyson"};

// Threshold keys each experiment understands (without the experiment prefix).
const std::map<std::string, std::set<std::string>>& known_tolerances()
{
	static const std::map<std::string, std::set<std::string>> keys = {
		{"bounds", {"young", "young_rel_tol", "oracle"}},
		{"smoothness", {"slope"}},
		{"propagate",
		 {"unitarity", "composition", "order", "order_width", "k_slope", "k_slope_width", "k_independence",
		  "contraction", "final_error"}},
		{"smatrix", {"unitarity", "identity", "shift", "window", "stabilization"}},
		{"causality", {"defect", "order", "order_width", "shift"}},
		{"qcheck", {"residual", "hermiticity", "positivity", "lower_bound", "slack", "homogeneity"}},
		{"sweep", {"growth", "sandwich_growth"}},
		{"dyson", {"spread", "order1", "order2", "order_width", "panels"}},
	};
	return keys;
}

// Prefix under which an experiment's tolerances are looked up by the analysis functions.
std::string tolerance_prefix(const std::string& experiment, const std::string& key)
{
	static const std::set<std::string> yosida = {"k_slope", "k_slope_width", "k_independence", "contraction",
	                                             "final_error"};
	static const std::set<std::string> embedding = {"slack", "homogeneity"};
	if(experiment == "propagate" && yosida.contains(key))
		return "yosida." + key;
	if(experiment == "qcheck" && embedding.contains(key))
		return "embedding." + key;
	return experiment + "." + key;
}

class Context
{
public:
	explicit Context(std::string origin) : origin_(std::move(origin)) { }

	[[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& reason) const
	{
		std::ostringstream os;
		os << origin_;
		const auto mark = node.Mark();
		if(mark.line >= 0)
			os << ':' << mark.line + 1 << ':' << mark.column + 1;
		os << ": " << field << ": " << reason;
		throw ConfigError(os.str());
	}

private:
	std::string origin_;
};

/// Reads one mapping and remembers which keys were consumed, so the rest can be rejected.
class MapReader
{
public:
	MapReader(const Context& ctx, const YAML::Node& node, std::string path)
		: ctx_(ctx), node_(node), path_(std::move(path))
	{
		if(!node_.IsMap())
			ctx_.fail(node_, path_.empty() ? "<root>" : path_, "expected a mapping");
	}

	[[nodiscard]] bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

	[[nodiscard]] YAML::Node child(const std::string& key)
	{
		used_.insert(key);
		return node_[key];
	}

	[[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
	[[nodiscard]] const Context& context() const { return ctx_; }
	[[nodiscard]] const YAML::Node& node() const { return node_; }

	double number(const std::string& key, std::optional<double> fallback = std::nullopt)
	{
		const YAML::Node n = child(key);
		if(!n)
		{
			if(!fallback)
				ctx_.fail(node_, field(key), "required field is missing");
			return *fallback;
		}
		return as_number(n, field(key));
	}

	long integer(const std::string& key, std::optional<long> fallback = std::nullopt)
	{
		const YAML::Node n = child(key);
		if(!n)
		{
			if(!fallback)
				ctx_.fail(node_, field(key), "required field is missing");
			return *fallback;
		}
		return as_integer(n, field(key));
	}

	std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt)
	{
		const YAML::Node n = child(key);
		if(!n)
		{
			if(!fallback)
				ctx_.fail(node_, field(key), "required field is missing");
			return *fallback;
		}
		if(!n.IsScalar())
			ctx_.fail(n, field(key), "expected a string");
		return n.as<std::string>();
	}

	bool boolean(const std::string& key, bool fallback)
	{
		const YAML::Node n = child(key);
		if(!n)
			return fallback;
		try
		{
			return n.as<bool>();
		}
		catch(const YAML::Exception&)
		{
			ctx_.fail(n, field(key), "expected true or false");
		}
	}

	std::vector<double> numbers(const std::string& key)
	{
		const YAML::Node n = child(key);
		std::vector<double> r;
		if(!n)
			return r;
		if(!n.IsSequence())
			ctx_.fail(n, field(key), "expected a list of numbers");
		for(std::size_t i = 0; i < n.size(); ++i)
			r.push_back(as_number(n[i], field(key) + "[" + std::to_string(i) + "]"));
		return r;
	}

	std::vector<long> integers(const std::string& key)
	{
		const YAML::Node n = child(key);
		std::vector<long> r;
		if(!n)
			return r;
		if(!n.IsSequence())
			ctx_.fail(n, field(key), "expected a list of integers");
		for(std::size_t i = 0; i < n.size(); ++i)
			r.push_back(as_integer(n[i], field(key) + "[" + std::to_string(i) + "]"));
		return r;
	}

	void finish() const
	{
		for(auto it = node_.begin(); it != node_.end(); ++it)
		{
			const auto key = it->first.as<std::string>();
			if(!used_.contains(key))
				ctx_.fail(it->first, field(key), "unknown key");
		}
	}

	double as_number(const YAML::Node& n, const std::string& name) const
	{
		if(!n.IsScalar())
			ctx_.fail(n, name, "expected a number");
		double v = 0.0;
		try
		{
			v = n.as<double>();
		}
		catch(const YAML::Exception&)
		{
			ctx_.fail(n, name, "expected a number, got '" + n.Scalar() + "'");
		}
		if(!std::isfinite(v))
			ctx_.fail(n, name, "must be finite");
		return v;
	}

	long as_integer(const YAML::Node& n, const std::string& name) const
	{
		if(!n.IsScalar())
			ctx_.fail(n, name, "expected an integer");
		try
		{
			return n.as<long>();
		}
		catch(const YAML::Exception&)
		{
			ctx_.fail(n, name, "expected an integer, got '" + n.Scalar() + "'");
		}
	}

private:
	const Context& ctx_;
	YAML::Node node_;
	std::string path_;
	std::set<std::string> used_;
};

void require(bool ok, const MapReader& r, const std::string& key, const std::string& reason)
{
	if(!ok)
		r.context().fail(r.node()[key] ? r.node()[key] : r.node(), r.field(key), reason);
}

Profile read_profile(const Context& ctx, const YAML::Node& node, const std::string& path)
{
	MapReader r(ctx, node, path);
	const std::string kind = r.text("kind");
	const double center = r.number("center", 0.0);
	const double width = r.number("width");
	require(width > 0.0, r, "width", "must be positive");
	r.finish();
	if(kind == "bump")
		return Profile::bump(center, width);
	if(kind == "gaussian")
		return Profile::gaussian(center, width);
	ctx.fail(node["kind"], path + ".kind", "must be 'bump' or 'gaussian', got '" + kind + "'");
}

CouplingFunction read_coupling(const Context& ctx, const YAML::Node& node, const std::string& path)
{
	if(!node)
		return {};
	if(!node.IsSequence())
		ctx.fail(node, path, "expected a list of separable terms");
	std::vector<SeparableTerm> terms;
	for(std::size_t i = 0; i < node.size(); ++i)
	{
		const std::string p = path + "[" + std::to_string(i) + "]";
		MapReader r(ctx, node[i], p);
		SeparableTerm term;
		term.amplitude = r.number("amplitude");
		term.spatial = read_profile(ctx, r.child("spatial"), p + ".spatial");
		term.temporal = read_profile(ctx, r.child("temporal"), p + ".temporal");
		r.finish();
		terms.push_back(term);
	}
	return CouplingFunction(std::move(terms));
}

void check_coupling(const Context& ctx, const YAML::Node& node, const std::string& path, const CouplingFunction& g,
                    const ModelSpec& model, const TimeSpec& time, bool needs_window)
{
	for(std::size_t i = 0; i < g.terms().size(); ++i)
	{
		const auto& term = g.terms()[i];
		const std::string p = path + "[" + std::to_string(i) + "]";
		if(const auto s = term.spatial.support())
			if(s->first < -0.5 * model.box_length || s->second > 0.5 * model.box_length)
				ctx.fail(node[i], p + ".spatial", "support leaves the box [-L/2, L/2]");
		if(!needs_window)
			continue;
		const auto s = term.temporal.support();
		if(!s)
			ctx.fail(node[i], p + ".temporal", "must be a bump for experiments that use the time window");
		if(!(s->first > -time.t1) || !(s->second < time.t2))
			ctx.fail(node[i], p + ".temporal", "support must lie inside the open window (-T1, T2)");
	}
}

template<class T>
std::vector<T> positive_list(MapReader& r, const std::string& key, const std::vector<long>& raw)
{
	std::vector<T> out;
	for(const long v : raw)
	{
		require(v >= 1, r, key, "entries must be positive");
		out.push_back(static_cast<T>(v));
	}
	return out;
}

ExperimentSpec read_experiment(const Context& ctx, const std::string& name, const YAML::Node& node,
                               const ExperimentConfig& cfg)
{
	ExperimentSpec spec;
	spec.name = name;
	const std::string path = "experiments." + name;
	YAML::Node body = node;
	if(!body || body.IsNull())
		body = YAML::Node(YAML::NodeType::Map);
	MapReader r(ctx, body, path);

	if(const YAML::Node tol = r.child("tolerances"))
	{
		MapReader t(ctx, tol, path + ".tolerances");
		for(const auto& key : known_tolerances().at(name))
			if(t.has(key))
				spec.tolerances.set(tolerance_prefix(name, key), t.number(key));
		t.finish();
	}

	if(name == "bounds" || name == "qcheck")
	{
		spec.times = r.numbers("times");
		for(const double t : spec.times)
			require(name != "qcheck" || (t >= -cfg.time.t1 && t <= cfg.time.t2), r, "times",
			        "times must lie in [-T1, T2]");
	}
	if(name == "bounds")
	{
		spec.oracle_points = static_cast<int>(r.integer("oracle_points", 512));
		require(spec.oracle_points == 0 || spec.oracle_points >= 4 * cfg.model.mode_cutoff + 1, r, "oracle_points",
		        "must be 0 (off) or at least 4J+1");
	}
	if(name == "qcheck")
	{
		const long samples = r.integer("samples", 1000);
		require(samples >= 1, r, "samples", "must be positive");
		spec.samples = static_cast<std::size_t>(samples);
	}
	if(name == "smoothness" || name == "sweep")
	{
		spec.time_set = r.has("time");
		spec.time = r.number("time", 0.0);
	}
	if(name == "smoothness")
	{
		spec.steps = r.numbers("steps");
		if(spec.steps.empty())
			spec.steps = {1e-1, 1e-2, 1e-3, 1e-4};
		for(std::size_t i = 0; i < spec.steps.size(); ++i)
			require(spec.steps[i] > 0.0 && (i == 0 || spec.steps[i] < spec.steps[i - 1]), r, "steps",
			        "must be positive and strictly decreasing");
	}
	if(name == "sweep")
	{
		const YAML::Node tr = r.child("truncations");
		if(tr)
		{
			if(!tr.IsSequence())
				ctx.fail(tr, path + ".truncations", "expected a list of [J, N_max] pairs");
			for(std::size_t i = 0; i < tr.size(); ++i)
			{
				const std::string p = path + ".truncations[" + std::to_string(i) + "]";
				if(!tr[i].IsSequence() || tr[i].size() != 2)
					ctx.fail(tr[i], p, "expected [J, N_max]");
				const long j = r.as_integer(tr[i][0], p);
				const long n = r.as_integer(tr[i][1], p);
				if(j < 0 || n < 0)
					ctx.fail(tr[i], p, "cutoffs must be nonnegative");
				spec.truncations.push_back({static_cast<int>(j), static_cast<int>(n)});
			}
		}
		else
			spec.truncations = {{1, 2}, {1, 3}, {1, 4}, {2, 2}, {2, 3}, {2, 4}};
		if(spec.truncations.size() < 2)
			ctx.fail(tr ? tr : body, path + ".truncations", "needs at least two truncations");
	}
	if(name == "dyson")
	{
		spec.lambdas = r.numbers("lambdas");
		if(spec.lambdas.empty())
			spec.lambdas = {1e-2, 1e-3, 1e-4};
		require(spec.lambdas.size() >= 2, r, "lambdas", "needs at least two values");
		for(const double l : spec.lambdas)
			require(l > 0.0, r, "lambdas", "must be positive");
		spec.extrapolate = r.boolean("extrapolate", false);
	}
	if(name == "causality")
	{
		const YAML::Node later = r.child("later");
		const YAML::Node earlier = r.child("earlier");
		if(!later || !earlier)
			ctx.fail(body, path, "needs both 'later' and 'earlier' coupling lists");
		spec.later = read_coupling(ctx, later, path + ".later");
		spec.earlier = read_coupling(ctx, earlier, path + ".earlier");
		check_coupling(ctx, later, path + ".later", spec.later, cfg.model, cfg.time, true);
		check_coupling(ctx, earlier, path + ".earlier", spec.earlier, cfg.model, cfg.time, true);
		const auto s1 = spec.later.time_support();
		const auto s2 = spec.earlier.time_support();
		if(!spec.later.is_zero() && !spec.earlier.is_zero() && !(s2->second < s1->first))
			ctx.fail(body, path, "time support of 'earlier' must end before 'later' begins");
	}
	r.finish();
	return spec;
}

} // namespace

const std::vector<std::string>& experiment_names()
{
	static const std::vector<std::string> names = {"bounds", "smoothness", "propagate", "smatrix",
	                                               "causality", "qcheck", "sweep", "dyson"};
	return names;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin)
{
	const Context ctx(origin);
	YAML::Node root;
	try
	{
		root = YAML::Load(text);
	}
	catch(const YAML::ParserException& e)
	{
		std::ostringstream os;
		os << origin << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
		throw ConfigError(os.str());
	}
	if(!root || root.IsNull())
		throw ConfigError(origin + ": empty config");

	ExperimentConfig cfg;
	Fnv1a h;
	h.update(text.data(), text.size());
	cfg.digest = h.digest();

	MapReader top(ctx, root, "");
	{
		MapReader r(ctx, top.child("model"), "model");
		auto& m = cfg.model;
		m.mass = r.number("mass");
		require(m.mass > 0.0, r, "mass", "must be positive");
		m.box_length = r.number("box_length");
		require(m.box_length > 0.0, r, "box_length", "must be positive");
		const long j = r.integer("mode_cutoff");
		require(j >= 0, r, "mode_cutoff", "must be nonnegative");
		const long n = r.integer("particle_cutoff");
		require(n >= 0, r, "particle_cutoff", "must be nonnegative");
		m.mode_cutoff = static_cast<int>(j);
		m.particle_cutoff = static_cast<int>(n);
		m.shift_c = r.number("shift_c", 0.5);
		require(m.shift_c > 0.0, r, "shift_c", "must be positive");
		const long maxdim = r.integer("max_dimension", 20000);
		require(maxdim >= 1, r, "max_dimension", "must be positive");
		m.max_dimension = static_cast<std::size_t>(maxdim);
		r.finish();
	}
	if(top.has("time"))
	{
		MapReader r(ctx, top.child("time"), "time");
		auto& t = cfg.time;
		t.t1 = r.number("T1");
		t.t2 = r.number("T2");
		require(-t.t1 < t.t2, r, "T2", "window needs -T1 < T2");
		t.dt = r.number("dt");
		require(t.dt > 0.0 && t.dt <= t.t1 + t.t2, r, "dt", "must be positive and at most T1 + T2");
		t.refinement_levels = static_cast<int>(r.integer("refinement_levels", 3));
		require(t.refinement_levels >= 2, r, "refinement_levels", "needs at least two levels for an order fit");
		r.finish();
	}
	if(top.has("schemes"))
	{
		MapReader r(ctx, top.child("schemes"), "schemes");
		auto& s = cfg.schemes;
		s.yosida_n = positive_list<int>(r, "yosida_n", r.integers("yosida_n"));
		s.k_list = positive_list<long>(r, "K", r.integers("K"));
		s.n_sweep = positive_list<int>(r, "n_sweep", r.integers("n_sweep"));
		for(std::size_t i = 1; i < s.k_list.size(); ++i)
			require(s.k_list[i] > s.k_list[i - 1], r, "K", "must be strictly increasing");
		require(s.yosida_n.empty() || !s.k_list.empty(), r, "K", "is required when yosida_n is given");
		require(s.n_sweep.empty() || !s.k_list.empty(), r, "K", "is required when n_sweep is given");
		r.finish();
	}

	const YAML::Node coupling = top.child("coupling");
	cfg.coupling = read_coupling(ctx, coupling, "coupling");

	const YAML::Node exps = top.child("experiments");
	if(!exps)
		ctx.fail(root, "experiments", "required field is missing");
	std::vector<std::pair<std::string, YAML::Node>> requested;
	if(exps.IsSequence())
	{
		for(std::size_t i = 0; i < exps.size(); ++i)
			requested.emplace_back(exps[i].as<std::string>(), YAML::Node());
	}
	else if(exps.IsMap())
	{
		for(auto it = exps.begin(); it != exps.end(); ++it)
			requested.emplace_back(it->first.as<std::string>(), it->second);
	}
	else
		ctx.fail(exps, "experiments", "expected a list of names or a mapping name -> options");

	bool needs_window = false;
	for(const auto& [name, node] : requested)
	{
		const auto& known = experiment_names();
		if(std::find(known.begin(), known.end(), name) == known.end())
			ctx.fail(exps, "experiments." + name, "unknown experiment");
		needs_window = needs_window || time_window_experiments.contains(name);
	}
	if(needs_window && !top.has("time"))
		ctx.fail(root, "time", "required by the requested experiments");
	check_coupling(ctx, coupling, "coupling", cfg.coupling, cfg.model, cfg.time, needs_window);
	for(const auto& [name, node] : requested)
		cfg.experiments.push_back(read_experiment(ctx, name, node, cfg));

	if(top.has("output"))
	{
		MapReader r(ctx, top.child("output"), "output");
		cfg.output_dir = r.text("directory", "reports");
		r.finish();
	}
	if(top.has("seed"))
	{
		const long seed = top.integer("seed");
		require(seed >= 0, top, "seed", "must be nonnegative");
		cfg.seed = static_cast<std::uint64_t>(seed);
	}
	top.finish();
	return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if(!in)
		throw ConfigError(path.string() + ": cannot read config");
	std::ostringstream os;
	os << in.rdbuf();
	auto cfg = parse_config(os.str(), path.string());
	cfg.source = path;
	// relative output directories are taken relative to the config file
	if(cfg.output_dir.is_relative())
		cfg.output_dir = path.parent_path() / cfg.output_dir;
	return cfg;
}

} // namespace phi4lab
