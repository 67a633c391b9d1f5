#include <gtest/gtest.h>

#include <cmath>

#include "corpus.hpp"
#include "phi4lab/analysis.hpp"
#include "phi4lab/errors.hpp"

using namespace phi4lab;

namespace
{

bool check_passed(const ExperimentVerdict& v, const std::string& name)
{
	for(const auto& c : v.checks)
		if(c.name == name)
			return c.pass;
	ADD_FAILURE() << "no check " << name;
	return false;
}

} // namespace

TEST(Verdict, ThresholdsCarryProvenance)
{
	Thresholds th;
	th.set("x.tol", 0.5);
	ExperimentVerdict v;
	v.below("a", 0.4, th, "x.tol", 1.0);
	v.below("b", 0.4, th, "x.other", 0.1);
	v.within("c", 2.1, th, "x.c", 2.0, "x.w", 0.2);
	EXPECT_EQ(v.checks[0].provenance, "config");
	EXPECT_EQ(v.checks[1].provenance, "default");
	EXPECT_TRUE(v.checks[0].pass);
	EXPECT_FALSE(v.checks[1].pass);
	EXPECT_TRUE(v.checks[2].pass);
	EXPECT_FALSE(v.passed());
	const auto j = v.to_json();
	EXPECT_EQ(j["checks"].size(), 3u);
	EXPECT_EQ(j["checks"][2]["upper"], 2.2);
}

TEST(QOperator, IdentityAtStartAndForZeroCoupling)
{
	const auto b = corpus::basis(1, 2);
	const TimeGrid g(1.0, 1.0, 1e-2);
	const auto n = static_cast<Eigen::Index>(b->dimension());
	const auto m = corpus::model(b, corpus::couplings()[0].g);
	EXPECT_TRUE(q_operator(m, g, -1.0).dense() == DenseMatrix::Identity(n, n));
	const ModelOperators zero(b, CouplingFunction(), 0.5);
	EXPECT_LT((q_operator(zero, g, 0.3).dense() - DenseMatrix::Identity(n, n)).norm(), 1e-14);
}

TEST(QOperator, PositivityOnCorpusModel)
{
	const auto b = corpus::basis(2, 3);
	const TimeGrid g(1.0, 1.0, 1e-2);
	for(const auto& c : corpus::couplings())
	{
		const auto m = corpus::model(b, c.g);
		const auto v = q_positivity(m, g, c.interior_times, Thresholds());
		EXPECT_TRUE(v.passed()) << c.name << " " << v.to_json().dump();
	}
}

TEST(Embedding, RandomStatesRespectTheBound)
{
	const auto b = corpus::basis(2, 2);
	const auto m = corpus::model(b, corpus::couplings()[2].g);
	const std::vector<double> times{-0.4, 0.4};
	const auto v = embedding_experiment(m, times, 1000, 11, Thresholds());
	EXPECT_TRUE(v.passed()) << v.to_json().dump();
	// same seed, same numbers
	const auto w = embedding_experiment(m, times, 1000, 11, Thresholds());
	EXPECT_EQ(v.to_json().dump(), w.to_json().dump());
	EXPECT_THROW(embedding_experiment(m, times, 0, 11, Thresholds()), DomainError);
}

TEST(Dyson, OracleStructure)
{
	const auto b = corpus::basis(1, 2);
	const TimeGrid g(1.0, 1.0, 1e-2);
	const auto n = static_cast<Eigen::Index>(b->dimension());
	const ModelOperators zero(b, CouplingFunction({{0.0, Profile::bump(0, 1), Profile::bump(0, 0.5)}}), 0.5);
	EXPECT_LT((dyson_oracle(zero, g, 2) - DenseMatrix::Identity(n, n)).norm(), 1e-15);
	const auto m = corpus::model(b, corpus::couplings()[0].g);
	const DenseMatrix first = dyson_oracle(m, g, 1) - DenseMatrix::Identity(n, n);
	// -i times an integral of hermitian matrices
	EXPECT_LT((first + first.adjoint()).norm(), 1e-13 * first.norm());
	EXPECT_THROW(dyson_oracle(m, g, 3), DomainError);
}

TEST(Dyson, SecondOrderErrorScalesAsLambdaCubed)
{
	const auto b = corpus::basis(1, 2);
	const TimeGrid g(1.0, 1.0, 1e-3);
	const auto c = corpus::couplings()[0];
	const std::vector<double> lambdas{1e-2, 1e-3, 1e-4};
	const auto v = dyson_experiment(b, c.g.scaled(20.0), corpus::shift_c, g, lambdas, false, Thresholds());
	EXPECT_TRUE(v.passed()) << v.to_json().dump();
}

TEST(Causality, TrivialCases)
{
	const auto b = corpus::basis(1, 2);
	const TimeGrid g(1.0, 1.0, 1e-2);
	const std::vector<long> ref{1, 2};
	const CouplingFunction late({{1.0, Profile::bump(0, corpus::box / 4), Profile::bump(0.65, 0.25)}});
	const auto v = causality_experiment(b, late, CouplingFunction(), corpus::shift_c, g, ref, Thresholds());
	EXPECT_EQ(v.measured["defect"].get<double>(), 0.0);
	const auto z =
		causality_experiment(b, CouplingFunction(), CouplingFunction(), corpus::shift_c, g, ref, Thresholds());
	EXPECT_EQ(z.measured["defect"].get<double>(), 0.0);
}

TEST(Causality, FactorizesForTimeOrderedSupports)
{
	const auto b = corpus::basis(1, 2);
	const TimeGrid g(1.0, 1.0, 1e-3);
	const std::vector<long> ref{1, 2};
	const CouplingFunction late({{1.0, Profile::bump(0, corpus::box / 4), Profile::bump(0.65, 0.25)}});
	const CouplingFunction early({{1.0, Profile::gaussian(corpus::box / 10, corpus::box / 14), Profile::bump(-0.65, 0.25)}});
	const auto v = causality_experiment(b, late, early, corpus::shift_c, g, ref, Thresholds());
	EXPECT_LT(v.measured["defect"].get<double>(), 1e-6);
	EXPECT_TRUE(check_passed(v, "shift_invariance"));
	// swapping the order breaks the precondition
	EXPECT_THROW(causality_experiment(b, early, late, corpus::shift_c, g, ref, Thresholds()), SupportOverlapError);
}

TEST(Sweep, ZeroCouplingAndHomogeneity)
{
	const std::vector<Truncation> tr{{1, 2}, {1, 3}};
	const auto zero = uniformity_sweep(corpus::mass, corpus::box, CouplingFunction(), 0.0, tr, Thresholds());
	for(const auto& row : zero.tables[0].rows)
		EXPECT_EQ(row[3], 0.0);
	const auto g = corpus::couplings()[1].g;
	const auto a = uniformity_sweep(corpus::mass, corpus::box, g, 0.2, tr, Thresholds());
	const auto b = uniformity_sweep(corpus::mass, corpus::box, g.scaled(2.0), 0.2, tr, Thresholds());
	for(std::size_t i = 0; i < tr.size(); ++i)
		for(std::size_t k = 3; k < a.tables[0].rows[i].size(); ++k)
			EXPECT_NEAR(a.tables[0].rows[i][k], b.tables[0].rows[i][k], 1e-9 * a.tables[0].rows[i][k]);
	EXPECT_THROW(uniformity_sweep(corpus::mass, corpus::box, g, 0.2, std::span(tr).first(1), Thresholds()),
	             DomainError);
}

TEST(Bounds, YoungAndOracleOnSmallModel)
{
	const auto b = corpus::basis(1, 2);
	const auto m = corpus::model(b, corpus::couplings()[1].g);
	const std::vector<double> times{0.2};
	const auto v = bounds_experiment(m, times, 256, Thresholds());
	EXPECT_TRUE(v.passed()) << v.to_json().dump();
}

TEST(Digest, DependsOnInputs)
{
	const auto b = corpus::basis(1, 2);
	const TimeGrid g(1.0, 1.0, 1e-2);
	const auto m = corpus::model(b, corpus::couplings()[0].g);
	Thresholds th;
	const auto d0 = digest_inputs(m, g, th);
	th.set("smatrix.unitarity", 1e-9);
	EXPECT_NE(d0, digest_inputs(m, g, th));
	EXPECT_NE(d0, digest_inputs(m.with_shift(m.shift() + 1), g, Thresholds()));
	EXPECT_EQ(d0, digest_inputs(m, g, Thresholds()));
}
