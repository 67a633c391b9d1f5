#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phi4lab/config.hpp"
#include "phi4lab/errors.hpp"
#include "phi4lab/matrix_io.hpp"
#include "phi4lab/runner.hpp"

using namespace phi4lab;
namespace fs = std::filesystem;

namespace
{

const std::string model_block =
	"model: {mass: 0.2, box_length: 31.41592653589793, mode_cutoff: 1, particle_cutoff: 2, shift_c: 0.2}\n";

const std::string bump_coupling = "coupling:\n"
								  "  - amplitude: 1.0\n"
								  "    spatial: {kind: bump, center: 0.0, width: 7.85}\n"
								  "    temporal: {kind: bump, center: 0.0, width: 0.8}\n";

std::string diagnostic(const std::string& text)
{
	try
	{
		parse_config(text, "cfg.yaml");
	}
	catch(const ConfigError& e)
	{
		EXPECT_EQ(e.exit_code(), 2);
		return e.what();
	}
	ADD_FAILURE() << "config was accepted:\n" << text;
	return {};
}

fs::path scratch(const std::string& name)
{
	const fs::path p = fs::path(PHI4LAB_SCRATCH_DIR) / name;
	fs::remove_all(p);
	fs::create_directories(p);
	return p;
}

std::string slurp(const fs::path& p)
{
	std::ifstream in(p, std::ios::binary);
	std::ostringstream os;
	os << in.rdbuf();
	return os.str();
}

} // namespace

TEST(Config, ParsesFullExample)
{
	const auto cfg = load_config(fs::path(PHI4LAB_CONFIG_DIR) / "corpus_bump.yaml");
	EXPECT_DOUBLE_EQ(cfg.model.mass, 0.2);
	EXPECT_EQ(cfg.model.mode_cutoff, 2);
	EXPECT_EQ(cfg.coupling.terms().size(), 1u);
	EXPECT_EQ(cfg.experiments.size(), 5u);
	EXPECT_EQ(cfg.seed, 7u);
	EXPECT_NE(cfg.digest, 0u);
	for(const auto& e : cfg.experiments)
		if(e.name == "bounds")
		{
			EXPECT_EQ(e.oracle_points, 512);
			EXPECT_EQ(e.times.size(), 3u);
		}
}

TEST(Config, EveryShippedConfigParses)
{
	for(const auto& entry : fs::directory_iterator(PHI4LAB_CONFIG_DIR))
	{
		if(entry.path().extension() != ".yaml" || entry.path().stem() == "bad_mass")
			continue;
		EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
	}
}

TEST(Config, TolerancesAreNamespaced)
{
	const auto cfg = parse_config(model_block + bump_coupling
	                              + "time: {T1: 1, T2: 1, dt: 0.01}\n"
	                                "schemes: {yosida_n: [4], K: [8, 16]}\n"
	                                "experiments:\n"
	                                "  propagate: {tolerances: {unitarity: 1.0e-9, k_slope_width: 0.2}}\n");
	const auto& th = cfg.experiments.at(0).tolerances;
	EXPECT_DOUBLE_EQ(th.get("propagate.unitarity", 0.0), 1e-9);
	EXPECT_DOUBLE_EQ(th.get("yosida.k_slope_width", 0.0), 0.2);
}

TEST(Config, NegativeMassNamesTheField)
{
	const auto msg = diagnostic("model: {mass: -1, box_length: 1, mode_cutoff: 1, particle_cutoff: 2}\n"
	                            "experiments: [sweep]\n");
	EXPECT_NE(msg.find("cfg.yaml:1:"), std::string::npos) << msg;
	EXPECT_NE(msg.find("model.mass"), std::string::npos) << msg;
}

TEST(Config, RejectsBadInput)
{
	EXPECT_NE(diagnostic(model_block + "experiments: [sweep]\nbogus: 1\n").find("bogus: unknown key"), std::string::npos);
	EXPECT_NE(diagnostic(model_block + "experiments: [teleport]\n").find("unknown experiment"), std::string::npos);
	EXPECT_NE(diagnostic(model_block + bump_coupling + "experiments: [smatrix]\n").find("time"), std::string::npos);
	// temporal support [-0.8, 0.8] is not inside (-0.5, 1)
	EXPECT_NE(diagnostic(model_block + bump_coupling + "time: {T1: 0.5, T2: 1, dt: 0.01}\nexperiments: [smatrix]\n")
	              .find("support must lie inside"),
	          std::string::npos);
	// spatial support wider than the box
	EXPECT_NE(diagnostic("model: {mass: 1, box_length: 4, mode_cutoff: 1, particle_cutoff: 2}\n" + bump_coupling
	                     + "experiments: [sweep]\n")
	              .find("leaves the box"),
	          std::string::npos);
	EXPECT_NE(diagnostic(model_block + "time: {T1: 1, T2: -2, dt: 0.01}\nexperiments: [sweep]\n").find("time.T2"),
	          std::string::npos);
	EXPECT_NE(diagnostic(model_block + "experiments: {sweep: {tolerances: {nope: 1}}}\n").find("nope"),
	          std::string::npos);
	EXPECT_NE(diagnostic(model_block + "experiments: [sweep\n").find("cfg.yaml:"), std::string::npos);
	EXPECT_NE(diagnostic(model_block + "coupling:\n  - {amplitude: x, spatial: {kind: bump, width: 1}, "
	                                   "temporal: {kind: bump, width: 1}}\nexperiments: [sweep]\n")
	              .find("coupling[0].amplitude"),
	          std::string::npos);
	EXPECT_THROW(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST(MatrixIo, RoundTripIsBitExact)
{
	DenseMatrix m(3, 3);
	m << cplx(1.0 / 3.0, -0.0), cplx(1e-300, 2.5e300), cplx(0.1, 0.2), cplx(-7.0, 0.0), cplx(std::nextafter(1.0, 2.0), 0.0),
		cplx(3.14159, -2.0 / 7.0), cplx(0, 0), cplx(1, 1), cplx(-1e-17, 4.9e-324);
	const auto text = format_matrix(m, 0xdeadbeefcafef00dULL, false);
	const auto back = parse_matrix(text);
	EXPECT_EQ(back.dimension, 3u);
	EXPECT_EQ(back.basis_hash, 0xdeadbeefcafef00dULL);
	EXPECT_FALSE(back.hermitian);
	for(Eigen::Index i = 0; i < 3; ++i)
		for(Eigen::Index j = 0; j < 3; ++j)
		{
			EXPECT_EQ(std::bit_cast<std::uint64_t>(back.matrix(i, j).real()),
			          std::bit_cast<std::uint64_t>(m(i, j).real()));
			EXPECT_EQ(std::bit_cast<std::uint64_t>(back.matrix(i, j).imag()),
			          std::bit_cast<std::uint64_t>(m(i, j).imag()));
		}
	EXPECT_THROW(parse_matrix("# nope\n"), DomainError);
	EXPECT_THROW(parse_matrix(text + "1 2\n"), DomainError);
}

TEST(Dump, OperatorsRoundTripAndFreeEnergies)
{
	const auto cfg = load_config(fs::path(PHI4LAB_CONFIG_DIR) / "corpus_mixed.yaml");
	const auto out = scratch("dump");
	dump_operators(cfg, out, 0.4);
	const auto model = build_model(cfg);
	const auto h0 = read_matrix(out / "H0.txt");
	const auto v = read_matrix(out / "V.txt");
	const auto ht = read_matrix(out / "Htilde.txt");
	EXPECT_EQ(h0.dimension, 56u);
	EXPECT_EQ(h0.basis_hash, model.basis()->hash());
	EXPECT_TRUE(h0.hermitian);
	EXPECT_TRUE(v.matrix == model.interaction(0.4));
	EXPECT_TRUE(ht.matrix == model.shifted_hamiltonian(0.4));
	EXPECT_TRUE(read_matrix(out / "N.txt").matrix == model.number_operator().dense());

	// recompute the H0 diagonal from the basis listing: sum_j n_j sqrt(k_j^2 + m^2)
	std::istringstream basis(slurp(out / "basis.txt"));
	std::string line;
	std::getline(basis, line);
	const double m = cfg.model.mass, dk = 2 * M_PI / cfg.model.box_length;
	const int cut = cfg.model.mode_cutoff;
	std::size_t row = 0;
	while(std::getline(basis, line))
	{
		std::istringstream ls(line);
		std::size_t index = 0;
		int total = 0;
		ls >> index >> total;
		double e = 0.0;
		for(int j = -cut; j <= cut; ++j)
		{
			int n = 0;
			ls >> n;
			e += n * std::sqrt(j * dk * j * dk + m * m);
		}
		const auto i = static_cast<Eigen::Index>(row++);
		EXPECT_NEAR(h0.matrix(i, i).real(), e, 1e-14);
	}
	EXPECT_EQ(row, 56u);

	// W file has (2J+1)^4 lines after the header
	std::istringstream w(slurp(out / "W.txt"));
	std::size_t lines = 0;
	while(std::getline(w, line))
		++lines;
	EXPECT_EQ(lines, 1u + 625u);
}

TEST(Dump, ZeroCouplingGivesZeroInteraction)
{
	const auto cfg = load_config(fs::path(PHI4LAB_CONFIG_DIR) / "zero_coupling.yaml");
	const auto out = scratch("dump_zero");
	dump_operators(cfg, out, 0.0);
	const auto v = read_matrix(out / "V.txt");
	EXPECT_EQ(v.dimension, 10u);
	EXPECT_TRUE(v.matrix.isZero(0.0));
}

TEST(Run, ZeroCouplingSMatrixIsIdentity)
{
	auto cfg = load_config(fs::path(PHI4LAB_CONFIG_DIR) / "zero_coupling.yaml");
	RunOptions opt;
	opt.out = scratch("run_zero");
	const auto res = run(cfg, opt);
	EXPECT_EQ(res.exit_code, 0);
	ASSERT_TRUE(fs::exists(*opt.out / "smatrix.json"));
	ASSERT_TRUE(fs::exists(*opt.out / "manifest.json"));
	const auto report = nlohmann::json::parse(slurp(*opt.out / "smatrix.json"));
	bool found = false;
	for(const auto& c : report["checks"])
		if(c["name"] == "identity_for_zero_coupling")
		{
			found = true;
			EXPECT_TRUE(c["pass"].get<bool>());
		}
	EXPECT_TRUE(found);
}

TEST(Run, ReportsAreDeterministicAcrossThreadCounts)
{
	const auto cfg = parse_config(model_block + bump_coupling
	                              + "time: {T1: 1, T2: 1, dt: 0.02}\n"
	                                "experiments:\n"
	                                "  smatrix: {}\n"
	                                "  qcheck: {times: [-1, 0, 0.5], samples: 50}\n"
	                                "  smoothness: {time: 0.1}\n");
	RunOptions a, b;
	a.out = scratch("det_a");
	b.out = scratch("det_b");
	b.threads = 3;
	EXPECT_EQ(run(cfg, a).exit_code, 0);
	EXPECT_EQ(run(cfg, b).exit_code, 0);
	for(const auto& entry : fs::directory_iterator(*a.out))
	{
		if(entry.path().filename() == "manifest.json")
			continue;
		EXPECT_EQ(slurp(entry.path()), slurp(*b.out / entry.path().filename())) << entry.path();
	}
}

TEST(Run, SeedOverrideChangesOnlySeededExperiments)
{
	const auto cfg = parse_config(model_block + bump_coupling
	                              + "time: {T1: 1, T2: 1, dt: 0.02}\nexperiments: {qcheck: {times: [0], samples: 20}}\n");
	RunOptions a, b;
	a.out = scratch("seed_a");
	b.out = scratch("seed_b");
	b.seed = 99;
	run(cfg, a);
	run(cfg, b);
	const auto ra = nlohmann::json::parse(slurp(*a.out / "qcheck.json"));
	const auto rb = nlohmann::json::parse(slurp(*b.out / "qcheck.json"));
	EXPECT_EQ(rb["seed"], 99);
	EXPECT_NE(ra["digest"], rb["digest"]);
}

TEST(Run, FailingVerdictGivesExitOneAndErrorsWriteNoReport)
{
	auto cfg = parse_config(model_block + bump_coupling
	                        + "time: {T1: 1, T2: 1, dt: 0.02}\n"
	                          "experiments: {smatrix: {tolerances: {unitarity: -1}}}\n");
	RunOptions opt;
	opt.out = scratch("fail");
	EXPECT_EQ(run(cfg, opt).exit_code, 1);
	EXPECT_TRUE(fs::exists(*opt.out / "smatrix.json"));

	// a basis larger than max_dimension is a resource error
	auto big = parse_config("model: {mass: 0.2, box_length: 31.4, mode_cutoff: 3, particle_cutoff: 4, "
	                        "max_dimension: 100}\n"
	                        + bump_coupling + "time: {T1: 1, T2: 1, dt: 0.02}\nexperiments: [smatrix]\n");
	opt.out = scratch("resource");
	const auto res = run(big, opt);
	EXPECT_EQ(res.exit_code, 3);
	EXPECT_FALSE(fs::exists(*opt.out / "smatrix.json"));
	EXPECT_TRUE(fs::exists(*opt.out / "manifest.json"));
}

TEST(Run, CatalogListsEveryExperiment)
{
	const auto cat = experiment_catalog();
	ASSERT_EQ(cat.size(), experiment_names().size());
	for(std::size_t i = 0; i < cat.size(); ++i)
		EXPECT_EQ(cat[i].first, experiment_names()[i]);
}
