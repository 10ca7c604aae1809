#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "luq/invariants.hpp"
#include "luq/statefile.hpp"
#include "luq/statekit.hpp"

namespace {

namespace fs = std::filesystem;

std::string g_cli;

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::path(::testing::TempDir()) /
               ("luq_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    RunResult run(const std::string& args) const {
        const fs::path out_f = dir_ / "stdout.capture";
        const fs::path err_f = dir_ / "stderr.capture";
        const std::string cmd =
            "\"" + g_cli + "\" " + args + " >" + out_f.string() + " 2>" + err_f.string();
        const int raw = std::system(cmd.c_str());
        RunResult r;
        r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        r.out = slurp(out_f);
        r.err = slurp(err_f);
        return r;
    }

    fs::path dir_;
};

TEST_F(CliTest, MaximallyMixedFingerprintIsAllZero) {
    luq::save_json(path("mixed.json"),
                   luq::density_json(luq::DensityMatrix::make(luq::CMatX::Identity(4, 4) / 4.0)));
    const auto r = run("fingerprint " + path("mixed.json"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("dims 0 0"), std::string::npos);
    EXPECT_NE(r.out.find("det_t12 0"), std::string::npos);
    EXPECT_NE(r.out.find("tr_alpha 0 0"), std::string::npos);
}

TEST_F(CliTest, BellFingerprintHasNegativeUnitDeterminant) {
    ASSERT_EQ(run("gen --kind bell --qubits 2 --out " + path("bell.json")).code, 0);
    const auto r = run("fingerprint " + path("bell.json") + " --json");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("kind"), "fingerprint2");
    EXPECT_DOUBLE_EQ(j.at("det_t12").get<double>(), -1.0);
    EXPECT_DOUBLE_EQ(j.at("tr_alpha")[0].get<double>(), 3.0);
}

TEST_F(CliTest, JsonReportReparsesToEqualValues) {
    luq::save_json(path("s.json"), luq::density_json(luq::random_density(4, luq::RngSeed{40})));
    const auto r1 = run("fingerprint " + path("s.json") + " --json");
    const auto r2 = run("fingerprint " + path("s.json") + " --json");
    ASSERT_EQ(r1.code, 0);
    EXPECT_EQ(r1.out, r2.out);
    const auto j = nlohmann::json::parse(r1.out);
    const auto f = luq::fingerprint2(luq::to_bloch2(luq::random_density(4, luq::RngSeed{40})));
    EXPECT_EQ(j.at("det_t12").get<double>(), f.det_t12);
    EXPECT_EQ(j.at("L").at("mu1.mu1").get<double>(), f.L[0]);
    EXPECT_EQ(j.at("inv_I").get<double>(), f.inv_I);
}

TEST_F(CliTest, MalformedFileExitsTwo) {
    std::ofstream(path("bad.json")) << "{this is not json";
    const auto r = run("fingerprint " + path("bad.json"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST_F(CliTest, NonDensityInputExitsThree) {
    nlohmann::json j{{"kind", "density"}, {"dim", 4}};
    std::vector<std::vector<double>> re(4, std::vector<double>(4, 0.0));
    std::vector<std::vector<double>> im(4, std::vector<double>(4, 0.0));
    re[0][0] = 0.5;
    re[1][1] = 0.6;
    j["re"] = re;
    j["im"] = im;
    luq::save_json(path("heavy.json"), j);
    EXPECT_EQ(run("fingerprint " + path("heavy.json")).code, 3);
}

TEST_F(CliTest, SameFileTwiceIsEquivalent) {
    luq::save_json(path("s.json"), luq::density_json(luq::random_density(4, luq::RngSeed{41})));
    const auto r = run("equiv " + path("s.json") + " " + path("s.json"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("Equivalent"), std::string::npos);
}

TEST_F(CliTest, CounterexamplePairExitsOneNamingOddTriple) {
    ASSERT_EQ(run("gen --kind counterexample --seed 6 --out " + path("cx.json")).code, 0);
    const auto r = run("equiv " + path("cx_a.json") + " " + path("cx_b.json"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("NotEquivalent"), std::string::npos);
    EXPECT_NE(r.out.find("triple_mu"), std::string::npos);
}

TEST_F(CliTest, GhzPairInDistinctFramesIsInconclusive) {
    ASSERT_EQ(run("gen --kind ghz --seed 0 --out " + path("g0.json")).code, 0);
    ASSERT_EQ(run("gen --kind ghz --seed 5 --out " + path("g5.json")).code, 0);
    const auto r = run("equiv " + path("g0.json") + " " + path("g5.json"));
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.out.find("Inconclusive"), std::string::npos);
}

TEST_F(CliTest, KindMismatchExitsTwo) {
    ASSERT_EQ(run("gen --kind bell --qubits 2 --out " + path("bell.json")).code, 0);
    ASSERT_EQ(run("gen --kind counterexample --seed 1 --out " + path("cx.json")).code, 0);
    EXPECT_EQ(run("equiv " + path("bell.json") + " " + path("cx_a.json")).code, 2);
}

TEST_F(CliTest, OrbitWitnessMapsFirstStateToSecond) {
    ASSERT_EQ(run("gen --kind orbit --qubits 2 --seed 7 --out " + path("o.json")).code, 0);
    const auto r = run("equiv " + path("o_a.json") + " " + path("o_b.json") + " --witness");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("rotation O1"), std::string::npos);
    EXPECT_NE(r.out.find("unitary U2"), std::string::npos);
    EXPECT_NE(r.out.find("residual"), std::string::npos);

    std::ifstream win(path("o_witness.json"));
    nlohmann::json wj;
    win >> wj;
    ASSERT_EQ(wj.at("unitaries").size(), 2u);
    std::vector<luq::CMat2> us;
    for (const auto& uj : wj.at("unitaries")) {
        luq::CMat2 u;
        for (int a = 0; a < 2; ++a) {
            for (int c = 0; c < 2; ++c) {
                u(a, c) = {uj.at("re")[a][c].get<double>(), uj.at("im")[a][c].get<double>()};
            }
        }
        us.push_back(u);
    }
    const auto sa = luq::load_state(path("o_a.json"));
    const auto sb = luq::load_state(path("o_b.json"));
    EXPECT_LT((sb.density->mat - luq::apply_local(*sa.density, us).mat).norm(), 1e-12);
}

TEST_F(CliTest, GenWithSameSeedIsDeterministic) {
    ASSERT_EQ(run("gen --kind orbit --qubits 3 --seed 7 --out " + path("p.json")).code, 0);
    ASSERT_EQ(run("gen --kind orbit --qubits 3 --seed 7 --out " + path("q.json")).code, 0);
    EXPECT_EQ(slurp(path("p_a.json")), slurp(path("q_a.json")));
    EXPECT_EQ(slurp(path("p_b.json")), slurp(path("q_b.json")));
    EXPECT_EQ(slurp(path("p_witness.json")), slurp(path("q_witness.json")));
}

TEST_F(CliTest, ClassifyGroupsOneOrbitIntoOneClass) {
    fs::create_directories(dir_ / "corpus");
    for (int k = 1; k <= 4; ++k) {
        ASSERT_EQ(run("gen --kind bell --qubits 2 --seed " + std::to_string(k) + " --out " +
                      path("corpus/bell" + std::to_string(k) + ".json"))
                      .code,
                  0);
    }
    const auto r = run("classify " + path("corpus"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("classes 1"), std::string::npos);
    EXPECT_NE(r.out.find("class 1: bell1.json bell2.json bell3.json bell4.json"),
              std::string::npos);
}

TEST_F(CliTest, ClassifySeparatesSpectrallyDistinctState) {
    fs::create_directories(dir_ / "corpus");
    ASSERT_EQ(run("gen --kind orbit --qubits 2 --seed 11 --out " + path("corpus/o.json")).code, 0);
    ASSERT_EQ(run("gen --kind random --qubits 2 --seed 99 --out " + path("corpus/r.json")).code,
              0);
    const auto r = run("classify " + path("corpus"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("classes 2"), std::string::npos);
    EXPECT_NE(r.out.find("class 1: o_a.json o_b.json"), std::string::npos);
    EXPECT_NE(r.out.find("class 2: r.json"), std::string::npos);
}

TEST_F(CliTest, ClassifyEmptyDirectoryReportsNoClasses) {
    fs::create_directories(dir_ / "corpus");
    const auto r = run("classify " + path("corpus"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("classes 0"), std::string::npos);
}

TEST_F(CliTest, BlochRoundTripThroughFiles) {
    const auto rho = luq::random_density(8, luq::RngSeed{42});
    luq::save_json(path("b3.json"), luq::bloch3_json(luq::to_bloch3(rho)));
    const auto s = luq::load_state(path("b3.json"));
    ASSERT_EQ(s.kind, "bloch3");
    ASSERT_EQ(s.qubits, 3);
    const auto b = luq::to_bloch3(rho);
    EXPECT_LT((s.bloch3->t12 - b.t12).cwiseAbs().maxCoeff(), 1e-15);
    double max_diff = 0.0;
    for (size_t i = 0; i < 27; ++i) {
        max_diff = std::max(max_diff, std::abs(s.bloch3->t123[i] - b.t123[i]));
    }
    EXPECT_LT(max_diff, 1e-15);
}

}  // namespace

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    if (argc > 1) {
        g_cli = argv[1];
    } else {
        g_cli = "./luq";
    }
    return RUN_ALL_TESTS();
}
