#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cli = TREATFAIR_CLI;
const std::string fixtures = TREATFAIR_FIXTURES;

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "treatfair_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(run("simulate --out " + path("bal.csv")), 0);
  }

  static std::string path(const std::string& name) { return (dir_ / name).string(); }

  // exit status of the CLI with stdout/stderr captured to files
  static int run(const std::string& args, const std::string& tag = "last") {
    const std::string cmd = cli + " " + args + " > " + path(tag + ".out") + " 2> " + path(tag + ".err");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static json read_json(const std::string& p) { return json::parse(slurp(p)); }
  static std::string data_args(const std::string& csv = "bal.csv") {
    return "--data " + path(csv) + " --schema " + path(fs::path(csv).stem().string() + ".schema.json");
  }

  static fs::path dir_;
};

fs::path Cli::dir_;

}  // namespace

TEST_F(Cli, SimulateDefaultsAndDeterminism) {
  const std::string csv = slurp(path("bal.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5001);
  ASSERT_EQ(run("simulate --out " + path("bal2.csv")), 0);
  EXPECT_EQ(slurp(path("bal2.csv")), csv);
  EXPECT_TRUE(fs::exists(path("bal.schema.json")));
  const json oracle = read_json(path("bal.oracle.json"));
  EXPECT_TRUE(oracle.contains("provenance"));

  ASSERT_EQ(run("simulate --delta 2 --out " + path("unb.csv")), 0);
  EXPECT_NE(slurp(path("unb.csv")), csv);
}

TEST_F(Cli, AuditAntisymmetricOnOracle) {
  ASSERT_EQ(run("audit " + data_args() + " --stats mean --group-pair M F --out " + path("mf")), 0);
  ASSERT_EQ(run("audit " + data_args() + " --stats mean --group-pair F M --out " + path("fm")), 0);
  const json fm = read_json(path("fm.json"));
  const json mf = read_json(path("mf.json"));
  EXPECT_EQ(fm.at("spec_version"), mf.at("spec_version"));
  for (const char* t : {"L", "D"}) {
    EXPECT_NEAR(fm["dtd"][t]["mean"].get<double>(), -mf["dtd"][t]["mean"].get<double>(), 1e-9);
    // the savings path is not affine in G, so total effects only agree up to the 0.03-weighted mediated part
    EXPECT_NEAR(fm["ttd"][t]["mean"].get<double>(), -mf["ttd"][t]["mean"].get<double>(), 0.01);
  }
  EXPECT_NEAR(fm["dtd"]["L"]["mean"].get<double>(), -2.0, 1e-9);
  EXPECT_TRUE(fs::exists(path("fm.csv")));
  const json prov = fm.at("provenance");
  EXPECT_EQ(prov.at("command"), "audit");
  EXPECT_EQ(prov.at("inputs").size(), 2u);
}

TEST_F(Cli, MultiAverageOnBinaryIsAbsoluteTtd) {
  ASSERT_EQ(run("audit " + data_args() + " --stats mean --group-pair F M --out " + path("single")), 0);
  ASSERT_EQ(run("audit " + data_args() + " --multi avg --group-pair F M --out " + path("multi")), 0);
  const json single = read_json(path("single.json"));
  const json multi = read_json(path("multi.json"));
  EXPECT_NEAR(multi["disparity"]["L"].get<double>(), std::abs(single["ttd"]["L"]["mean"].get<double>()), 1e-9);
  EXPECT_NEAR(multi["disparity"]["D"].get<double>(), std::abs(single["ttd"]["D"]["mean"].get<double>()), 1e-9);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  for (const char* sub : {"simulate", "fit", "audit", "mitigate", "risk", "losses", "predict"})
    EXPECT_EQ(run(std::string(sub) + " --help"), 0) << sub;
  EXPECT_EQ(run("audit " + data_args() + " --no-such-flag"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("audit --data " + path("missing.csv") + " --schema " + path("bal.schema.json")), 5);

  std::ofstream(path("females.csv")) << "G,A,E,I,S_sav,L,D,Y\nF,0,0,0,0,1,1,1\n";
  EXPECT_EQ(run("audit --data " + path("females.csv") + " --schema " + path("bal.schema.json") + " --group-pair M F"), 3);
  const json err = read_json(path("last.err"));
  EXPECT_EQ(err.at("exit_code"), 3);
  EXPECT_EQ(err.at("error"), "EmptyGroup");
  EXPECT_FALSE(err.at("message").get<std::string>().empty());
}

TEST_F(Cli, MitigateThenLosses) {
  ASSERT_EQ(run("mitigate " + data_args() + " --disadvantaged F --advantaged M --out " + path("fair.csv") +
                " --report " + path("fair.json")),
            0);
  const json rep = read_json(path("fair.json"));
  EXPECT_TRUE(rep.at("non_harm").get<bool>());
  ASSERT_EQ(run("losses --data " + path("fair.csv") + " --schema " + path("bal.schema.json") +
                " --amount L --group G --duration D --tag fair --out " + path("loss_fair.json")),
            0);
  ASSERT_EQ(run("losses " + data_args() + " --amount L --group G --duration D --out " + path("loss.json")), 0);
  const json before = read_json(path("loss.json"));
  const json after = read_json(path("loss_fair.json"));
  EXPECT_LT(after["groups"]["F"]["lgd"].get<double>(), before["groups"]["F"]["lgd"].get<double>());
  EXPECT_EQ(after["groups"]["M"], before["groups"]["M"]);
}

TEST_F(Cli, RiskWritesCdfGrids) {
  const std::string out = path("risk");
  ASSERT_EQ(run("risk " + data_args() + " --policy factual --policy conditional:F --samples 64 --out-dir " + out), 0);
  for (const char* f : {"risk_factual_F.csv", "risk_factual_M.csv", "risk_conditional-F_M.csv", "risk_summary.json"})
    EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;
  const std::string grid = slurp((fs::path(out) / "risk_factual_M.csv").string());
  EXPECT_EQ(grid.substr(0, grid.find('\n')), "threshold,cdf");
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 102);
  const std::string again = path("risk2");
  ASSERT_EQ(run("--threads 1 risk " + data_args() + " --policy factual --policy conditional:F --samples 64 --out-dir " +
                again),
            0);
  EXPECT_EQ(slurp((fs::path(again) / "risk_conditional-F_M.csv").string()),
            slurp((fs::path(out) / "risk_conditional-F_M.csv").string()));
}

TEST_F(Cli, PredictDemographicParity) {
  ASSERT_EQ(run("predict " + data_args() + " --criterion dp --out " + path("pred.json") + " --metrics " +
                path("pred_metrics.json")),
            0);
  const json m = read_json(path("pred_metrics.json"));
  EXPECT_TRUE(m.at("feasible").get<bool>());
  EXPECT_LE(m.at("train").at("dp_gap").get<double>(), 0.02);
  ASSERT_EQ(run("audit " + data_args() + " --predictor " + path("pred.json") + " --out " + path("pred_audit")), 0);
  EXPECT_NEAR(read_json(path("pred_audit.json"))["dtd"]["D"]["median"].get<double>(), -5.0, 1e-9);
}

TEST_F(Cli, FitOnFixture) {
  const std::string args = "--data " + fixtures + "/german_credit.csv --schema " + fixtures + "/german_credit.schema.json";
  ASSERT_EQ(run("fit " + args + " --out " + path("german.model.json") + " --report " + path("german.fit.json")), 0);
  const json model = read_json(path("german.model.json"));
  EXPECT_TRUE(model.contains("spec_version"));
  EXPECT_TRUE(model.contains("provenance"));
  ASSERT_EQ(run("audit " + args + " --model " + path("german.model.json") + " --sensitive Gender --out " +
                path("german_audit")),
            0);
  EXPECT_GT(read_json(path("german_audit.json"))["dtd"]["Duration"]["median"].get<double>(), 0.0);
}
