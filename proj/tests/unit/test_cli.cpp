#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "dsstab/io.hpp"

namespace fs = std::filesystem;
using namespace dsstab;
using namespace dsstab::cli;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("ds-stab-cli-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "ds-stab");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const char* kHeatSweep = R"(model: {kind: heat, modes: 16}
initial: {modal: [1, 0, 0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0.1]}
certify: {T: 1}
sweep: {rho_factors: [0.25, 0.5, 0.75], periods: 5}
)";

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_F(CliTest, SimulateSingleModeMatchesClosedForm) {
  const auto cfg = write("s.yaml", "model: {kind: heat, modes: 16, rho: 1}\ninitial: mode:1\n"
                                   "simulate: {t_end: 1, dt_out: 0.1}\n");
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", (dir_ / "o").string()}), kExitOk) << err_.str();
  std::ifstream in(dir_ / "o" / "trajectory.csv");
  const Trajectory traj = read_trajectory_csv(in, "x", 1.0);
  ASSERT_EQ(traj.size(), 11u);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double want = std::exp(-(kPi * kPi + kPi) * traj.times()[k]);
    EXPECT_NEAR(traj.norms()[k], want, 1e-12 * std::max(want, 1e-3));
  }
  EXPECT_TRUE(fs::exists(dir_ / "o" / "manifest.json"));
}

TEST_F(CliTest, MissingGainIsUsageError) {
  const auto cfg = write("s.yaml", "model: {kind: heat, modes: 8}\ninitial: mode:1\nsimulate: {t_end: 1, dt_out: 0.5}\n");
  EXPECT_EQ(run({"simulate", "--config", cfg.string(), "--out", dir_.string()}), kExitUsage);
  EXPECT_NE(err_.str().find("model.rho"), std::string::npos) << err_.str();
}

TEST_F(CliTest, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run({"frobnicate"}), kExitUsage);
  EXPECT_EQ(run({"simulate"}), kExitUsage);
}

TEST_F(CliTest, EndToEndPass) {
  const auto cert_cfg = write("c.yaml", "model: {kind: heat, modes: 16}\ncertify: {T: 1, rho_fraction: 0.5}\n");
  ASSERT_EQ(run({"certify", "--config", cert_cfg.string(), "--out", (dir_ / "cert").string()}), kExitOk) << err_.str();
  const auto cert = nlohmann::json::parse(slurp(dir_ / "cert" / "certificate.json"));
  EXPECT_EQ(cert["gain_search"]["status"], "found");
  const double rho = cert["certificate"]["constants"]["rho"]["value"].get<double>();
  const double rho1 = cert["gain_search"]["rho1"].get<double>();
  EXPECT_NEAR(rho, 0.5 * rho1, 1e-15);
  EXPECT_GE(cert["certificate"]["constants"]["delta"]["value"].get<double>(), 1.0);

  const auto sim_cfg =
      write("s.yaml", "model: {kind: heat, modes: 16, rho: " + format_double(rho) +
                          "}\ninitial: {modal: [1, 0, 0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0.1]}\n"
                          "simulate: {t_end: 4, dt_out: 0.01}\n");
  ASSERT_EQ(run({"simulate", "--config", sim_cfg.string(), "--out", (dir_ / "sim").string()}), kExitOk);
  EXPECT_EQ(run({"verify", "--trajectory", (dir_ / "sim" / "trajectory.csv").string(), "--certificate",
                 (dir_ / "cert" / "certificate.json").string(), "--out", (dir_ / "ver").string()}),
            kExitOk)
      << err_.str();
  const auto rep = nlohmann::json::parse(slurp(dir_ / "ver" / "verification.json"));
  EXPECT_EQ(rep["status"], "PASS");
  EXPECT_GE(rep["sigma_margin"].get<double>(), 0.0);
  bool has_mild = false;
  for (const auto& c : rep["checks"]) has_mild = has_mild || c["name"] == "lp_bound";
  EXPECT_TRUE(has_mild);
}

TEST_F(CliTest, HashMismatchIsUsageError) {
  const auto cert_cfg = write("c.yaml", "model: {kind: heat, modes: 16}\ncertify: {T: 1, rho: 0.1}\n");
  ASSERT_EQ(run({"certify", "--config", cert_cfg.string(), "--out", (dir_ / "cert").string()}), kExitOk);
  const auto sim_cfg = write("s.yaml", "model: {kind: heat, modes: 16, rho: 0.2}\ninitial: mode:1\n"
                                       "simulate: {t_end: 4, dt_out: 0.1}\n");
  ASSERT_EQ(run({"simulate", "--config", sim_cfg.string(), "--out", (dir_ / "sim").string()}), kExitOk);
  EXPECT_EQ(run({"verify", "--trajectory", (dir_ / "sim" / "trajectory.csv").string(), "--certificate",
                 (dir_ / "cert" / "certificate.json").string(), "--out", dir_.string()}),
            kExitUsage);
  EXPECT_NE(err_.str().find("hash"), std::string::npos);
}

TEST_F(CliTest, EmptyTrajectoryIsFormatError) {
  const auto cert_cfg = write("c.yaml", "model: {kind: heat, modes: 8}\ncertify: {T: 1, rho: 0.1}\n");
  ASSERT_EQ(run({"certify", "--config", cert_cfg.string(), "--out", (dir_ / "cert").string()}), kExitOk);
  const auto sim_cfg = write("s.yaml", "model: {kind: heat, modes: 8, rho: 0.1}\ninitial: mode:1\n"
                                       "simulate: {t_end: 4, dt_out: 0.1}\n");
  ASSERT_EQ(run({"simulate", "--config", sim_cfg.string(), "--out", (dir_ / "sim").string()}), kExitOk);
  std::ofstream(dir_ / "sim" / "trajectory.csv").close();
  EXPECT_EQ(run({"verify", "--trajectory", (dir_ / "sim" / "trajectory.csv").string(), "--certificate",
                 (dir_ / "cert" / "certificate.json").string(), "--out", dir_.string()}),
            kExitUsage);
  EXPECT_NE(err_.str().find("format error"), std::string::npos) << err_.str();
}

TEST_F(CliTest, ManifestReproducesRun) {
  const auto cfg = write("s.yaml", "model: {kind: heat, modes: 8, rho: 0.3, potential: {random_modes: {count: 4, "
                                   "scale: 2}}}\ninitial: {random_modes: {count: 8, scale: 1}}\n"
                                   "simulate: {t_end: 1, dt_out: 0.1}\nseed: 9\n");
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", (dir_ / "a").string()}), kExitOk) << err_.str();
  ASSERT_EQ(run({"simulate", "--config", (dir_ / "a" / "manifest.json").string(), "--out", (dir_ / "b").string()}),
            kExitOk)
      << err_.str();
  EXPECT_EQ(slurp(dir_ / "a" / "trajectory.csv"), slurp(dir_ / "b" / "trajectory.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "manifest.json"), slurp(dir_ / "b" / "manifest.json"));
}

TEST_F(CliTest, ZeroObservabilityGivesNoGain) {
  const auto cfg = write("c.yaml", "model: {kind: heat, modes: 8}\ncertify: {T: 1, delta: 0}\n");
  ASSERT_EQ(run({"certify", "--config", cfg.string(), "--out", dir_.string()}), kExitOk) << err_.str();
  const auto cert = nlohmann::json::parse(slurp(dir_ / "certificate.json"));
  EXPECT_EQ(cert["gain_search"]["status"], "none");
  EXPECT_TRUE(cert["gain_search"]["rho1"].is_null());
}

TEST_F(CliTest, TransportAboveThresholdRecordsFailure) {
  const auto cfg = write("t.yaml", "model: {kind: transport, grid: 257, alpha: 0.5, h: 1, f: 1, epsilon: 2}\n"
                                   "certify: {T: 0.5, ensemble: {members: 30}}\n");
  ASSERT_EQ(run({"certify", "--config", cfg.string(), "--out", dir_.string()}), kExitOk) << err_.str();
  const auto cert = nlohmann::json::parse(slurp(dir_ / "certificate.json"));
  EXPECT_FALSE(cert["certificate"]["valid"].get<bool>());
  EXPECT_EQ(cert["decomposition"]["status"], "FAIL");
  EXPECT_FALSE(cert["decomposition"]["witness"].is_null());
}

TEST_F(CliTest, SweepAllPassBelowLimit) {
  const auto cfg = write("s.yaml", kHeatSweep);
  ASSERT_EQ(run({"sweep", "--config", cfg.string(), "--out", dir_.string()}), kExitOk) << err_.str();
  const auto rows = csv_rows(slurp(dir_ / "sweep.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"rho", "C2", "sigma_cert", "sigma_meas", "pass"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][4], "PASS");
    EXPECT_GE(std::stod(rows[i][3]), std::stod(rows[i][2]));
  }
}

TEST_F(CliTest, SweepAboveLimitReportsNone) {
  const auto cfg = write("s.yaml", "model: {kind: heat, modes: 8}\ninitial: mode:1\ncertify: {T: 1}\n"
                                   "sweep: {rho_values: [0.05, 5, 50]}\n");
  ASSERT_EQ(run({"sweep", "--config", cfg.string(), "--out", dir_.string()}), kExitOk) << err_.str();
  const auto rows = csv_rows(slurp(dir_ / "sweep.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1][4], "PASS");
  EXPECT_EQ(rows[2][4], "none");
  EXPECT_EQ(rows[3][4], "none");
  EXPECT_EQ(rows[3][2], "none");
}

TEST_F(CliTest, SweepIsDeterministic) {
  const auto cfg = write("s.yaml", kHeatSweep);
  ASSERT_EQ(run({"sweep", "--config", cfg.string(), "--seed", "3", "--out", (dir_ / "a").string()}), kExitOk);
  ASSERT_EQ(run({"sweep", "--config", cfg.string(), "--seed", "3", "--out", (dir_ / "b").string()}), kExitOk);
  EXPECT_EQ(slurp(dir_ / "a" / "sweep.csv"), slurp(dir_ / "b" / "sweep.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "manifest.json"), slurp(dir_ / "b" / "manifest.json"));
}
