#include <array>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli_commands.hpp"
#include "test_support.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

// In-process run.
Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qjunction");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = qjunction::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Separate process, stdout only.
Run spawn(const std::string& args) {
  Run r;
  const std::string cmd = std::string(QJ_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

const std::string kExample = qjtest::data_path("t_junction.json");
const std::string kSymmetric = qjtest::data_path("symmetric_t.json");

}  // namespace

TEST(Cli, SpectrumOfTheExample) {
  const auto r = cli({"spectrum", "--config", kExample, "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["command"], "spectrum");
  const auto& res = j["result"];
  EXPECT_DOUBLE_EQ(res["band"][0].get<double>(), 4.0);
  EXPECT_DOUBLE_EQ(res["band"][1].get<double>(), 16.0);
  std::vector<std::pair<double, int>> eig;
  for (const auto& e : res["eigenvalues_in_band"]) eig.emplace_back(e["lambda"], e["multiplicity"]);
  const std::vector<std::pair<double, int>> expected{{5, 2}, {8, 1}, {10, 2}, {13, 2}};
  ASSERT_EQ(eig.size(), expected.size());
  for (std::size_t i = 0; i < eig.size(); ++i) {
    EXPECT_NEAR(eig[i].first, expected[i].first, 1e-12);
    EXPECT_EQ(eig[i].second, expected[i].second);
  }
}

TEST(Cli, TextAndJsonCarryTheSameNumbers) {
  const auto text = cli({"resonance", "--paper-mode"});
  const auto json = cli({"resonance", "--paper-mode", "--json"});
  ASSERT_EQ(text.code, 0);
  const auto j = nlohmann::json::parse(json.out);
  const double lf = j["result"]["lambda0F"];
  EXPECT_NE(text.out.find("lambda0F: " + qjunction::cli::num17(lf) + "\n"), std::string::npos);
}

TEST(Cli, ResonanceReport) {
  const auto r = cli({"resonance", "--config", kExample, "--paper-mode", "--paper-constant", "0.67", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto res = nlohmann::json::parse(r.out)["result"];
  EXPECT_LT(res["lambda0F"].get<double>(), 5.0);
  EXPECT_LE(res["fixed_point_residual"].get<double>(), 1e-10);
  EXPECT_NEAR(res["lambda0F_paper_constant"].get<double>(), 4.33, 1e-12);
  EXPECT_FALSE(res.contains("beta"));
  const auto sym = nlohmann::json::parse(cli({"resonance", "--config", kSymmetric, "--json"}).out)["result"];
  ASSERT_TRUE(sym.contains("beta"));
  EXPECT_NEAR(sym["e0"][1].get<double>(), sym["e0"][2].get<double>(), 1e-9);
}

TEST(Cli, NoEigenvalueInBand) {
  // a thin well pushes every eigenvalue far above the band
  const auto dir = std::filesystem::temp_directory_path() / "qj_cli_test";
  std::filesystem::create_directories(dir);
  auto spec = qjunction::builtin_example();
  spec.well.width_a = 0.3;
  spec.well.height_b = 1.0;
  spec.wires = {{1, qjunction::Side::left, 0.0, 1.0, 0.0}};
  const auto path = (dir / "tiny.json").string();
  std::ofstream(path) << qjunction::serialize(spec);
  EXPECT_EQ(cli({"resonance", "--config", path}).code, 3);
}

TEST(Cli, EmptyBandExitsThree) {
  const auto dir = std::filesystem::temp_directory_path() / "qj_cli_test";
  std::filesystem::create_directories(dir);
  auto spec = qjunction::builtin_example();
  spec.wires[2].width = std::numbers::pi / 5;
  const auto path = (dir / "empty_band.json").string();
  std::ofstream(path) << qjunction::serialize(spec);
  const auto r = cli({"spectrum", "--config", path});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("open band is empty"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({"sweep", "--steps", "0"}).code, 2);
  EXPECT_EQ(cli({"sweep", "--method", "magic"}).code, 2);
  EXPECT_EQ(cli({"sweep", "--min", "3", "--max", "5"}).code, 2);
  EXPECT_EQ(cli({"spectrum", "--config", "/nonexistent.json"}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
}

TEST(Cli, SweepSchemaAndRowCount) {
  const auto r = cli({"sweep", "--steps", "24"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 25u);
  std::string header = "lambda,p";
  for (const char* part : {"Re_S_", "Im_S_", "T_"})
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j) header += std::string(",") + part + std::to_string(i) + std::to_string(j);
  header += ",unitarity_defect,flag";
  EXPECT_EQ(ls[0], header);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    EXPECT_EQ(std::count(ls[i].begin(), ls[i].end(), ','), 30);
    EXPECT_EQ(ls[i].back(), '0');
  }
  EXPECT_EQ(r.out.find('\r'), std::string::npos);
}

TEST(Cli, SweepIsByteIdenticalAcrossRunsAndThreads) {
  const auto a = spawn("sweep --config " + kExample + " --steps 400");
  const auto b = spawn("sweep --config " + kExample + " --steps 400");
  const auto c = spawn("sweep --config " + kExample + " --steps 400 --threads 3");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_EQ(lines(a.out).size(), 401u);
}

TEST(Cli, PoleSweepAndSvg) {
  const auto dir = std::filesystem::temp_directory_path() / "qj_cli_test";
  std::filesystem::create_directories(dir);
  const auto svg = (dir / "t.svg").string();
  const auto csv = (dir / "t.csv").string();
  const auto r = cli({"sweep", "--method", "pole", "--paper-mode", "--steps", "50", "--svg", svg, "-o", csv, "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["result"]["points"], 50);
  const std::string plot = qjtest::read_file(svg);
  EXPECT_NE(plot.find("<svg"), std::string::npos);
  EXPECT_EQ(std::count(plot.begin(), plot.end(), '\n') > 0, true);
  std::size_t polylines = 0;
  for (std::size_t pos = 0; (pos = plot.find("<polyline", pos)) != std::string::npos; ++pos) ++polylines;
  EXPECT_EQ(polylines, 9u);
  EXPECT_EQ(lines(qjtest::read_file(csv)).size(), 51u);
}

TEST(Cli, BoundaryConditionFlags) {
  const auto tiny = nlohmann::json::parse(cli({"bc", "--halfwidth", "1e-6", "--json"}).out)["result"];
  EXPECT_TRUE(tiny["low_temperature"]["valid"].get<bool>());
  EXPECT_TRUE(tiny.contains("projectors"));
  EXPECT_TRUE(tiny.contains("energy_dependent"));
  const auto wide_run = cli({"bc", "--halfwidth", "0.5", "--json"});
  ASSERT_EQ(wide_run.code, 0) << wide_run.err;
  const auto wide = nlohmann::json::parse(wide_run.out)["result"];
  EXPECT_FALSE(wide["low_temperature"]["valid"].get<bool>());
  EXPECT_FALSE(wide.contains("projectors"));
  EXPECT_TRUE(wide.contains("energy_dependent"));
  EXPECT_EQ(cli({"bc", "--halfwidth", "5"}).code, 0);
  const auto sym = nlohmann::json::parse(cli({"bc", "--config", kSymmetric, "--halfwidth", "1e-4", "--json"}).out);
  EXPECT_TRUE(sym["result"].contains("beta"));
  EXPECT_TRUE(sym["result"].contains("P0"));
}

TEST(Cli, TimingOnlyOnRequest) {
  EXPECT_EQ(cli({"spectrum"}).out.find("timing_ms"), std::string::npos);
  EXPECT_NE(cli({"spectrum", "--timing"}).out.find("timing_ms"), std::string::npos);
}
