// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "commands.hpp"
#include "config_file.hpp"
#include "pscat/errors.hpp"
#include "pscat/io.hpp"

using namespace pscat;
using pscat::cli::run;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pscat_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  [[nodiscard]] std::string at(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(ConfigFile, ParsesKeysCommentsAndQuotes) {
  const auto entries = cli::parse_config("# header\nJ = 2\n  max_lr = 0.1  # peak\nout = \"a # b.json\"\n\n", "x.cfg");
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].key, "j");
  EXPECT_EQ(entries[1].key, "max-lr");
  EXPECT_EQ(entries[1].value, "0.1");
  EXPECT_EQ(entries[1].line, 3);
  EXPECT_EQ(entries[2].value, "a # b.json");
}

TEST(ConfigFile, DiagnosticsNameFileAndLine) {
  try {
    (void)cli::parse_config("j = 1\nnot a pair\n", "run.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:2:"), std::string::npos);
  }
  EXPECT_THROW((void)cli::parse_config("j = 1\nJ = 2\n", "run.cfg"), ConfigError);
  EXPECT_THROW((void)cli::parse_config("j = \"1\n", "run.cfg"), ConfigError);
}

TEST_F(CliTest, InitFlagsOverrideConfig) {
  std::ofstream(at("c.cfg")) << "j = 1\nl = 2\nn = 16\n";
  ASSERT_EQ(run({"init", "--config", at("c.cfg"), "--l", "3", "--out", at("fb.json")}), cli::kExitOk);
  const auto bank = load_filterbank(at("fb.json"));
  EXPECT_EQ(bank.J(), 1);
  EXPECT_EQ(bank.L(), 3);
  EXPECT_EQ(bank.n(), 16);
  const auto m = read_json(at("fb.json.manifest.json"));
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["config"]["l"], 3);
}

TEST_F(CliTest, ExitCodes) {
  std::ofstream(at("bad.cfg")) << "j = 1\nwidth = 3\n";
  EXPECT_EQ(run({"init", "--config", at("bad.cfg")}), cli::kExitConfig);
  EXPECT_EQ(run({"init", "--init", "spiral", "--out", at("x.json")}), cli::kExitConfig);
  EXPECT_EQ(run({"frobnicate"}), cli::kExitConfig);
  EXPECT_EQ(run({"show-filters", "--bank", at("missing.json"), "--out", at("f")}), cli::kExitData);
  const auto m = read_json(at("f/manifest.json"));
  EXPECT_EQ(m["status"], "error");
  EXPECT_EQ(m["error"]["exit_code"], cli::kExitData);
  EXPECT_EQ(run({"train", "--j", "1", "--l", "2", "--n", "8", "--per-class", "4", "--test-per-class", "0", "--epochs",
                 "3", "--lr-scattering", "1e200", "--lr-head", "1e200", "--out", at("run")}),
            cli::kExitDivergence);
  EXPECT_EQ(read_json(at("run/manifest.json"))["error"]["kind"], "divergence");
}

TEST_F(CliTest, ShowFiltersZeroFrequencyIsMidGrayAndPeakMatches) {
  ASSERT_EQ(run({"init", "--j", "2", "--l", "8", "--n", "32", "--out", at("fb.json")}), cli::kExitOk);
  auto j = filterbank_to_json(load_filterbank(at("fb.json")));
  j["params"][0]["xi"] = 0.0;
  save_filterbank(filterbank_from_json(j), at("fb0.json"));
  ASSERT_EQ(run({"show-filters", "--bank", at("fb0.json"), "--out", at("img")}), cli::kExitOk);

  const auto zero = read_image(at("img/psi_000_real.pgm"));
  ASSERT_EQ(zero[0].n(), 32);
  for (double v : zero[0]) EXPECT_EQ(v, 128.0 / 255.0);

  // Filter 10 is j = 1, l = 2: xi = 3 pi / 8, theta = pi / 4. Its spectrum
  // peaks at xi (cos theta, sin theta) n / (2 pi) bins from the centre.
  const auto mag = read_image(at("img/psi_010_fourier.pgm"))[0];
  double top = 0.0;
  for (double v : mag) top = std::max(top, v);
  double sr = 0.0, sc = 0.0;
  int count = 0;
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c)
      if (mag(r, c) == top) {
        sr += r;
        sc += c;
        ++count;
      }
  const double k = 3.0 * std::numbers::pi / 8.0 * 32.0 / (2.0 * std::numbers::pi) * std::cos(std::numbers::pi / 4.0);
  EXPECT_LE(std::abs(sr / count - (16.0 + k)), 1.0);
  EXPECT_LE(std::abs(sc / count - (16.0 + k)), 1.0);

  std::ifstream csv(at("img/params.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "index,scale,orientation,sigma,theta,xi,gamma,beta_re,beta_im");
}

TEST_F(CliTest, TransformConstantImageHasNoWaveletEnergy) {
  ASSERT_EQ(run({"init", "--j", "2", "--l", "8", "--n", "32", "--out", at("fb.json")}), cli::kExitOk);
  RealField x(32);
  for (auto& v : x) v = 0.6;
  write_png(at("const.png"), x, 0.0, 1.0);
  ASSERT_EQ(run({"transform", "--bank", at("fb.json"), "--input", at("const.png"), "--out", at("s.bin")}),
            cli::kExitOk);
  const auto out = load_tensor(at("s.bin"));
  EXPECT_EQ(out.channels, 81);
  EXPECT_EQ(read_json(at("s.bin.json"))["shape"][1], 81);
  double worst = 0.0;
  for (int c = 1; c < out.channels; ++c)
    for (double v : out.map(0, c)) worst = std::max(worst, std::abs(v));
  EXPECT_LT(worst, 1e-8);
  EXPECT_GT(out.map(0, 0)[0], 0.1);

  RealField small(16);
  write_pgm(at("small.pgm"), small, 0.0, 1.0);
  EXPECT_EQ(run({"transform", "--bank", at("fb.json"), "--input", at("small.pgm"), "--out", at("t.bin")}),
            cli::kExitData);
  EXPECT_EQ(run({"transform", "--bank", at("fb.json"), "--input", at("small.pgm"), "--resize", "--out",
                 at("t.bin")}),
            cli::kExitOk);
}

TEST_F(CliTest, FixedTrainingKeepsBankParameters) {
  std::ofstream(at("t.cfg")) << "fixed = true\nepochs = 4\nper-class = 6\ntest-per-class = 5\n";
  ASSERT_EQ(run({"train", "--config", at("t.cfg"), "--j", "1", "--l", "2", "--n", "16", "--out", at("run")}),
            cli::kExitOk);
  EXPECT_EQ(read_json(at("run/bank.json"))["params"], read_json(at("run/bank_initial.json"))["params"]);
  const auto log = load_runlog(at("run/runlog.jsonl"));
  EXPECT_EQ(log.epochs.size(), 5u);
  EXPECT_EQ(log.header["learnable"], false);
  EXPECT_EQ(log.header["color_policy"], "per-channel");
}

TEST_F(CliTest, DistanceToSelfIsZero) {
  ASSERT_EQ(run({"init", "--j", "2", "--l", "4", "--init", "random", "--seed", "3", "--out", at("fb.json")}),
            cli::kExitOk);
  ASSERT_EQ(run({"distance", "--a", at("fb.json"), "--b", at("fb.json"), "--out", at("d.json")}), cli::kExitOk);
  EXPECT_EQ(read_json(at("d.json"))["total"], 0.0);
}

TEST_F(CliTest, StabilityWritesEveryKind) {
  ASSERT_EQ(run({"init", "--j", "2", "--l", "4", "--n", "32", "--out", at("fb.json")}), cli::kExitOk);
  ASSERT_EQ(run({"stability", "--bank", at("fb.json"), "--steps", "3", "--out", at("s.csv")}), cli::kExitOk);
  std::ifstream in(at("s.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 1 + 6 * 3);
  EXPECT_EQ(run({"stability", "--bank", at("fb.json"), "--kinds", "twist", "--out", at("t.csv")}), cli::kExitConfig);
  EXPECT_TRUE(read_json(at("s.csv.manifest.json")).contains("deformation_conventions"));
}
