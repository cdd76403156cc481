// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "oracles/spatial_oracle.hpp"
#include "pscat/rng.hpp"
#include "pscat/scattering.hpp"

using namespace pscat;

namespace {

RealField random_image(int n, Rng& rng) {
  RealField x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

FilterBank tf_bank(int J, int L, int n) {
  FilterbankSpec s;
  s.J = J;
  s.L = L;
  s.n = n;
  return FilterBank(s);
}

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

TEST(PathTable, ChannelCounts) {
  EXPECT_EQ(path_table(2, 8).size(), 81u);
  EXPECT_EQ(path_table(4, 8).size(), 417u);
  EXPECT_EQ(channel_count(4, 8), 417);
  EXPECT_EQ(path_table(1, 4).size(), 5u);
}

TEST(PathTable, OrderingAndPruning) {
  const auto t = path_table(3, 2);
  EXPECT_EQ(t[0].order, 0);
  EXPECT_EQ(t[1], (PathEntry{1, 0, 0}));
  EXPECT_EQ(t[2], (PathEntry{1, 0, 1}));
  EXPECT_EQ(t[3], (PathEntry{1, 1, 0}));
  PathEntry prev{};
  bool first = true;
  for (const auto& p : t) {
    if (p.order != 2) continue;
    EXPECT_LT(p.j1, p.j2);
    if (!first) {
      EXPECT_LT(std::tie(prev.j1, prev.l1, prev.j2, prev.l2), std::tie(p.j1, p.l1, p.j2, p.l2));
    }
    prev = p;
    first = false;
  }
}

TEST(Scatter0, ConstantImageIsPreserved) {
  auto fb = tf_bank(2, 4, 16);
  RealField x(16, 3.25);
  auto s0 = scatter0(x, fb);
  ASSERT_EQ(s0.size(), 1u);
  EXPECT_EQ(s0[0].n(), 4);
  for (double v : s0[0]) EXPECT_NEAR(v, 3.25, 1e-12);
}

TEST(Scatter0, MatchesSpatialOracle) {
  Rng rng(1);
  auto fb = tf_bank(2, 2, 16);
  auto x = random_image(16, rng);
  auto s0 = scatter0(x, fb)[0];
  auto ref = oracle::scattering(x, {}, oracle::lowpass(2, 16), 2, 0)[0];
  for (std::size_t k = 0; k < s0.size(); ++k) EXPECT_NEAR(s0[k], ref[k], 1e-10);
}

TEST(Scatter1, ZeroInputGivesZeros) {
  auto fb = tf_bank(2, 4, 16);
  for (const auto& m : scatter1(RealField(16), fb)) {
    for (double v : m) EXPECT_EQ(v, 0.0);
  }
}

TEST(Scatter1, ChannelShape) {
  auto fb = tf_bank(2, 8, 32);
  auto s1 = scatter1(RealField(32, 1.0), fb);
  ASSERT_EQ(s1.size(), 16u);
  for (const auto& m : s1) EXPECT_EQ(m.n(), 8);
}

TEST(Scatter1, MatchedFilterWinsWithinItsScale) {
  auto fb = tf_bank(2, 8, 32);
  for (int lambda = 0; lambda < fb.size(); ++lambda) {
    const RealField x = real_part(fb.filter_spatial(lambda));
    const auto s1 = scatter1(x, fb);
    int best = -1;
    double best_e = -1.0;
    for (int c = 0; c < fb.size(); ++c) {
      if (fb.scale_of(c) != fb.scale_of(lambda)) continue;
      const double e = norm2(s1[c].values());
      if (e > best_e) {
        best_e = e;
        best = c;
      }
    }
    EXPECT_EQ(best, lambda);
  }
}

TEST(Scatter2, NoPathsAtSingleScale) {
  auto fb = tf_bank(1, 4, 16);
  EXPECT_TRUE(scatter2(RealField(16, 1.0), fb).empty());
}

TEST(Scatter2, ChannelCountAndNonnegativity) {
  Rng rng(2);
  auto fb = tf_bank(2, 8, 32);
  auto s2 = scatter2(random_image(32, rng), fb);
  ASSERT_EQ(s2.size(), 64u);
  for (const auto& m : s2) {
    for (double v : m) EXPECT_GE(v, -1e-12);
  }
}

TEST(Forward, TotalChannelsAndDeterminism) {
  Rng rng(3);
  auto fb = tf_bank(2, 8, 32);
  std::vector<RealField> batch{random_image(32, rng), random_image(32, rng)};
  auto a = forward(batch, fb);
  auto b = forward(batch, fb);
  EXPECT_EQ(a.channels, 81);
  EXPECT_EQ(a.side, 8);
  EXPECT_EQ(a.data, b.data);
  auto c = forward(batch, fb, nullptr, 4);
  EXPECT_EQ(a.data, c.data);
}

TEST(Forward, ShapeMismatchThrows) {
  auto fb = tf_bank(2, 2, 16);
  std::vector<RealField> batch{RealField(32)};
  EXPECT_THROW((void)forward(batch, fb), ShapeMismatch);
}

TEST(Forward, MatchesSpatialOracleAtAllOrders) {
  Rng rng(4);
  for (auto [J, L, n] : {std::tuple{1, 2, 8}, std::tuple{2, 2, 16}}) {
    FilterbankSpec spec;
    spec.J = J;
    spec.L = L;
    spec.n = n;
    spec.init = InitScheme::random;
    spec.seed = 17;
    FilterBank fb(spec);
    std::vector<ComplexField> psi;
    for (const auto& p : fb.params()) psi.push_back(oracle::morlet(p, n));
    auto x = random_image(n, rng);
    const auto ref = oracle::scattering(x, psi, oracle::lowpass(J, n), J, L);
    std::vector<RealField> batch{x};
    const auto out = forward(batch, fb);
    ASSERT_EQ(static_cast<int>(ref.size()), out.channels);
    for (int c = 0; c < out.channels; ++c) {
      for (std::size_t k = 0; k < ref[c].size(); ++k) {
        ASSERT_NEAR(out.map(0, c)[k], ref[c][k], 1e-9) << "J=" << J << " channel " << c;
      }
    }
  }
}

TEST(Forward, TranslationCovarianceAtStride) {
  Rng rng(5);
  auto fb = tf_bank(2, 4, 32);
  auto x = random_image(32, rng);
  RealField shifted(32);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) shifted((i + 4) % 32, (j + 8) % 32) = x(i, j);
  std::vector<RealField> a{x}, b{shifted};
  const auto sa = forward(a, fb);
  const auto sb = forward(b, fb);
  for (int c = 0; c < sa.channels; ++c) {
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) EXPECT_NEAR(sb.at(0, c, (i + 1) % 8, (j + 2) % 8), sa.at(0, c, i, j), 1e-11);
  }
}

TEST(Forward, OperatorBoundIsStable) {
  auto fb = tf_bank(2, 8, 32);
  auto measure = [&](std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      std::vector<RealField> b{random_image(32, rng)};
      const auto s = forward(b, fb);
      worst = std::max(worst, norm2(s.data) / norm2(b[0].values()));
    }
    return worst;
  };
  const double c1 = measure(100), c2 = measure(200);
  EXPECT_GT(c1, 0.0);
  EXPECT_NEAR(c1 / c2, 1.0, 0.01);
}
