// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "oracles/spatial_oracle.hpp"
#include "pscat/rng.hpp"
#include "pscat/scattering.hpp"
#include "pscat/spectral.hpp"

using namespace pscat;

namespace {

ComplexField random_field(int n, Rng& rng) {
  ComplexField f(n);
  for (auto& v : f) v = {rng.normal(), rng.normal()};
  return f;
}

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

cplx inner(const ComplexField& a, const ComplexField& b) {
  cplx acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::conj(a[k]) * b[k];
  return acc;
}

}  // namespace

TEST(Fft, RoundTrip) {
  Rng rng(1);
  auto x = random_field(16, rng);
  EXPECT_LT(max_diff(ifft2(fft2(x)), x), 1e-13);
}

TEST(Fft, DeltaHasFlatSpectrum) {
  ComplexField d(8);
  d(0, 0) = 1.0;
  for (const auto& v : fft2(d)) EXPECT_NEAR(std::abs(v - cplx(1.0)), 0.0, 1e-15);
}

TEST(Periodize, LevelZeroIsIdentity) {
  Rng rng(2);
  auto f = random_field(8, rng);
  EXPECT_EQ(periodize(f, 1), f);
}

TEST(Periodize, FlatSpectrumFoldsToFour) {
  ComplexField ones(16, cplx(1.0));
  auto p = periodize(ones, 2);
  ASSERT_EQ(p.n(), 8);
  for (const auto& v : p) EXPECT_EQ(v, cplx(4.0));
}

TEST(Periodize, EqualsScaledSpatialSubsampling) {
  Rng rng(3);
  const int n = 16;
  auto f_hat = random_field(n, rng);
  const auto f = ifft2(f_hat);
  for (int s : {2, 4, 8}) {
    auto via_fold = ifft2(periodize(f_hat, s));
    auto direct = oracle::coarse_filter(f, s);
    EXPECT_LT(max_diff(via_fold, direct), 1e-12) << "factor " << s;
  }
}

TEST(Periodize, RejectsNonDivisor) {
  ComplexField f(8);
  EXPECT_THROW((void)periodize(f, 3), ShapeMismatch);
}

TEST(Periodize, UnfoldIsAdjoint) {
  Rng rng(4);
  auto x = random_field(16, rng);
  auto y = random_field(4, rng);
  EXPECT_LT(std::abs(inner(periodize(x, 4), y) - inner(x, unfold(y, 4))), 1e-12);
}

TEST(Decimate, UpsampleIsAdjoint) {
  Rng rng(5);
  auto x = random_field(16, rng);
  auto y = random_field(8, rng);
  EXPECT_LT(std::abs(inner(decimate(x, 2), y) - inner(x, upsample_zero(y, 2))), 1e-12);
}

TEST(ConvFft, DeltaFilterIsIdentity) {
  Rng rng(6);
  auto x = random_field(8, rng);
  ComplexField ones(8, cplx(1.0));
  EXPECT_LT(max_diff(conv_fft(x, ones, 0), x), 1e-14);
}

TEST(ConvFft, MatchesDirectConvolution) {
  Rng rng(7);
  auto x = random_field(8, rng);
  auto f = random_field(8, rng);
  const auto direct = oracle::circular_conv(x, f);
  EXPECT_LT(max_diff(conv_fft(x, fft2(f), 0), direct), 1e-10);
  EXPECT_LT(max_diff(conv_fft(x, fft2(f), 1), oracle::every_nth(direct, 2)), 1e-10);
  EXPECT_LT(max_diff(conv_fft(x, fft2(f), 2), oracle::every_nth(direct, 4)), 1e-10);
}

TEST(ConvFft, ShapeMismatchThrows) {
  EXPECT_THROW((void)conv_fft(ComplexField(8), ComplexField(16), 0), ShapeMismatch);
}
