// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "pscat/deform.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "pscat/errors.hpp"
#include "pscat/scattering.hpp"

namespace pscat {
namespace {

constexpr std::array<std::string_view, 6> kNames{"rotation", "scale", "shear", "translation", "custom1", "custom2"};

double read(const RealField& x, int r, int c, Fill fill) {
  const int n = x.n();
  if (fill == Fill::circular) return x(((r % n) + n) % n, ((c % n) + n) % n);
  if (r < 0 || r >= n || c < 0 || c >= n) return 0.0;
  return x(r, c);
}

double bilinear(const RealField& x, double r, double c, Fill fill) {
  const double r0 = std::floor(r), c0 = std::floor(c);
  const double fr = r - r0, fc = c - c0;
  const int i = static_cast<int>(r0), j = static_cast<int>(c0);
  if (fr == 0.0 && fc == 0.0) return read(x, i, j, fill);
  return (1.0 - fr) * ((1.0 - fc) * read(x, i, j, fill) + fc * read(x, i, j + 1, fill)) +
         fr * ((1.0 - fc) * read(x, i + 1, j, fill) + fc * read(x, i + 1, j + 1, fill));
}

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

std::string to_string(DeformKind k) { return std::string(kNames[static_cast<std::size_t>(k)]); }

DeformKind parse_deform_kind(std::string_view s) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == s) return static_cast<DeformKind>(i);
  }
  throw ConfigError("unknown deformation '" + std::string(s) +
                    "' (expected rotation, scale, shear, translation, custom1 or custom2)");
}

double deform_min_strength(DeformKind k) { return k == DeformKind::scale ? 1.0 : 0.0; }

double deform_max_strength(DeformKind k) {
  switch (k) {
    case DeformKind::rotation:
      return 10.0;
    case DeformKind::scale:
      return 1.4;
    case DeformKind::shear:
      return 5.0;
    case DeformKind::translation:
      return 22.0;
    case DeformKind::custom1:
    case DeformKind::custom2:
      return 1.0;
  }
  return 0.0;
}

RealField deform(const RealField& x, const DeformationSpec& d) {
  const double lo = deform_min_strength(d.kind), hi = deform_max_strength(d.kind);
  if (!(d.strength >= lo && d.strength <= hi)) {
    throw StrengthOutOfRange(to_string(d.kind) + " strength " + std::to_string(d.strength) + " outside [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  if (d.strength == lo) return x;

  const int n = x.n();
  const double centre = (n - 1) / 2.0;
  const double half = (n - 1) / 2.0;
  const double rad = d.strength * std::numbers::pi / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad), tn = std::tan(rad);
  RealField out(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double a = r - centre, b = c - centre;
      double sr = r, sc = c;
      switch (d.kind) {
        case DeformKind::rotation:
          sr = centre + cs * a + sn * b;
          sc = centre - sn * a + cs * b;
          break;
        case DeformKind::scale:
          sr = centre + a / d.strength;
          sc = centre + b / d.strength;
          break;
        case DeformKind::shear:
          sr = centre + a - tn * b;
          break;
        case DeformKind::translation:
          sc = c - d.strength;
          break;
        case DeformKind::custom1: {
          const double v1 = a / half, v2 = b / half;
          sr = r - half * d.strength * (0.3 * v1 * v1 + 0.2 * v2 * v2);
          sc = c - half * d.strength * (0.2 * (0.2 * v1));
          break;
        }
        case DeformKind::custom2: {
          const double v1 = a / half, v2 = b / half;
          sr = r - half * d.strength * (0.3 * (v1 * v1 + v2 * v2));
          sc = c - half * d.strength * (-0.3 * (2.0 * v1 * v2));
          break;
        }
      }
      out(r, c) = bilinear(x, sr, sc, d.fill);
    }
  }
  return out;
}

std::vector<double> stability_curve(const FilterBank& bank, const RealField& x, DeformKind kind,
                                    std::span<const double> strengths, Fill fill, int threads) {
  std::vector<RealField> batch{x};
  for (double s : strengths) batch.push_back(deform(x, {kind, s, fill}));
  const auto out = forward(batch, bank, nullptr, threads);
  const auto ref = out.item(0);
  const double denom = norm2(ref);
  if (denom == 0.0) throw DataError("stability_curve: scattering of the reference image is zero");
  std::vector<double> curve;
  std::vector<double> diff(ref.size());
  for (std::size_t i = 0; i < strengths.size(); ++i) {
    const auto other = out.item(static_cast<int>(i + 1));
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = ref[k] - other[k];
    curve.push_back(norm2(diff) / denom);
  }
  return curve;
}

}  // namespace pscat
