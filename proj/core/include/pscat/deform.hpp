// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pscat/field.hpp"
#include "pscat/filterbank.hpp"

namespace pscat {

enum class DeformKind { rotation, scale, shear, translation, custom1, custom2 };
enum class Fill { zero, circular };

std::string to_string(DeformKind k);
/// Throws ConfigError for unknown names.
DeformKind parse_deform_kind(std::string_view s);

/// Strength units: rotation and shear in degrees, scale as a zoom factor,
/// translation in pixels along the column axis, custom1/custom2 as the
/// dimensionless epsilon of the polynomial displacement fields.
struct DeformationSpec {
  DeformKind kind = DeformKind::rotation;
  double strength = 0.0;
  Fill fill = Fill::zero;
};

/// Admissible strength range: [0, max], or [1, 1.4] for scale.
[[nodiscard]] double deform_min_strength(DeformKind k);
[[nodiscard]] double deform_max_strength(DeformKind k);

/// x(u - tau(u)) by bilinear interpolation. Affine kinds act about the image
/// centre (n - 1) / 2. The custom displacement fields are evaluated on
/// coordinates normalized to [-1, 1]^2 and scaled back to pixels. Throws
/// StrengthOutOfRange outside the admissible range. The identity strength
/// returns x unchanged.
[[nodiscard]] RealField deform(const RealField& x, const DeformationSpec& d);

/// ||S(x) - S(deform(x))||_2 / ||S(x)||_2 for each strength.
[[nodiscard]] std::vector<double> stability_curve(const FilterBank& bank, const RealField& x, DeformKind kind,
                                                  std::span<const double> strengths, Fill fill = Fill::zero,
                                                  int threads = 1);

}  // namespace pscat
