// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "pscat/field.hpp"

namespace pscat {

/// The four learnable parameters of a Morlet wavelet.
///   sigma: Gaussian window scale (pixels), > 0
///   theta: global orientation (radians), unbounded, compared mod 2 pi
///   xi:    frequency scale (radians / pixel)
///   gamma: aspect ratio, > 0
/// The same layout is reused to carry per-parameter gradients.
struct MorletParams {
  double sigma = 1.0;
  double theta = 0.0;
  double xi = 0.0;
  double gamma = 1.0;

  friend bool operator==(const MorletParams&, const MorletParams&) = default;
};

/// Lower bound applied to sigma and gamma after construction and after every
/// optimizer step.
inline constexpr double kMinPositiveParam = 1e-6;

/// One field per parameter, holding d(field)/d(param).
struct MorletGrads {
  ComplexField sigma;
  ComplexField theta;
  ComplexField xi;
  ComplexField gamma;
};

/// Gabor atom exp(-|D_gamma R_theta u|^2 / (2 sigma^2) + i xi u'), u' = u1 cos + u2 sin.
[[nodiscard]] ComplexField gabor_sample(const MorletParams& p, const GridSpec& g);

/// Zero-mean correction: sum_u envelope * e^{i xi u'} / sum_u envelope over the
/// discrete grid. On even wrap-around grids the unpaired -n/2 row and column
/// make the imaginary part nonzero for generic theta, so the full complex value
/// is kept; this makes sum_u psi(u) = 0 hold exactly.
[[nodiscard]] cplx morlet_beta(const MorletParams& p, const GridSpec& g);

/// psi(u) = envelope(u) * (e^{i xi u'} - beta).
[[nodiscard]] ComplexField morlet_sample(const MorletParams& p, const GridSpec& g);

/// Closed-form derivatives of the Gabor atom.
[[nodiscard]] MorletGrads gabor_param_grads(const MorletParams& p, const GridSpec& g);

/// Derivatives of the full Morlet wavelet, including the beta term obtained by
/// differentiating both discrete sums exactly.
[[nodiscard]] MorletGrads morlet_param_grads(const MorletParams& p, const GridSpec& g);

}  // namespace pscat
