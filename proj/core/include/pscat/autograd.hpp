// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "pscat/filterbank.hpp"
#include "pscat/scattering.hpp"

namespace pscat {

// Reverse pass of the scattering network. Complex gradients follow the
// real-linear convention dL/dRe + i dL/dIm for a real-valued loss L.

/// Modulus threshold below which the subgradient is taken as zero.
inline constexpr double kModulusEps = 1e-12;

/// upstream * z / |z| pointwise; 0 where |z| < kModulusEps.
[[nodiscard]] ComplexField modulus_backward(const ComplexField& z, const RealField& upstream);

struct ConvGrads {
  ComplexField input;       ///< dL/dx, fine grid
  ComplexField filter_hat;  ///< dL/d f_hat
};

/// Reverse of conv_fft(x, f_hat, r).
[[nodiscard]] ConvGrads conv_backward(const ComplexField& x, const ComplexField& f_hat, int r,
                                      const ComplexField& upstream);

struct ScatteringGrads {
  /// Per filter: dL/d psi_hat at full resolution, summed over the batch and over
  /// every resolution the filter was used at.
  std::vector<ComplexField> filter_hat;
  /// Per image, when requested.
  std::vector<RealField> input;
};

/// Traverses the scattering DAG in reverse for a ScatteringOutput-shaped
/// upstream gradient. Items are reduced in batch order, paths in path-table
/// order, so results are bitwise reproducible. Throws TapeMissing when the tape
/// does not match the upstream batch.
[[nodiscard]] ScatteringGrads scattering_backward(const Tape& tape, const FilterBank& fb,
                                                  const ScatteringOutput& upstream,
                                                  bool want_input = false, int threads = 1);

/// Gradients of the learnable filterbank parameters.
struct FilterGradients {
  Parameterization mode = Parameterization::canonical;
  std::vector<MorletParams> per_filter;  ///< canonical: one entry per filter
  std::vector<MorletParams> per_scale;   ///< equivariant: theta holds dL/dTheta_j
  std::vector<ComplexField> pixels;      ///< pixelwise: dL/d psi per filter

  /// Same layout as FilterBank::flat().
  [[nodiscard]] std::vector<double> flat() const;
};

/// dL/d psi (spatial) = F^H dL/d psi_hat.
[[nodiscard]] ComplexField spatial_gradient(const ComplexField& filter_hat_grad);

/// Chains spectral filter gradients into the bank's learnable parameters:
/// dL/dzeta = sum_u Re[conj(dL/dpsi(u)) dpsi/dzeta(u)] (equivalently summed
/// over frequencies with DFT(dpsi/dzeta)). Equivariant banks sum each scale's
/// L filters; pixelwise banks return dL/dpsi unchanged.
[[nodiscard]] FilterGradients param_chain(const std::vector<ComplexField>& filter_hat_grads,
                                          const FilterBank& fb);

}  // namespace pscat
