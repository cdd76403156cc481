// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "pscat/field.hpp"

namespace pscat {

// DFT convention: X[k] = sum_u x[u] exp(-2 pi i k.u / n). The forward transform
// is unnormalized; the inverse carries the 1/n^2 factor.

void fft2_inplace(ComplexField& f);
void ifft2_inplace(ComplexField& f);

[[nodiscard]] ComplexField fft2(ComplexField f);
[[nodiscard]] ComplexField fft2(const RealField& f);
[[nodiscard]] ComplexField ifft2(ComplexField f);

/// Frequency folding: out[k] = sum over the factor^2 aliased blocks of f_hat.
/// For a spatial field y this equals factor^2 * DFT(y[factor * u]).
[[nodiscard]] ComplexField periodize(const ComplexField& f_hat, int factor);

/// Adjoint of periodize: copies the block into every aliased position of a
/// grid factor times larger.
[[nodiscard]] ComplexField unfold(const ComplexField& g_hat, int factor);

/// Spatial decimation y[u] = x[factor * u].
[[nodiscard]] ComplexField decimate(const ComplexField& x, int factor);

/// Adjoint of decimate (zero insertion).
[[nodiscard]] ComplexField upsample_zero(const ComplexField& y, int factor);

/// decimate(x (*) f, factor) where x is given by its DFT x_hat, f by f_hat, and
/// (*) is circular convolution. The decimation is done by folding the product
/// spectrum, so only one inverse transform at the coarse size is needed.
[[nodiscard]] ComplexField filter_subsample(const ComplexField& x_hat, const ComplexField& f_hat,
                                            int factor);

/// Reverse pass of filter_subsample for an upstream gradient on the coarse
/// output. Gradients use the real-linear convention d/dRe + i d/dIm.
struct FilterSubsampleGrads {
  ComplexField input;   ///< w.r.t. the spatial input x (fine grid)
  ComplexField filter;  ///< w.r.t. the frequency-domain filter f_hat
};

[[nodiscard]] FilterSubsampleGrads filter_subsample_backward(const ComplexField& x_hat,
                                                             const ComplexField& f_hat, int factor,
                                                             const ComplexField& upstream,
                                                             bool want_input, bool want_filter);

}  // namespace pscat
