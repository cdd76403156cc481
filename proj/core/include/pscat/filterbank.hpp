// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pscat/field.hpp"
#include "pscat/morlet.hpp"

namespace pscat {

enum class Parameterization { canonical, equivariant, pixelwise };
enum class InitScheme { tight_frame, random };

std::string to_string(Parameterization p);
std::string to_string(InitScheme s);
/// Accepts the names produced by to_string plus the CLI spellings
/// ("tight-frame", "pixel-wise"). Throws ConfigError otherwise.
Parameterization parse_parameterization(std::string_view s);
InitScheme parse_init_scheme(std::string_view s);

struct FilterbankSpec {
  int J = 2;
  int L = 8;
  int n = 32;
  Parameterization parameterization = Parameterization::canonical;
  InitScheme init = InitScheme::tight_frame;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless J >= 1, L >= 1, n even and 2^J | n.
  void validate() const;
  [[nodiscard]] int filter_count() const noexcept { return J * L; }
};

/// One (sigma, Theta, xi, gamma) tuple per scale; `theta` holds the shared base
/// orientation Theta_j.
struct EquivariantParams {
  std::vector<MorletParams> scales;
};

/// sigma = 0.8 * 2^j, xi = (3 pi / 4) 2^-j, gamma = 4 / L, theta = l pi / L for
/// j = 0..J-1, l = 0..L-1, scale-major.
[[nodiscard]] std::vector<MorletParams> tight_frame_init(int J, int L);

/// sigma = log(u), u ~ U[e, e^5]; xi ~ U[0.5, 1]; gamma ~ U[0.5, 1.5];
/// theta ~ U[0, 2 pi). Each (j, l) draws from its own stream of `seed`.
[[nodiscard]] std::vector<MorletParams> random_init(int J, int L, std::uint64_t seed);

/// Scale j yields L filters sharing (sigma_j, xi_j, gamma_j) with
/// theta = Theta_j + k pi / L.
[[nodiscard]] std::vector<MorletParams> equivariant_expand(const EquivariantParams& eq, int L);

/// Width of the Gaussian low-pass: 0.8 * 2^(J-1).
[[nodiscard]] double lowpass_sigma(int J);

struct LowPass {
  RealField spatial;               ///< unit-sum Gaussian on the full grid
  std::vector<ComplexField> hat;   ///< hat[r]: periodized spectrum at n / 2^r, r = 0..J
};

[[nodiscard]] LowPass build_lowpass(int J, int n);

/// A scattering filterbank of J * L wavelets (scale-major, orientation-minor)
/// plus the low-pass. The learnable state depends on the parameterization:
/// per-filter Morlet parameters, per-scale equivariant tuples, or raw complex
/// pixels. Realized fields are regenerated by realize() after any change.
class FilterBank {
 public:
  /// Initializes from spec.init and realizes.
  explicit FilterBank(const FilterbankSpec& spec);
  /// Canonical or pixelwise bank seeded from explicit Morlet parameters.
  FilterBank(const FilterbankSpec& spec, std::vector<MorletParams> params);
  FilterBank(const FilterbankSpec& spec, EquivariantParams eq);
  /// Pixelwise bank from raw spatial filters; `origin` records the Morlet
  /// parameters the pixels were copied from (may be empty).
  FilterBank(const FilterbankSpec& spec, std::vector<ComplexField> pixels,
             std::vector<MorletParams> origin);

  [[nodiscard]] const FilterbankSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] int J() const noexcept { return spec_.J; }
  [[nodiscard]] int L() const noexcept { return spec_.L; }
  [[nodiscard]] int n() const noexcept { return spec_.n; }
  [[nodiscard]] int size() const noexcept { return spec_.J * spec_.L; }
  [[nodiscard]] Parameterization parameterization() const noexcept { return spec_.parameterization; }
  [[nodiscard]] int scale_of(int idx) const noexcept { return idx / spec_.L; }
  [[nodiscard]] int orientation_of(int idx) const noexcept { return idx % spec_.L; }

  /// Morlet parameters of every filter (expanded for equivariant banks; the
  /// originating parameters for pixelwise banks).
  [[nodiscard]] std::span<const MorletParams> params() const noexcept { return params_; }
  [[nodiscard]] const EquivariantParams& equivariant() const noexcept { return equivariant_; }
  [[nodiscard]] std::span<const ComplexField> pixels() const noexcept { return pixels_; }

  void set_params(std::vector<MorletParams> params);
  void set_equivariant(EquivariantParams eq);
  void set_pixels(std::vector<ComplexField> pixels);

  /// Learnable parameters as one vector:
  ///   canonical:   (sigma, theta, xi, gamma) per filter
  ///   equivariant: (sigma, Theta, xi, gamma) per scale
  ///   pixelwise:   (re, im) per pixel per filter
  [[nodiscard]] std::vector<double> flat() const;
  void set_flat(std::span<const double> values);
  [[nodiscard]] std::size_t flat_size() const;
  /// Per-entry lower bounds matching flat(); sigma and gamma are bounded below.
  [[nodiscard]] std::vector<double> flat_lower_bounds() const;

  void realize();
  [[nodiscard]] bool dirty() const noexcept { return dirty_; }

  /// Spectrum of filter idx periodized to resolution n / 2^r (0 <= r <= scale).
  [[nodiscard]] const ComplexField& filter_hat(int idx, int r) const;
  [[nodiscard]] const ComplexField& filter_spatial(int idx) const;
  [[nodiscard]] cplx beta(int idx) const;
  [[nodiscard]] const ComplexField& lowpass_hat(int r) const { return lowpass_.hat.at(r); }
  [[nodiscard]] const RealField& lowpass_spatial() const noexcept { return lowpass_.spatial; }

 private:
  void check_realized() const;
  void clamp(std::vector<MorletParams>& ps) const;

  FilterbankSpec spec_;
  std::vector<MorletParams> params_;
  EquivariantParams equivariant_;
  std::vector<ComplexField> pixels_;

  bool dirty_ = true;
  std::vector<ComplexField> spatial_;
  std::vector<std::vector<ComplexField>> hat_;
  std::vector<cplx> betas_;
  LowPass lowpass_;
};

/// Copies the realized Morlet filters of a canonical or equivariant bank into
/// free per-pixel fields.
[[nodiscard]] FilterBank pixelwise_init_from(const FilterBank& bank);

struct LittlewoodPaley {
  double min = 0.0;
  double max = 0.0;
  RealField field;  ///< sum_l |psi_hat_l|^2 / 2 + |phi_hat|^2 on the full grid
};

[[nodiscard]] LittlewoodPaley littlewood_paley(const FilterBank& bank);

}  // namespace pscat
