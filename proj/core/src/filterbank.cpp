// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "pscat/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pscat/rng.hpp"
#include "pscat/spectral.hpp"

namespace pscat {

std::string to_string(Parameterization p) {
  switch (p) {
    case Parameterization::canonical: return "canonical";
    case Parameterization::equivariant: return "equivariant";
    case Parameterization::pixelwise: return "pixelwise";
  }
  return "?";
}

std::string to_string(InitScheme s) {
  return s == InitScheme::tight_frame ? "tight_frame" : "random";
}

Parameterization parse_parameterization(std::string_view s) {
  if (s == "canonical") return Parameterization::canonical;
  if (s == "equivariant") return Parameterization::equivariant;
  if (s == "pixelwise" || s == "pixel-wise") return Parameterization::pixelwise;
  throw ConfigError("unknown parameterization '" + std::string(s) +
                    "' (expected canonical, equivariant or pixelwise)");
}

InitScheme parse_init_scheme(std::string_view s) {
  if (s == "tight_frame" || s == "tight-frame" || s == "tf") return InitScheme::tight_frame;
  if (s == "random") return InitScheme::random;
  throw ConfigError("unknown init scheme '" + std::string(s) + "' (expected tight-frame or random)");
}

void FilterbankSpec::validate() const {
  if (J < 1) throw ConfigError("J must be >= 1");
  if (L < 1) throw ConfigError("L must be >= 1");
  if (n < 2 || n % 2 != 0) throw ConfigError("n must be even and >= 2");
  if (J >= 30 || n % (1 << J) != 0) {
    throw ConfigError("2^J must divide n (J=" + std::to_string(J) + ", n=" + std::to_string(n) + ")");
  }
}

std::vector<MorletParams> tight_frame_init(int J, int L) {
  std::vector<MorletParams> out;
  out.reserve(static_cast<std::size_t>(J) * L);
  for (int j = 0; j < J; ++j) {
    const double scale = std::ldexp(1.0, j);
    for (int l = 0; l < L; ++l) {
      out.push_back({0.8 * scale, l * std::numbers::pi / L, 0.75 * std::numbers::pi / scale,
                     4.0 / L});
    }
  }
  return out;
}

std::vector<MorletParams> random_init(int J, int L, std::uint64_t seed) {
  std::vector<MorletParams> out;
  out.reserve(static_cast<std::size_t>(J) * L);
  for (int j = 0; j < J; ++j) {
    for (int l = 0; l < L; ++l) {
      Rng rng(seed, (static_cast<std::uint64_t>(j) << 32) | static_cast<std::uint32_t>(l));
      MorletParams p;
      p.sigma = std::log(rng.uniform(std::exp(1.0), std::exp(5.0)));
      p.xi = rng.uniform(0.5, 1.0);
      p.gamma = rng.uniform(0.5, 1.5);
      p.theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
      out.push_back(p);
    }
  }
  return out;
}

std::vector<MorletParams> equivariant_expand(const EquivariantParams& eq, int L) {
  std::vector<MorletParams> out;
  out.reserve(eq.scales.size() * L);
  for (const auto& s : eq.scales) {
    for (int k = 0; k < L; ++k) {
      MorletParams p = s;
      p.theta = s.theta + k * std::numbers::pi / L;
      out.push_back(p);
    }
  }
  return out;
}

double lowpass_sigma(int J) { return 0.8 * std::ldexp(1.0, J - 1); }

LowPass build_lowpass(int J, int n) {
  const GridSpec g(n);
  const double s = lowpass_sigma(J);
  LowPass lp{RealField(n), {}};
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u1 = g.coord(i), u2 = g.coord(j);
      lp.spatial(i, j) = std::exp(-(u1 * u1 + u2 * u2) / (2.0 * s * s));
      sum += lp.spatial(i, j);
    }
  }
  for (auto& v : lp.spatial) v /= sum;
  lp.hat.push_back(fft2(lp.spatial));
  for (int r = 1; r <= J; ++r) lp.hat.push_back(periodize(lp.hat.front(), 1 << r));
  return lp;
}

namespace {

EquivariantParams per_scale(const std::vector<MorletParams>& full, int J, int L) {
  EquivariantParams eq;
  for (int j = 0; j < J; ++j) eq.scales.push_back(full[static_cast<std::size_t>(j) * L]);
  return eq;
}

std::vector<MorletParams> initial_params(const FilterbankSpec& spec) {
  return spec.init == InitScheme::tight_frame ? tight_frame_init(spec.J, spec.L)
                                              : random_init(spec.J, spec.L, spec.seed);
}

}  // namespace

FilterBank::FilterBank(const FilterbankSpec& spec) : spec_(spec) {
  spec_.validate();
  lowpass_ = build_lowpass(spec_.J, spec_.n);
  auto init = initial_params(spec_);
  switch (spec_.parameterization) {
    case Parameterization::canonical:
      set_params(std::move(init));
      break;
    case Parameterization::equivariant:
      set_equivariant(per_scale(init, spec_.J, spec_.L));
      break;
    case Parameterization::pixelwise: {
      const GridSpec g(spec_.n);
      clamp(init);
      std::vector<ComplexField> px;
      for (const auto& p : init) px.push_back(morlet_sample(p, g));
      params_ = std::move(init);
      set_pixels(std::move(px));
      break;
    }
  }
  realize();
}

FilterBank::FilterBank(const FilterbankSpec& spec, std::vector<MorletParams> params) : spec_(spec) {
  spec_.validate();
  if (static_cast<int>(params.size()) != spec_.filter_count()) {
    throw SizeMismatch("expected " + std::to_string(spec_.filter_count()) + " filters, got " +
                       std::to_string(params.size()));
  }
  lowpass_ = build_lowpass(spec_.J, spec_.n);
  if (spec_.parameterization == Parameterization::equivariant) {
    set_equivariant(per_scale(params, spec_.J, spec_.L));
  } else if (spec_.parameterization == Parameterization::pixelwise) {
    const GridSpec g(spec_.n);
    clamp(params);
    std::vector<ComplexField> px;
    for (const auto& p : params) px.push_back(morlet_sample(p, g));
    params_ = std::move(params);
    set_pixels(std::move(px));
  } else {
    set_params(std::move(params));
  }
  realize();
}

FilterBank::FilterBank(const FilterbankSpec& spec, EquivariantParams eq) : spec_(spec) {
  spec_.validate();
  spec_.parameterization = Parameterization::equivariant;
  lowpass_ = build_lowpass(spec_.J, spec_.n);
  set_equivariant(std::move(eq));
  realize();
}

FilterBank::FilterBank(const FilterbankSpec& spec, std::vector<ComplexField> pixels,
                       std::vector<MorletParams> origin)
    : spec_(spec) {
  spec_.validate();
  spec_.parameterization = Parameterization::pixelwise;
  lowpass_ = build_lowpass(spec_.J, spec_.n);
  params_ = std::move(origin);
  set_pixels(std::move(pixels));
  realize();
}

void FilterBank::clamp(std::vector<MorletParams>& ps) const {
  for (auto& p : ps) {
    p.sigma = std::max(p.sigma, kMinPositiveParam);
    p.gamma = std::max(p.gamma, kMinPositiveParam);
  }
}

void FilterBank::set_params(std::vector<MorletParams> params) {
  if (spec_.parameterization != Parameterization::canonical) {
    throw Error("set_params requires a canonical filterbank");
  }
  if (static_cast<int>(params.size()) != size()) {
    throw SizeMismatch("expected " + std::to_string(size()) + " filters, got " +
                       std::to_string(params.size()));
  }
  clamp(params);
  params_ = std::move(params);
  dirty_ = true;
}

void FilterBank::set_equivariant(EquivariantParams eq) {
  if (spec_.parameterization != Parameterization::equivariant) {
    throw Error("set_equivariant requires an equivariant filterbank");
  }
  if (static_cast<int>(eq.scales.size()) != spec_.J) {
    throw SizeMismatch("expected " + std::to_string(spec_.J) + " scales, got " +
                       std::to_string(eq.scales.size()));
  }
  clamp(eq.scales);
  equivariant_ = std::move(eq);
  params_ = equivariant_expand(equivariant_, spec_.L);
  dirty_ = true;
}

void FilterBank::set_pixels(std::vector<ComplexField> pixels) {
  if (spec_.parameterization != Parameterization::pixelwise) {
    throw Error("set_pixels requires a pixelwise filterbank");
  }
  if (static_cast<int>(pixels.size()) != size()) {
    throw SizeMismatch("expected " + std::to_string(size()) + " filters, got " +
                       std::to_string(pixels.size()));
  }
  for (const auto& f : pixels) {
    if (f.n() != spec_.n) throw ShapeMismatch("pixel filter size does not match n");
  }
  pixels_ = std::move(pixels);
  dirty_ = true;
}

std::size_t FilterBank::flat_size() const {
  switch (spec_.parameterization) {
    case Parameterization::canonical: return 4 * static_cast<std::size_t>(size());
    case Parameterization::equivariant: return 4 * static_cast<std::size_t>(spec_.J);
    case Parameterization::pixelwise:
      return 2 * static_cast<std::size_t>(size()) * spec_.n * spec_.n;
  }
  return 0;
}

std::vector<double> FilterBank::flat() const {
  std::vector<double> out;
  out.reserve(flat_size());
  auto push = [&](const MorletParams& p) {
    out.insert(out.end(), {p.sigma, p.theta, p.xi, p.gamma});
  };
  switch (spec_.parameterization) {
    case Parameterization::canonical:
      for (const auto& p : params_) push(p);
      break;
    case Parameterization::equivariant:
      for (const auto& p : equivariant_.scales) push(p);
      break;
    case Parameterization::pixelwise:
      for (const auto& f : pixels_) {
        for (const auto& v : f) {
          out.push_back(v.real());
          out.push_back(v.imag());
        }
      }
      break;
  }
  return out;
}

void FilterBank::set_flat(std::span<const double> values) {
  if (values.size() != flat_size()) {
    throw SizeMismatch("flat parameter vector has " + std::to_string(values.size()) +
                       " entries, expected " + std::to_string(flat_size()));
  }
  auto unpack = [&](std::size_t count) {
    std::vector<MorletParams> ps(count);
    for (std::size_t i = 0; i < count; ++i) {
      ps[i] = {values[4 * i], values[4 * i + 1], values[4 * i + 2], values[4 * i + 3]};
    }
    return ps;
  };
  switch (spec_.parameterization) {
    case Parameterization::canonical:
      set_params(unpack(static_cast<std::size_t>(size())));
      break;
    case Parameterization::equivariant:
      set_equivariant({unpack(static_cast<std::size_t>(spec_.J))});
      break;
    case Parameterization::pixelwise: {
      std::vector<ComplexField> px(static_cast<std::size_t>(size()), ComplexField(spec_.n));
      std::size_t k = 0;
      for (auto& f : px) {
        for (auto& v : f) {
          v = {values[k], values[k + 1]};
          k += 2;
        }
      }
      set_pixels(std::move(px));
      break;
    }
  }
}

std::vector<double> FilterBank::flat_lower_bounds() const {
  constexpr double kNoBound = -std::numeric_limits<double>::infinity();
  std::vector<double> lb(flat_size(), kNoBound);
  if (spec_.parameterization != Parameterization::pixelwise) {
    for (std::size_t i = 0; i < lb.size(); i += 4) {
      lb[i] = kMinPositiveParam;      // sigma
      lb[i + 3] = kMinPositiveParam;  // gamma
    }
  }
  return lb;
}

void FilterBank::realize() {
  if (!dirty_) return;
  const GridSpec g(spec_.n);
  const int count = size();
  spatial_.assign(static_cast<std::size_t>(count), ComplexField());
  hat_.assign(static_cast<std::size_t>(count), {});
  betas_.assign(static_cast<std::size_t>(count), cplx{});
  for (int idx = 0; idx < count; ++idx) {
    if (spec_.parameterization == Parameterization::pixelwise) {
      spatial_[idx] = pixels_[idx];
    } else {
      betas_[idx] = morlet_beta(params_[idx], g);
      spatial_[idx] = morlet_sample(params_[idx], g);
    }
    auto& levels = hat_[idx];
    levels.push_back(fft2(spatial_[idx]));
    for (int r = 1; r <= scale_of(idx); ++r) levels.push_back(periodize(levels.front(), 1 << r));
  }
  dirty_ = false;
}

void FilterBank::check_realized() const {
  if (dirty_) throw Error("filterbank parameters changed; call realize() first");
}

const ComplexField& FilterBank::filter_hat(int idx, int r) const {
  check_realized();
  return hat_.at(idx).at(r);
}

const ComplexField& FilterBank::filter_spatial(int idx) const {
  check_realized();
  return spatial_.at(idx);
}

cplx FilterBank::beta(int idx) const {
  check_realized();
  return betas_.at(idx);
}

FilterBank pixelwise_init_from(const FilterBank& bank) {
  FilterbankSpec spec = bank.spec();
  spec.parameterization = Parameterization::pixelwise;
  std::vector<ComplexField> px;
  for (int i = 0; i < bank.size(); ++i) px.push_back(bank.filter_spatial(i));
  return FilterBank(spec, std::move(px), {bank.params().begin(), bank.params().end()});
}

LittlewoodPaley littlewood_paley(const FilterBank& bank) {
  LittlewoodPaley lp;
  lp.field = RealField(bank.n());
  const auto& phi = bank.lowpass_hat(0);
  for (std::size_t k = 0; k < lp.field.size(); ++k) lp.field[k] = std::norm(phi[k]);
  for (int i = 0; i < bank.size(); ++i) {
    const auto& f = bank.filter_hat(i, 0);
    for (std::size_t k = 0; k < lp.field.size(); ++k) lp.field[k] += 0.5 * std::norm(f[k]);
  }
  const auto [mn, mx] = std::minmax_element(lp.field.begin(), lp.field.end());
  lp.min = *mn;
  lp.max = *mx;
  return lp;
}

}  // namespace pscat
