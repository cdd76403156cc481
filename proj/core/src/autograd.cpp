// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "pscat/autograd.hpp"

#include <cmath>

#include "pscat/morlet.hpp"
#include "pscat/parallel.hpp"
#include "pscat/spectral.hpp"

namespace pscat {

ComplexField modulus_backward(const ComplexField& z, const RealField& upstream) {
  if (z.n() != upstream.n()) throw ShapeMismatch("modulus_backward: shape mismatch");
  ComplexField out(z.n());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double r = std::abs(z[k]);
    out[k] = r < kModulusEps ? cplx{} : upstream[k] * z[k] / r;
  }
  return out;
}

ConvGrads conv_backward(const ComplexField& x, const ComplexField& f_hat, int r,
                        const ComplexField& upstream) {
  auto g = filter_subsample_backward(fft2(x), f_hat, 1 << r, upstream, true, true);
  return {std::move(g.input), std::move(g.filter)};
}

namespace {

RealField real_of(const ComplexField& z) { return real_part(z); }

void add_into(ComplexField& acc, const ComplexField& v) {
  if (acc.empty()) {
    acc = v;
    return;
  }
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += v[k];
}

void add_real_into(RealField& acc, const ComplexField& v) {
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += v[k].real();
}

// Upstream gradient of a real output map that was produced as Re(lowpass
// filter_subsample(u_hat)). Returns dL/du (real) on the finer grid.
RealField lowpass_backward(const ComplexField& phi_hat, int factor, const ComplexField& g) {
  return real_of(filter_subsample_backward(phi_hat, phi_hat, factor, g, true, false).input);
}

struct ItemGrads {
  std::vector<ComplexField> filter_hat;
  RealField input;
};

ItemGrads item_backward(const ItemTape& t, const FilterBank& fb, std::span<const double> g,
                        bool want_input) {
  const int J = fb.J(), n = fb.n(), count = fb.size();
  const int side = n >> J;
  const std::size_t area = static_cast<std::size_t>(side) * side;
  auto upstream = [&](std::size_t c) {
    ComplexField out(side);
    for (std::size_t k = 0; k < area; ++k) out[k] = g[c * area + k];
    return out;
  };

  // acc[idx][r]: gradient w.r.t. the filter spectrum periodized to level r.
  std::vector<std::vector<ComplexField>> acc(static_cast<std::size_t>(count));
  for (int idx = 0; idx < count; ++idx) acc[idx].resize(static_cast<std::size_t>(fb.scale_of(idx)) + 1);
  std::vector<RealField> u1_bar;
  for (int idx = 0; idx < count; ++idx) u1_bar.emplace_back(n >> fb.scale_of(idx));

  std::size_t c = 1 + static_cast<std::size_t>(count);
  std::size_t path = 0;
  for (int i1 = 0; i1 < count; ++i1) {
    const int j1 = fb.scale_of(i1);
    for (int i2 = 0; i2 < count; ++i2) {
      const int j2 = fb.scale_of(i2);
      if (j2 <= j1) continue;
      const ComplexField& z2 = t.z2.at(path++);
      RealField u2_bar = lowpass_backward(fb.lowpass_hat(j2), 1 << (J - j2), upstream(c++));
      ComplexField z2_bar = modulus_backward(z2, u2_bar);
      auto res = filter_subsample_backward(t.u1_hat[i1], fb.filter_hat(i2, j1), 1 << (j2 - j1),
                                           z2_bar, true, true);
      add_real_into(u1_bar[i1], res.input);
      add_into(acc[i2][j1], res.filter);
    }
  }

  ItemGrads out;
  if (want_input) out.input = RealField(n);
  for (int idx = 0; idx < count; ++idx) {
    const int j1 = fb.scale_of(idx);
    RealField& ub = u1_bar[idx];
    RealField from_s1 = lowpass_backward(fb.lowpass_hat(j1), 1 << (J - j1), upstream(1 + idx));
    for (std::size_t k = 0; k < ub.size(); ++k) ub[k] += from_s1[k];
    ComplexField z1_bar = modulus_backward(t.z1.at(idx), ub);
    auto res = filter_subsample_backward(t.x_hat, fb.filter_hat(idx, 0), 1 << j1, z1_bar,
                                         want_input, true);
    add_into(acc[idx][0], res.filter);
    if (want_input) add_real_into(out.input, res.input);
  }
  if (want_input) {
    auto res = filter_subsample_backward(t.x_hat, fb.lowpass_hat(0), 1 << J, upstream(0), true, false);
    add_real_into(out.input, res.input);
  }

  out.filter_hat.resize(static_cast<std::size_t>(count));
  for (int idx = 0; idx < count; ++idx) {
    ComplexField total(n);
    for (std::size_t r = 0; r < acc[idx].size(); ++r) {
      if (acc[idx][r].empty()) continue;
      add_into(total, unfold(acc[idx][r], 1 << r));
    }
    out.filter_hat[idx] = std::move(total);
  }
  return out;
}

}  // namespace

ScatteringGrads scattering_backward(const Tape& tape, const FilterBank& fb,
                                    const ScatteringOutput& upstream, bool want_input, int threads) {
  if (tape.items.empty() || static_cast<int>(tape.items.size()) != upstream.batch) {
    throw TapeMissing("scattering_backward needs a tape recorded by a gradient-mode forward of the same batch");
  }
  if (tape.J != fb.J() || tape.L != fb.L() || tape.n != fb.n() ||
      upstream.channels != channel_count(fb.J(), fb.L()) || upstream.side != (fb.n() >> fb.J())) {
    throw ShapeMismatch("tape, filterbank and upstream gradient disagree on shape");
  }
  const int count = fb.size();
  ScatteringGrads out;
  out.filter_hat.assign(static_cast<std::size_t>(count), ComplexField(fb.n()));
  if (want_input) out.input.resize(static_cast<std::size_t>(upstream.batch));

  // Items are processed in fixed-size blocks; each block's per-item results are
  // summed in item order, so the reduction order never depends on `threads`.
  constexpr std::size_t kBlock = 32;
  const auto batch = static_cast<std::size_t>(upstream.batch);
  std::vector<ItemGrads> slots;
  for (std::size_t lo = 0; lo < batch; lo += kBlock) {
    const std::size_t hi = std::min(batch, lo + kBlock);
    slots.assign(hi - lo, {});
    parallel_for(hi - lo, threads, [&](std::size_t k) {
      const int b = static_cast<int>(lo + k);
      slots[k] = item_backward(tape.items[lo + k], fb, upstream.item(b), want_input);
    });
    for (std::size_t k = 0; k < slots.size(); ++k) {
      for (int idx = 0; idx < count; ++idx) add_into(out.filter_hat[idx], slots[k].filter_hat[idx]);
      if (want_input) out.input[lo + k] = std::move(slots[k].input);
    }
  }
  return out;
}

std::vector<double> FilterGradients::flat() const {
  std::vector<double> out;
  auto push = [&](const MorletParams& p) { out.insert(out.end(), {p.sigma, p.theta, p.xi, p.gamma}); };
  switch (mode) {
    case Parameterization::canonical:
      for (const auto& p : per_filter) push(p);
      break;
    case Parameterization::equivariant:
      for (const auto& p : per_scale) push(p);
      break;
    case Parameterization::pixelwise:
      for (const auto& f : pixels) {
        for (const auto& v : f) {
          out.push_back(v.real());
          out.push_back(v.imag());
        }
      }
      break;
  }
  return out;
}

ComplexField spatial_gradient(const ComplexField& filter_hat_grad) {
  ComplexField g = ifft2(filter_hat_grad);
  const double scale = static_cast<double>(g.size());
  for (auto& v : g) v *= scale;
  return g;
}

namespace {

double project(const ComplexField& grad, const ComplexField& direction) {
  double acc = 0.0;
  for (std::size_t k = 0; k < grad.size(); ++k) {
    acc += grad[k].real() * direction[k].real() + grad[k].imag() * direction[k].imag();
  }
  return acc;
}

}  // namespace

FilterGradients param_chain(const std::vector<ComplexField>& filter_hat_grads, const FilterBank& fb) {
  if (static_cast<int>(filter_hat_grads.size()) != fb.size()) {
    throw SizeMismatch("param_chain: one gradient field per filter expected");
  }
  FilterGradients out;
  out.mode = fb.parameterization();
  const GridSpec grid(fb.n());
  if (out.mode == Parameterization::pixelwise) {
    for (const auto& g : filter_hat_grads) out.pixels.push_back(spatial_gradient(g));
    return out;
  }
  for (int idx = 0; idx < fb.size(); ++idx) {
    const ComplexField g = spatial_gradient(filter_hat_grads[idx]);
    const MorletGrads d = morlet_param_grads(fb.params()[idx], grid);
    out.per_filter.push_back(
        {project(g, d.sigma), project(g, d.theta), project(g, d.xi), project(g, d.gamma)});
  }
  if (out.mode == Parameterization::equivariant) {
    out.per_scale.assign(static_cast<std::size_t>(fb.J()), MorletParams{0.0, 0.0, 0.0, 0.0});
    for (int idx = 0; idx < fb.size(); ++idx) {
      auto& s = out.per_scale[fb.scale_of(idx)];
      const auto& f = out.per_filter[idx];
      s.sigma += f.sigma;
      s.theta += f.theta;
      s.xi += f.xi;
      s.gamma += f.gamma;
    }
  }
  return out;
}

}  // namespace pscat
