// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "pscat/scattering.hpp"

#include <cmath>
#include <string>

#include "pscat/parallel.hpp"
#include "pscat/spectral.hpp"

namespace pscat {

std::vector<PathEntry> path_table(int J, int L) {
  std::vector<PathEntry> t;
  t.push_back({0});
  for (int j = 0; j < J; ++j) {
    for (int l = 0; l < L; ++l) t.push_back({1, j, l});
  }
  for (int j1 = 0; j1 < J; ++j1) {
    for (int l1 = 0; l1 < L; ++l1) {
      for (int j2 = j1 + 1; j2 < J; ++j2) {
        for (int l2 = 0; l2 < L; ++l2) t.push_back({2, j1, l1, j2, l2});
      }
    }
  }
  return t;
}

int channel_count(int J, int L) { return 1 + J * L + L * L * J * (J - 1) / 2; }

ComplexField conv_fft(const ComplexField& x, const ComplexField& f_hat, int r) {
  if (x.n() != f_hat.n()) throw ShapeMismatch("conv_fft: signal and filter sizes differ");
  return filter_subsample(fft2(x), f_hat, 1 << r);
}

namespace {

void store_real(const ComplexField& z, std::span<double> dst) {
  for (std::size_t k = 0; k < z.size(); ++k) dst[k] = z[k].real();
}

ComplexField modulus_spectrum(const ComplexField& z) {
  ComplexField u(z.n());
  for (std::size_t k = 0; k < z.size(); ++k) u[k] = std::abs(z[k]);
  fft2_inplace(u);
  return u;
}

// Computes orders 0..max_order of one image into `out` (channels x area, laid
// out as in path_table(J, L)).
void scatter_item(const RealField& x, const FilterBank& fb, std::span<double> out, ItemTape* tape,
                  int max_order) {
  const int J = fb.J(), n = fb.n(), count = fb.size();
  if (x.n() != n) {
    throw ShapeMismatch("input is " + std::to_string(x.n()) + "x" + std::to_string(x.n()) +
                        " but the filterbank expects " + std::to_string(n) + "x" + std::to_string(n));
  }
  const std::size_t area = static_cast<std::size_t>(n >> J) * (n >> J);
  auto channel = [&](std::size_t c) { return out.subspan(c * area, area); };

  ComplexField x_hat = fft2(x);
  store_real(filter_subsample(x_hat, fb.lowpass_hat(0), 1 << J), channel(0));
  if (max_order < 1) return;

  std::vector<ComplexField> u1_hat(static_cast<std::size_t>(count));
  if (tape) {
    tape->z1.assign(static_cast<std::size_t>(count), {});
    tape->z2.clear();
  }
  for (int idx = 0; idx < count; ++idx) {
    const int j1 = fb.scale_of(idx);
    ComplexField z1 = filter_subsample(x_hat, fb.filter_hat(idx, 0), 1 << j1);
    u1_hat[idx] = modulus_spectrum(z1);
    store_real(filter_subsample(u1_hat[idx], fb.lowpass_hat(j1), 1 << (J - j1)), channel(1 + idx));
    if (tape) tape->z1[idx] = std::move(z1);
  }

  if (max_order >= 2) {
    std::size_t c = 1 + static_cast<std::size_t>(count);
    for (int i1 = 0; i1 < count; ++i1) {
      const int j1 = fb.scale_of(i1);
      for (int i2 = 0; i2 < count; ++i2) {
        const int j2 = fb.scale_of(i2);
        if (j2 <= j1) continue;
        ComplexField z2 = filter_subsample(u1_hat[i1], fb.filter_hat(i2, j1), 1 << (j2 - j1));
        store_real(filter_subsample(modulus_spectrum(z2), fb.lowpass_hat(j2), 1 << (J - j2)),
                   channel(c++));
        if (tape) tape->z2.push_back(std::move(z2));
      }
    }
  }

  if (tape) {
    tape->x_hat = std::move(x_hat);
    tape->u1_hat = std::move(u1_hat);
  }
}

std::vector<RealField> split(std::span<const double> buf, std::size_t first, std::size_t last,
                             int side) {
  std::vector<RealField> maps;
  const std::size_t area = static_cast<std::size_t>(side) * side;
  for (std::size_t c = first; c < last; ++c) {
    RealField m(side);
    std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(c * area), area, m.begin());
    maps.push_back(std::move(m));
  }
  return maps;
}

}  // namespace

std::vector<RealField> scatter0(const RealField& x, const FilterBank& fb) {
  const int side = fb.n() >> fb.J();
  std::vector<double> buf(static_cast<std::size_t>(side) * side);
  scatter_item(x, fb, buf, nullptr, 0);
  return split(buf, 0, 1, side);
}

std::vector<RealField> scatter1(const RealField& x, const FilterBank& fb, ItemTape* tape) {
  const int side = fb.n() >> fb.J();
  std::vector<double> buf(static_cast<std::size_t>(1 + fb.size()) * side * side);
  scatter_item(x, fb, buf, tape, 1);
  return split(buf, 1, 1 + static_cast<std::size_t>(fb.size()), side);
}

std::vector<RealField> scatter2(const RealField& x, const FilterBank& fb, ItemTape* tape) {
  const int side = fb.n() >> fb.J();
  const auto channels = static_cast<std::size_t>(channel_count(fb.J(), fb.L()));
  std::vector<double> buf(channels * side * side);
  scatter_item(x, fb, buf, tape, 2);
  return split(buf, 1 + static_cast<std::size_t>(fb.size()), channels, side);
}

ScatteringOutput forward(std::span<const RealField> batch, const FilterBank& fb, Tape* tape,
                         int threads) {
  ScatteringOutput out(static_cast<int>(batch.size()), path_table(fb.J(), fb.L()),
                       fb.n() >> fb.J());
  if (tape) {
    tape->J = fb.J();
    tape->L = fb.L();
    tape->n = fb.n();
    tape->items.assign(batch.size(), {});
  }
  parallel_for(batch.size(), threads, [&](std::size_t b) {
    scatter_item(batch[b], fb, out.item(static_cast<int>(b)), tape ? &tape->items[b] : nullptr, 2);
  });
  return out;
}

}  // namespace pscat
