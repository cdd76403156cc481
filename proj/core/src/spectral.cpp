// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "pscat/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <string>
#include <tuple>

namespace pscat {
namespace {

// Planning is not thread-safe in FFTW; execution with the new-array interface
// is. Plans are created once per (size, direction, alignment) and never
// destroyed. FFTW_ESTIMATE keeps the chosen algorithm, and therefore the
// rounding, identical from run to run.
class PlanCache {
 public:
  fftw_plan get(int n, int sign, bool aligned) {
    std::lock_guard lock(mu_);
    auto key = std::make_tuple(n, sign, aligned);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* buf = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    const unsigned flags = FFTW_ESTIMATE | (aligned ? 0u : FFTW_UNALIGNED);
    fftw_plan p = fftw_plan_dft_2d(n, n, buf, buf, sign, flags);
    fftw_free(buf);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

void execute(ComplexField& f, int sign) {
  auto* p = reinterpret_cast<fftw_complex*>(f.data());
  fftw_execute_dft(plans().get(f.n(), sign, fftw_alignment_of(reinterpret_cast<double*>(p)) == 0), p, p);
}

void require_divisible(int n, int factor) {
  if (factor < 1 || n % factor != 0) {
    throw ShapeMismatch("factor " + std::to_string(factor) + " does not divide grid side " +
                        std::to_string(n));
  }
}

}  // namespace

void fft2_inplace(ComplexField& f) { execute(f, FFTW_FORWARD); }

void ifft2_inplace(ComplexField& f) {
  execute(f, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(f.size());
  for (auto& v : f) v *= scale;
}

ComplexField fft2(ComplexField f) {
  fft2_inplace(f);
  return f;
}

ComplexField fft2(const RealField& f) { return fft2(to_complex(f)); }

ComplexField ifft2(ComplexField f) {
  ifft2_inplace(f);
  return f;
}

ComplexField periodize(const ComplexField& f_hat, int factor) {
  require_divisible(f_hat.n(), factor);
  if (factor == 1) return f_hat;
  const int m = f_hat.n() / factor;
  ComplexField out(m);
  for (int a = 0; a < factor; ++a) {
    for (int r = 0; r < m; ++r) {
      const int rr = r + a * m;
      for (int b = 0; b < factor; ++b) {
        for (int c = 0; c < m; ++c) out(r, c) += f_hat(rr, c + b * m);
      }
    }
  }
  return out;
}

ComplexField unfold(const ComplexField& g_hat, int factor) {
  if (factor == 1) return g_hat;
  const int m = g_hat.n();
  ComplexField out(m * factor);
  for (int r = 0; r < out.n(); ++r) {
    for (int c = 0; c < out.n(); ++c) out(r, c) = g_hat(r % m, c % m);
  }
  return out;
}

ComplexField decimate(const ComplexField& x, int factor) {
  require_divisible(x.n(), factor);
  const int m = x.n() / factor;
  ComplexField out(m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) out(r, c) = x(r * factor, c * factor);
  }
  return out;
}

ComplexField upsample_zero(const ComplexField& y, int factor) {
  ComplexField out(y.n() * factor);
  for (int r = 0; r < y.n(); ++r) {
    for (int c = 0; c < y.n(); ++c) out(r * factor, c * factor) = y(r, c);
  }
  return out;
}

ComplexField filter_subsample(const ComplexField& x_hat, const ComplexField& f_hat, int factor) {
  if (x_hat.n() != f_hat.n()) {
    throw ShapeMismatch("signal (" + std::to_string(x_hat.n()) + ") and filter (" +
                        std::to_string(f_hat.n()) + ") resolutions differ");
  }
  require_divisible(x_hat.n(), factor);
  ComplexField prod(x_hat.n());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = x_hat[i] * f_hat[i];
  ComplexField folded = periodize(prod, factor);
  const double scale = 1.0 / (static_cast<double>(factor) * factor);
  if (factor != 1) {
    for (auto& v : folded) v *= scale;
  }
  ifft2_inplace(folded);
  return folded;
}

FilterSubsampleGrads filter_subsample_backward(const ComplexField& x_hat, const ComplexField& f_hat,
                                               int factor, const ComplexField& upstream,
                                               bool want_input, bool want_filter) {
  const int m = x_hat.n();
  if (f_hat.n() != m || upstream.n() * factor != m) {
    throw ShapeMismatch("filter_subsample_backward: inconsistent shapes");
  }
  // FFT of the zero-upsampled upstream is the coarse spectrum tiled.
  ComplexField tiled = unfold(fft2(upstream), factor);
  FilterSubsampleGrads g;
  if (want_filter) {
    g.filter = ComplexField(m);
    const double scale = 1.0 / (static_cast<double>(m) * m);
    for (std::size_t i = 0; i < tiled.size(); ++i) g.filter[i] = std::conj(x_hat[i]) * tiled[i] * scale;
  }
  if (want_input) {
    for (std::size_t i = 0; i < tiled.size(); ++i) tiled[i] *= std::conj(f_hat[i]);
    ifft2_inplace(tiled);
    g.input = std::move(tiled);
  }
  return g;
}

}  // namespace pscat
