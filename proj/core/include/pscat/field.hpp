// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <new>
#include <vector>

#include "pscat/errors.hpp"

namespace pscat {

using cplx = std::complex<double>;

/// Square sampling grid with wrap-around (FFT-order) integer coordinates:
/// index k maps to k for k < n/2 and to k - n otherwise.
struct GridSpec {
  int n = 0;

  GridSpec() = default;
  explicit GridSpec(int side) : n(side) {
    if (side < 2 || side % 2 != 0) {
      throw ShapeMismatch("grid side must be even and >= 2, got " + std::to_string(side));
    }
  }

  [[nodiscard]] int coord(int k) const noexcept { return k < n / 2 ? k : k - n; }
};

/// 64-byte aligned storage, so FFT plans can use SIMD kernels.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) { return static_cast<T*>(::operator new(count * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <class U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
    return true;
  }
};

/// n x n row-major field. Row index carries u1, column index carries u2.
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  explicit Grid(int n, T fill = T{}) : n_(n), v_(static_cast<std::size_t>(n) * n, fill) {}

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return v_.size(); }
  [[nodiscard]] bool empty() const noexcept { return v_.empty(); }

  T& operator()(int r, int c) noexcept { return v_[static_cast<std::size_t>(r) * n_ + c]; }
  const T& operator()(int r, int c) const noexcept {
    return v_[static_cast<std::size_t>(r) * n_ + c];
  }
  T& operator[](std::size_t i) noexcept { return v_[i]; }
  const T& operator[](std::size_t i) const noexcept { return v_[i]; }

  [[nodiscard]] std::span<T> values() noexcept { return v_; }
  [[nodiscard]] std::span<const T> values() const noexcept { return v_; }
  [[nodiscard]] T* data() noexcept { return v_.data(); }
  [[nodiscard]] const T* data() const noexcept { return v_.data(); }

  auto begin() noexcept { return v_.begin(); }
  auto end() noexcept { return v_.end(); }
  auto begin() const noexcept { return v_.begin(); }
  auto end() const noexcept { return v_.end(); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int n_ = 0;
  std::vector<T, AlignedAllocator<T>> v_;
};

using ComplexField = Grid<cplx>;
using RealField = Grid<double>;

inline ComplexField to_complex(const RealField& x) {
  ComplexField out(x.n());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
  return out;
}

inline RealField real_part(const ComplexField& z) {
  RealField out(z.n());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
  return out;
}

}  // namespace pscat
