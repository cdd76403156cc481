// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "pscat/field.hpp"
#include "pscat/filterbank.hpp"

namespace pscat {

/// Channel provenance. Unused indices are -1; order-0 has none, order-1 uses
/// (j1, l1), order-2 uses all four.
struct PathEntry {
  int order = 0;
  int j1 = -1;
  int l1 = -1;
  int j2 = -1;
  int l2 = -1;

  friend bool operator==(const PathEntry&, const PathEntry&) = default;
};

/// order0, then order1 scale-major/orientation-minor, then order2 in
/// lexicographic (j1, l1, j2, l2) with j1 < j2.
[[nodiscard]] std::vector<PathEntry> path_table(int J, int L);
[[nodiscard]] int channel_count(int J, int L);

/// B x C x side x side tensor, side = n / 2^J.
struct ScatteringOutput {
  int batch = 0;
  int channels = 0;
  int side = 0;
  std::vector<PathEntry> paths;
  std::vector<double> data;

  ScatteringOutput() = default;
  ScatteringOutput(int b, std::vector<PathEntry> table, int s)
      : batch(b),
        channels(static_cast<int>(table.size())),
        side(s),
        paths(std::move(table)),
        data(static_cast<std::size_t>(b) * channels * s * s, 0.0) {}

  [[nodiscard]] std::size_t area() const noexcept { return static_cast<std::size_t>(side) * side; }
  [[nodiscard]] std::size_t item_size() const noexcept { return channels * area(); }

  double& at(int b, int c, int i, int j) {
    return data[(static_cast<std::size_t>(b) * channels + c) * area() + static_cast<std::size_t>(i) * side + j];
  }
  double at(int b, int c, int i, int j) const {
    return data[(static_cast<std::size_t>(b) * channels + c) * area() + static_cast<std::size_t>(i) * side + j];
  }
  std::span<double> item(int b) { return {data.data() + b * item_size(), item_size()}; }
  std::span<const double> item(int b) const { return {data.data() + b * item_size(), item_size()}; }
  std::span<const double> map(int b, int c) const {
    return {data.data() + (static_cast<std::size_t>(b) * channels + c) * area(), area()};
  }
};

/// Intermediates of one forward pass over one image, kept for the reverse pass.
struct ItemTape {
  ComplexField x_hat;                ///< DFT of the input
  std::vector<ComplexField> z1;      ///< per filter: x * psi subsampled by 2^j1 (pre-modulus)
  std::vector<ComplexField> u1_hat;  ///< per filter: DFT of |z1|
  std::vector<ComplexField> z2;      ///< per order-2 path, in path-table order
};

struct Tape {
  int J = 0;
  int L = 0;
  int n = 0;
  std::vector<ItemTape> items;
};

/// Circular convolution of x with the filter whose DFT is f_hat, decimated by 2^r.
[[nodiscard]] ComplexField conv_fft(const ComplexField& x, const ComplexField& f_hat, int r);

[[nodiscard]] std::vector<RealField> scatter0(const RealField& x, const FilterBank& fb);
[[nodiscard]] std::vector<RealField> scatter1(const RealField& x, const FilterBank& fb,
                                              ItemTape* tape = nullptr);
[[nodiscard]] std::vector<RealField> scatter2(const RealField& x, const FilterBank& fb,
                                              ItemTape* tape = nullptr);

/// Full order 0-2 transform of a batch. Fills `tape` (one entry per image) when
/// non-null. Items are processed on up to `threads` workers; output does not
/// depend on the thread count.
[[nodiscard]] ScatteringOutput forward(std::span<const RealField> batch, const FilterBank& fb,
                                       Tape* tape = nullptr, int threads = 1);

}  // namespace pscat
