// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pscat/field.hpp"

namespace pscat {

/// Labeled images. A sample owns `planes` consecutive entries of `images`
/// (3 for per-channel RGB, 1 otherwise).
struct Dataset {
  std::vector<RealField> images;
  std::vector<int> labels;
  int classes = 0;
  int planes = 1;
  std::string source = "synthetic";  ///< synthetic | cifar10-binary | image-directory

  [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
  [[nodiscard]] int side() const { return images.empty() ? 0 : images.front().n(); }
  /// Throws DataError if labels, plane counts or image sizes are inconsistent.
  void validate() const;
};

/// Oriented gratings: class c has orientation c pi / C plus jitter drawn from
/// U[-pi/(4C), pi/(4C)] scaled by `jitter`, spatial frequency U[pi/4, 3pi/4],
/// random phase, and additive Gaussian noise of standard deviation `noise`.
/// Labels cycle 0..C-1, so every class has exactly `per_class` samples.
[[nodiscard]] Dataset synth_textures(int classes, int per_class, int n, std::uint64_t seed,
                                     double noise = 0.0, double jitter = 1.0);

/// Random subset of `size` samples, class-balanced when size is a multiple of
/// the class count and every class has enough samples. Throws
/// InsufficientSamples when size exceeds the dataset.
[[nodiscard]] Dataset subsample_dataset(const Dataset& ds, std::size_t size, std::uint64_t seed);

/// Samples at `indices`, in that order.
[[nodiscard]] Dataset select(const Dataset& ds, const std::vector<std::size_t>& indices);

enum class ColorPolicy { per_channel, luminance };

/// CIFAR-10 binary batches: 3073-byte records (label, then 1024 R, G, B bytes).
/// Pixels are scaled to [0, 1]. Throws DataError on short or malformed files.
[[nodiscard]] Dataset read_cifar10(const std::vector<std::string>& paths, ColorPolicy policy,
                                   std::size_t limit = 0);

}  // namespace pscat
