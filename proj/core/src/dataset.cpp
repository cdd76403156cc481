// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "pscat/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "pscat/errors.hpp"
#include "pscat/rng.hpp"

namespace pscat {

void Dataset::validate() const {
  if (planes < 1 || images.size() != labels.size() * static_cast<std::size_t>(planes)) {
    throw DataError("dataset: image count does not match labels x planes");
  }
  for (int y : labels) {
    if (y < 0 || y >= classes) throw DataError("dataset: label out of range");
  }
  for (const auto& im : images) {
    if (im.n() != images.front().n()) throw DataError("dataset: images differ in size");
  }
}

Dataset synth_textures(int classes, int per_class, int n, std::uint64_t seed, double noise, double jitter) {
  if (classes < 2) throw ConfigError("synth_textures: need at least two classes");
  if (per_class < 1) throw ConfigError("synth_textures: per_class must be positive");
  const GridSpec grid(n);
  const double pi = std::numbers::pi;
  Dataset ds;
  ds.classes = classes;
  ds.source = "synthetic";
  const std::size_t total = static_cast<std::size_t>(classes) * per_class;
  ds.images.reserve(total);
  ds.labels.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const int c = static_cast<int>(i % classes);
    Rng rng(seed, i);
    const double spread = jitter * pi / (4.0 * classes);
    const double angle = c * pi / classes + rng.uniform(-spread, spread);
    const double freq = rng.uniform(pi / 4.0, 3.0 * pi / 4.0);
    const double phase = rng.uniform(0.0, 2.0 * pi);
    const double ca = std::cos(angle), sa = std::sin(angle);
    RealField im(grid.n);
    for (int r = 0; r < n; ++r) {
      for (int q = 0; q < n; ++q) {
        im(r, q) = std::cos(freq * (r * ca + q * sa) + phase);
        if (noise > 0.0) im(r, q) += noise * rng.normal();
      }
    }
    ds.images.push_back(std::move(im));
    ds.labels.push_back(c);
  }
  return ds;
}

Dataset select(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.classes = ds.classes;
  out.planes = ds.planes;
  out.source = ds.source;
  out.labels.reserve(indices.size());
  out.images.reserve(indices.size() * ds.planes);
  for (std::size_t i : indices) {
    if (i >= ds.size()) throw InsufficientSamples("select: index out of range");
    out.labels.push_back(ds.labels[i]);
    for (int p = 0; p < ds.planes; ++p) out.images.push_back(ds.images[i * ds.planes + p]);
  }
  return out;
}

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

Dataset subsample_dataset(const Dataset& ds, std::size_t size, std::uint64_t seed) {
  if (size == 0 || size > ds.size()) {
    throw InsufficientSamples("subsample_dataset: requested " + std::to_string(size) + " of " +
                              std::to_string(ds.size()) + " samples");
  }
  Rng rng(seed, 0x5ab5);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.classes));
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

  std::vector<std::size_t> picked;
  const std::size_t per = ds.classes > 0 ? size / ds.classes : 0;
  const bool balanced = ds.classes > 0 && size % ds.classes == 0 &&
                        std::all_of(by_class.begin(), by_class.end(),
                                    [&](const auto& v) { return v.size() >= per; });
  if (balanced) {
    for (auto& members : by_class) {
      shuffle(members, rng);
      picked.insert(picked.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(per));
    }
  } else {
    std::vector<std::size_t> all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    shuffle(all, rng);
    picked.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
  }
  shuffle(picked, rng);
  return select(ds, picked);
}

Dataset read_cifar10(const std::vector<std::string>& paths, ColorPolicy policy, std::size_t limit) {
  constexpr std::size_t kRecord = 3073, kPlane = 1024;
  Dataset ds;
  ds.classes = 10;
  ds.planes = policy == ColorPolicy::per_channel ? 3 : 1;
  ds.source = "cifar10-binary";
  std::vector<unsigned char> rec(kRecord);
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open CIFAR-10 batch " + path);
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    if (bytes == 0 || bytes % kRecord != 0) {
      throw DataError(path + ": size " + std::to_string(bytes) + " is not a multiple of 3073-byte records");
    }
    for (std::size_t r = 0; r < bytes / kRecord; ++r) {
      if (limit != 0 && ds.size() >= limit) return ds;
      in.read(reinterpret_cast<char*>(rec.data()), kRecord);
      if (!in) throw DataError(path + ": truncated record " + std::to_string(r));
      if (rec[0] > 9) throw DataError(path + ": label " + std::to_string(rec[0]) + " out of range");
      ds.labels.push_back(rec[0]);
      auto px = [&](int plane, std::size_t k) { return rec[1 + plane * kPlane + k] / 255.0; };
      if (policy == ColorPolicy::per_channel) {
        for (int p = 0; p < 3; ++p) {
          RealField im(32);
          for (std::size_t k = 0; k < kPlane; ++k) im[k] = px(p, k);
          ds.images.push_back(std::move(im));
        }
      } else {
        RealField im(32);
        for (std::size_t k = 0; k < kPlane; ++k) im[k] = 0.299 * px(0, k) + 0.587 * px(1, k) + 0.114 * px(2, k);
        ds.images.push_back(std::move(im));
      }
    }
  }
  return ds;
}

}  // namespace pscat
