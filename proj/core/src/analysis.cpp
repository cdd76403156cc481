// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "pscat/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pscat/errors.hpp"

namespace pscat {

double arc_distance(double a, double b) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double d = std::fmod(std::abs(a - b), two_pi);
  return std::min(d, two_pi - d);
}

double morlet_distance(const MorletParams& a, const MorletParams& b) {
  const double ds = a.sigma - b.sigma, dx = a.xi - b.xi, dg = a.gamma - b.gamma;
  return std::sqrt(ds * ds + dx * dx + dg * dg) + arc_distance(a.theta, b.theta);
}

std::vector<int> hungarian(std::span<const double> cost, int k) {
  if (k < 0 || cost.size() != static_cast<std::size_t>(k) * k) throw SizeMismatch("hungarian: cost is not k x k");
  // Shortest augmenting paths with row/column potentials; index 0 is a sentinel.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<int> match(k + 1, 0), way(k + 1, 0);
  for (int row = 1; row <= k; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(k + 1, inf);
    std::vector<char> used(k + 1, 0);
    do {
      used[col0] = 1;
      const int r0 = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int c = 1; c <= k; ++c) {
        if (used[c]) continue;
        const double cur = cost[(r0 - 1) * k + (c - 1)] - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (int c = 0; c <= k; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(k, -1);
  for (int c = 1; c <= k; ++c) assignment[match[c] - 1] = c - 1;
  return assignment;
}

FilterMatch filterbank_distance(std::span<const MorletParams> a, std::span<const MorletParams> b) {
  if (a.size() != b.size()) {
    throw SizeMismatch("filterbank_distance: banks have " + std::to_string(a.size()) + " and " +
                       std::to_string(b.size()) + " filters");
  }
  const int k = static_cast<int>(a.size());
  std::vector<double> cost(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) cost[i * k + j] = morlet_distance(a[i], b[j]);
  const auto assignment = hungarian(cost, k);
  FilterMatch m;
  for (int i = 0; i < k; ++i) {
    m.pairs.emplace_back(i, assignment[i]);
    m.costs.push_back(cost[i * k + assignment[i]]);
    m.total += m.costs.back();
  }
  return m;
}

std::vector<double> distance_trajectory(const RunLog& log, std::span<const MorletParams> reference) {
  std::vector<double> out;
  out.reserve(log.epochs.size());
  for (const auto& rec : log.epochs) {
    if (rec.params.empty()) throw DataError("run log has no filter parameters for epoch " + std::to_string(rec.epoch));
    out.push_back(filterbank_distance(rec.params, reference).total);
  }
  return out;
}

}  // namespace pscat
