// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pscat/morlet.hpp"
#include "pscat/training.hpp"

namespace pscat {

/// Shortest distance between two angles on the unit circle, in [0, pi].
[[nodiscard]] double arc_distance(double a, double b);

/// ||(sigma, xi, gamma)_1 - (sigma, xi, gamma)_2||_2 + arc_distance(theta_1, theta_2).
/// Orientations are compared modulo 2 pi even though theta and theta + pi give
/// conjugate filters.
[[nodiscard]] double morlet_distance(const MorletParams& a, const MorletParams& b);

/// Minimum-cost perfect matching on a square cost matrix (row-major, k x k).
/// Returns assignment[row] = column. O(k^3).
[[nodiscard]] std::vector<int> hungarian(std::span<const double> cost, int k);

struct FilterMatch {
  std::vector<std::pair<int, int>> pairs;  ///< (index in A, index in B), sorted by A
  std::vector<double> costs;               ///< morlet_distance per pair
  double total = 0.0;
};

/// Minimum-cost bipartite matching between the filters of two banks. Throws
/// SizeMismatch if the banks differ in size.
[[nodiscard]] FilterMatch filterbank_distance(std::span<const MorletParams> a, std::span<const MorletParams> b);

/// Distance of every logged epoch's filters to `reference`.
[[nodiscard]] std::vector<double> distance_trajectory(const RunLog& log, std::span<const MorletParams> reference);

}  // namespace pscat
