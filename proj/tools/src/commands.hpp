// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace pscat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDivergence = 4;

/// Entry point of the `pscat` tool; returns the process exit code.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace pscat::cli
