// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pscat::cli {

struct ConfigEntry {
  std::string key;  ///< lower case, '_' replaced by '-'
  std::string value;
  int line = 0;
};

/// Flat `key = value` lines. '#' starts a comment, blank lines are skipped and
/// values may be double-quoted. Throws ConfigError naming the file and line on
/// malformed lines and repeated keys.
[[nodiscard]] std::vector<ConfigEntry> parse_config(const std::string& text, const std::string& origin);
[[nodiscard]] std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path);

}  // namespace pscat::cli
