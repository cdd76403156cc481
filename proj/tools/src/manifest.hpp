// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace pscat::cli {

/// Record of one command invocation. Written with status "running" before any
/// output is touched and rewritten on completion or failure. Only the
/// "started_at", "finished_at" and "elapsed_seconds" fields vary between
/// identical runs.
class Manifest {
 public:
  Manifest(std::filesystem::path path, std::string command, nlohmann::json config, std::uint64_t seed,
           int threads);

  void add_output(const std::filesystem::path& p);
  void set(const std::string& key, nlohmann::json value);
  void succeed();
  void fail(const std::string& kind, const std::string& message, int exit_code);

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
  [[nodiscard]] const nlohmann::json& data() const noexcept { return data_; }

 private:
  void write() const;
  void finish();

  std::filesystem::path path_;
  nlohmann::json data_;
  double start_;
};

/// Fields that differ between otherwise identical runs.
[[nodiscard]] nlohmann::json strip_timestamps(nlohmann::json manifest);

}  // namespace pscat::cli
