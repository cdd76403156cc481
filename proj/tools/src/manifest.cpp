// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "pscat/errors.hpp"
#include "pscat/version.hpp"

namespace pscat::cli {
namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double monotonic_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

Manifest::Manifest(std::filesystem::path path, std::string command, nlohmann::json config, std::uint64_t seed,
                   int threads)
    : path_(std::move(path)), start_(monotonic_seconds()) {
  data_ = {{"format", "pscat-manifest"},
           {"command", std::move(command)},
           {"code_version", kVersion},
           {"config", std::move(config)},
           {"seed", seed},
           {"threads", threads},
           {"started_at", utc_now()},
           {"status", "running"},
           {"outputs", nlohmann::json::array()}};
  write();
}

void Manifest::add_output(const std::filesystem::path& p) {
  data_["outputs"].push_back(p.generic_string());
  write();
}

void Manifest::set(const std::string& key, nlohmann::json value) {
  data_[key] = std::move(value);
  write();
}

void Manifest::finish() {
  data_["finished_at"] = utc_now();
  data_["elapsed_seconds"] = monotonic_seconds() - start_;
}

void Manifest::succeed() {
  finish();
  data_["status"] = "ok";
  write();
}

void Manifest::fail(const std::string& kind, const std::string& message, int exit_code) {
  finish();
  data_["status"] = "error";
  data_["error"] = {{"kind", kind}, {"message", message}, {"exit_code", exit_code}};
  write();
}

void Manifest::write() const {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_);
  if (!out) throw DataError("cannot write manifest " + path_.string());
  out << data_.dump(2) << '\n';
}

nlohmann::json strip_timestamps(nlohmann::json manifest) {
  for (const char* k : {"started_at", "finished_at", "elapsed_seconds"}) manifest.erase(k);
  return manifest;
}

}  // namespace pscat::cli
