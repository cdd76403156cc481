// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pscat/dataset.hpp"
#include "pscat/deform.hpp"
#include "pscat/filterbank.hpp"
#include "pscat/scattering.hpp"
#include "pscat/training.hpp"

namespace pscat {

// File formats. Every reader throws DataError on unreadable or malformed input.

/// {J, L, n, parameterization, init, seed, params: [{sigma, theta, xi, gamma}]}
/// plus "equivariant" (per-scale tuples) and "pixels" (one base64 string of
/// little-endian float64 re/im pairs per filter) where applicable.
[[nodiscard]] nlohmann::json filterbank_to_json(const FilterBank& bank);
[[nodiscard]] FilterBank filterbank_from_json(const nlohmann::json& j);
void save_filterbank(const FilterBank& bank, const std::filesystem::path& path);
[[nodiscard]] FilterBank load_filterbank(const std::filesystem::path& path);

[[nodiscard]] std::string base64_encode(std::span<const unsigned char> bytes);
[[nodiscard]] std::vector<unsigned char> base64_decode(std::string_view text);

/// Little-endian float64 tensor at `path` and a JSON sidecar at path + ".json"
/// with {shape: [B, C, side, side], dtype, path_table}.
void save_tensor(const ScatteringOutput& out, const std::filesystem::path& path);
[[nodiscard]] ScatteringOutput load_tensor(const std::filesystem::path& path);

/// JSON lines: the header object, then one record per epoch.
[[nodiscard]] nlohmann::json epoch_to_json(const EpochRecord& r);
void save_runlog(const RunLog& log, const std::filesystem::path& path);
[[nodiscard]] RunLog load_runlog(const std::filesystem::path& path);

/// kind,strength,normalized_distance
void save_stability_csv(const std::filesystem::path& path, DeformKind kind, std::span<const double> strengths,
                        std::span<const double> distances, bool append = false);
/// epoch,distance
void save_trajectory_csv(const std::filesystem::path& path, std::span<const double> distances);
/// index,scale,orientation,sigma,theta,xi,gamma,beta_re,beta_im
void save_params_csv(const std::filesystem::path& path, const FilterBank& bank);

/// Grayscale or RGB image scaled to [0, 1]; one plane per channel. PGM (P2/P5)
/// and PNG are recognized by content.
[[nodiscard]] std::vector<RealField> read_image(const std::filesystem::path& path);
/// 8-bit grayscale; values are mapped linearly from [lo, hi] to [0, 255].
void write_pgm(const std::filesystem::path& path, const RealField& x, double lo, double hi);
void write_png(const std::filesystem::path& path, const RealField& x, double lo, double hi);

/// One sub-directory per class (sorted by name), each holding PGM/PNG images.
/// RGB images follow `policy`.
[[nodiscard]] Dataset load_image_directory(const std::filesystem::path& root, ColorPolicy policy);

}  // namespace pscat
