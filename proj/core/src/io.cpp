// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "pscat/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pscat/errors.hpp"

namespace pscat {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json params_json(const MorletParams& p) {
  return {{"sigma", p.sigma}, {"theta", p.theta}, {"xi", p.xi}, {"gamma", p.gamma}};
}

MorletParams params_from(const json& j) {
  return {j.at("sigma").get<double>(), j.at("theta").get<double>(), j.at("xi").get<double>(),
          j.at("gamma").get<double>()};
}

std::vector<MorletParams> params_list(const json& arr) {
  std::vector<MorletParams> out;
  for (const auto& p : arr) out.push_back(params_from(p));
  return out;
}

json params_array(std::span<const MorletParams> ps) {
  json arr = json::array();
  for (const auto& p : ps) arr.push_back(params_json(p));
  return arr;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

json parse_json(const std::string& text, const fs::path& path) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void put_f64_le(std::vector<unsigned char>& buf, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

double get_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

unsigned char to_byte(double v, double lo, double hi) {
  const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
  return static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
}

constexpr std::string_view kB64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::string base64_encode(std::span<const unsigned char> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    const std::size_t rem = std::min<std::size_t>(3, bytes.size() - i);
    std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
    if (rem > 1) v |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
    if (rem > 2) v |= bytes[i + 2];
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += rem > 1 ? kB64[(v >> 6) & 63] : '=';
    out += rem > 2 ? kB64[v & 63] : '=';
  }
  return out;
}

std::vector<unsigned char> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw DataError("base64: length is not a multiple of 4");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char ch = text[i + k];
      std::uint32_t d = 0;
      if (ch == '=') {
        ++pad;
      } else {
        const auto pos = kB64.find(ch);
        if (pos == std::string_view::npos || pad > 0) throw DataError("base64: invalid character");
        d = static_cast<std::uint32_t>(pos);
      }
      v = (v << 6) | d;
    }
    if (pad > 2 || (pad > 0 && i + 4 != text.size())) throw DataError("base64: misplaced padding");
    out.push_back(static_cast<unsigned char>(v >> 16));
    if (pad < 2) out.push_back(static_cast<unsigned char>(v >> 8));
    if (pad < 1) out.push_back(static_cast<unsigned char>(v));
  }
  return out;
}

json filterbank_to_json(const FilterBank& bank) {
  const auto& s = bank.spec();
  json j = {{"format", "pscat-filterbank"},
            {"version", 1},
            {"J", s.J},
            {"L", s.L},
            {"n", s.n},
            {"parameterization", to_string(s.parameterization)},
            {"init", to_string(s.init)},
            {"seed", s.seed},
            {"params", params_array(bank.params())}};
  if (s.parameterization == Parameterization::equivariant) {
    j["equivariant"] = params_array(bank.equivariant().scales);
  }
  if (s.parameterization == Parameterization::pixelwise) {
    json px = json::array();
    for (const auto& f : bank.pixels()) {
      std::vector<unsigned char> buf;
      buf.reserve(f.size() * 16);
      for (const auto& v : f) {
        put_f64_le(buf, v.real());
        put_f64_le(buf, v.imag());
      }
      px.push_back(base64_encode(buf));
    }
    j["pixels"] = std::move(px);
  }
  return j;
}

FilterBank filterbank_from_json(const json& j) {
  try {
    FilterbankSpec s;
    s.J = j.at("J").get<int>();
    s.L = j.at("L").get<int>();
    s.n = j.at("n").get<int>();
    s.parameterization = parse_parameterization(j.at("parameterization").get<std::string>());
    s.init = parse_init_scheme(j.at("init").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    try {
      s.validate();
    } catch (const ConfigError& e) {
      throw DataError(std::string("filterbank file: ") + e.what());
    }
    auto params = params_list(j.value("params", json::array()));
    switch (s.parameterization) {
      case Parameterization::canonical:
        if (static_cast<int>(params.size()) != s.filter_count()) throw DataError("filterbank file: wrong filter count");
        return FilterBank(s, std::move(params));
      case Parameterization::equivariant: {
        EquivariantParams eq{params_list(j.at("equivariant"))};
        if (static_cast<int>(eq.scales.size()) != s.J) throw DataError("filterbank file: wrong scale count");
        return FilterBank(s, std::move(eq));
      }
      case Parameterization::pixelwise: {
        std::vector<ComplexField> pixels;
        for (const auto& enc : j.at("pixels")) {
          const auto bytes = base64_decode(enc.get<std::string>());
          if (bytes.size() != static_cast<std::size_t>(s.n) * s.n * 16) {
            throw DataError("filterbank file: pixel field has the wrong size");
          }
          ComplexField f(s.n);
          for (std::size_t k = 0; k < f.size(); ++k) f[k] = {get_f64_le(&bytes[16 * k]), get_f64_le(&bytes[16 * k + 8])};
          pixels.push_back(std::move(f));
        }
        if (static_cast<int>(pixels.size()) != s.filter_count()) throw DataError("filterbank file: wrong filter count");
        return FilterBank(s, std::move(pixels), std::move(params));
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("filterbank file: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("filterbank file: ") + e.what());
  }
  throw DataError("filterbank file: unknown parameterization");
}

void save_filterbank(const FilterBank& bank, const fs::path& path) {
  open_out(path) << filterbank_to_json(bank).dump(2) << '\n';
}

FilterBank load_filterbank(const fs::path& path) {
  try {
    return filterbank_from_json(parse_json(read_text(path), path));
  } catch (const DataError& e) {
    const std::string what = e.what();
    if (what.rfind(path.string(), 0) == 0) throw;
    throw DataError(path.string() + ": " + what);
  }
}

void save_tensor(const ScatteringOutput& out, const fs::path& path) {
  std::vector<unsigned char> buf;
  buf.reserve(out.data.size() * 8);
  for (double v : out.data) put_f64_le(buf, v);
  open_out(path, std::ios::binary).write(reinterpret_cast<const char*>(buf.data()),
                                         static_cast<std::streamsize>(buf.size()));
  json table = json::array();
  for (const auto& p : out.paths) {
    table.push_back({{"order", p.order}, {"j1", p.j1}, {"l1", p.l1}, {"j2", p.j2}, {"l2", p.l2}});
  }
  const json side = {{"format", "pscat-tensor"},
                     {"dtype", "float64"},
                     {"byte_order", "little"},
                     {"shape", {out.batch, out.channels, out.side, out.side}},
                     {"path_table", std::move(table)}};
  open_out(fs::path(path.string() + ".json")) << side.dump(2) << '\n';
}

ScatteringOutput load_tensor(const fs::path& path) {
  const fs::path side_path(path.string() + ".json");
  const json side = parse_json(read_text(side_path), side_path);
  try {
    const auto shape = side.at("shape").get<std::vector<int>>();
    if (shape.size() != 4 || shape[2] != shape[3]) throw DataError(side_path.string() + ": bad shape");
    std::vector<PathEntry> paths;
    for (const auto& p : side.at("path_table")) {
      paths.push_back({p.at("order").get<int>(), p.at("j1").get<int>(), p.at("l1").get<int>(), p.at("j2").get<int>(),
                       p.at("l2").get<int>()});
    }
    if (static_cast<int>(paths.size()) != shape[1]) throw DataError(side_path.string() + ": path table size mismatch");
    ScatteringOutput out(shape[0], std::move(paths), shape[2]);
    const std::string raw = read_text(path);
    if (raw.size() != out.data.size() * 8) throw DataError(path.string() + ": size does not match the sidecar shape");
    const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
    for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] = get_f64_le(bytes + 8 * k);
    return out;
  } catch (const json::exception& e) {
    throw DataError(side_path.string() + ": " + e.what());
  }
}

json epoch_to_json(const EpochRecord& r) {
  json j = {{"epoch", r.epoch},
            {"lr", r.lr},
            {"lr_scattering", r.lr_scattering},
            {"train_loss", r.train_loss},
            {"train_acc", r.train_acc}};
  if (r.test_acc) j["test_acc"] = *r.test_acc;
  j["params"] = params_array(r.params);
  return j;
}

void save_runlog(const RunLog& log, const fs::path& path) {
  auto out = open_out(path);
  out << log.header.dump() << '\n';
  for (const auto& r : log.epochs) out << epoch_to_json(r).dump() << '\n';
}

RunLog load_runlog(const fs::path& path) {
  std::istringstream in(read_text(path));
  RunLog log;
  std::string line;
  int lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (lineno == 1) {
        log.header = j;
        continue;
      }
      EpochRecord r;
      r.epoch = j.at("epoch").get<int>();
      r.lr = j.at("lr").get<double>();
      r.lr_scattering = j.value("lr_scattering", 0.0);
      r.train_loss = j.at("train_loss").get<double>();
      r.train_acc = j.at("train_acc").get<double>();
      if (j.contains("test_acc")) r.test_acc = j["test_acc"].get<double>();
      r.params = params_list(j.at("params"));
      log.epochs.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
  }
  if (lineno == 0) throw DataError(path.string() + ": empty run log");
  return log;
}

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void save_stability_csv(const fs::path& path, DeformKind kind, std::span<const double> strengths,
                        std::span<const double> distances, bool append) {
  const bool header = !append || !fs::exists(path);
  auto out = open_out(path, append ? std::ios::app : std::ios::out);
  if (header) out << "kind,strength,normalized_distance\n";
  for (std::size_t i = 0; i < strengths.size(); ++i) {
    out << to_string(kind) << ',' << num(strengths[i]) << ',' << num(distances[i]) << '\n';
  }
}

void save_trajectory_csv(const fs::path& path, std::span<const double> distances) {
  auto out = open_out(path);
  out << "epoch,distance\n";
  for (std::size_t e = 0; e < distances.size(); ++e) out << e << ',' << num(distances[e]) << '\n';
}

void save_params_csv(const fs::path& path, const FilterBank& bank) {
  auto out = open_out(path);
  out << "index,scale,orientation,sigma,theta,xi,gamma,beta_re,beta_im\n";
  const auto ps = bank.params();
  for (int i = 0; i < bank.size(); ++i) {
    out << i << ',' << bank.scale_of(i) << ',' << bank.orientation_of(i);
    if (static_cast<std::size_t>(i) < ps.size()) {
      out << ',' << num(ps[i].sigma) << ',' << num(ps[i].theta) << ',' << num(ps[i].xi) << ',' << num(ps[i].gamma);
    } else {
      out << ",,,,";
    }
    out << ',' << num(bank.beta(i).real()) << ',' << num(bank.beta(i).imag()) << '\n';
  }
}

namespace {

std::vector<RealField> read_pgm(const std::string& raw, const fs::path& path) {
  std::istringstream in(raw);
  std::string magic;
  in >> magic;
  auto next_int = [&]() {
    int v = 0;
    while (in >> std::ws && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
    }
    if (!(in >> v)) throw DataError(path.string() + ": malformed PGM header");
    return v;
  };
  const int w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw DataError(path.string() + ": bad PGM dimensions");
  if (w != h) throw DataError(path.string() + ": images must be square, got " + std::to_string(w) + "x" + std::to_string(h));
  RealField x(w);
  if (magic == "P2") {
    for (auto& v : x) v = static_cast<double>(next_int()) / maxval;
  } else if (magic == "P5") {
    in.get();
    const int bytes = maxval > 255 ? 2 : 1;
    for (auto& v : x) {
      int value = in.get();
      if (bytes == 2) value = (value << 8) | in.get();
      if (!in) throw DataError(path.string() + ": truncated PGM data");
      v = static_cast<double>(value) / maxval;
    }
  } else {
    throw DataError(path.string() + ": not a PGM file");
  }
  return {std::move(x)};
}

std::vector<RealField> read_png_file(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw DataError(path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError(path.string() + ": " + image.message);
  }
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  if (w != h) throw DataError(path.string() + ": images must be square, got " + std::to_string(w) + "x" + std::to_string(h));
  const int planes = color ? 3 : 1;
  std::vector<RealField> out(planes, RealField(w));
  for (std::size_t k = 0; k < static_cast<std::size_t>(w) * h; ++k) {
    for (int p = 0; p < planes; ++p) out[p][k] = buf[k * planes + p] / 255.0;
  }
  return out;
}

}  // namespace

std::vector<RealField> read_image(const fs::path& path) {
  const std::string raw = read_text(path);
  if (raw.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(raw.data()), 0, 8) == 0) {
    return read_png_file(path);
  }
  if (raw.size() >= 2 && raw[0] == 'P' && (raw[1] == '2' || raw[1] == '5')) return read_pgm(raw, path);
  throw DataError(path.string() + ": unsupported image format (expected PGM or PNG)");
}

void write_pgm(const fs::path& path, const RealField& x, double lo, double hi) {
  auto out = open_out(path, std::ios::binary);
  out << "P5\n" << x.n() << ' ' << x.n() << "\n255\n";
  for (double v : x) out.put(static_cast<char>(to_byte(v, lo, hi)));
}

void write_png(const fs::path& path, const RealField& x, double lo, double hi) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::vector<unsigned char> buf(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) buf[k] = to_byte(x[k], lo, hi);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(x.n());
  image.height = static_cast<png_uint_32>(x.n());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    throw DataError(path.string() + ": " + image.message);
  }
}

Dataset load_image_directory(const fs::path& root, ColorPolicy policy) {
  if (!fs::is_directory(root)) throw DataError(root.string() + " is not a directory");
  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) class_dirs.push_back(e.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.size() < 2) throw DataError(root.string() + ": need at least two class sub-directories");

  std::vector<std::pair<std::vector<RealField>, int>> samples;
  bool any_color = false;
  for (std::size_t c = 0; c < class_dirs.size(); ++c) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(class_dirs[c])) {
      const auto ext = e.path().extension().string();
      if (e.is_regular_file() && (ext == ".pgm" || ext == ".png")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto planes = read_image(f);
      any_color = any_color || planes.size() == 3;
      samples.emplace_back(std::move(planes), static_cast<int>(c));
    }
  }
  Dataset ds;
  ds.classes = static_cast<int>(class_dirs.size());
  ds.source = "image-directory";
  ds.planes = any_color && policy == ColorPolicy::per_channel ? 3 : 1;
  for (auto& [planes, label] : samples) {
    if (ds.planes == 3 && planes.size() == 1) {
      for (int p = 0; p < 3; ++p) ds.images.push_back(planes[0]);
    } else if (ds.planes == 1 && planes.size() == 3) {
      RealField y(planes[0].n());
      for (std::size_t k = 0; k < y.size(); ++k) y[k] = 0.299 * planes[0][k] + 0.587 * planes[1][k] + 0.114 * planes[2][k];
      ds.images.push_back(std::move(y));
    } else {
      for (auto& p : planes) ds.images.push_back(std::move(p));
    }
    ds.labels.push_back(label);
  }
  ds.validate();
  return ds;
}

}  // namespace pscat
