// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "config_file.hpp"
#include "manifest.hpp"
#include "pscat/analysis.hpp"
#include "pscat/autograd.hpp"
#include "pscat/errors.hpp"
#include "pscat/io.hpp"
#include "pscat/rng.hpp"
#include "pscat/version.hpp"

namespace pscat::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string> kAllKinds{"rotation", "scale", "shear", "translation", "custom1", "custom2"};

// One subcommand. Every option is also accepted as a key of the --config file;
// values given on the command line win.
class Command {
 public:
  Command(CLI::App& app, const std::string& name, const std::string& help) : sub_(app.add_subcommand(name, help)) {
    sub_->add_option("--config", config_path_, "flat 'key = value' file; keys are the option names below");
    add("threads", threads, "worker threads; 1 gives bitwise reproducible output")->check(CLI::PositiveNumber);
    add("manifest", manifest, "run manifest path (default: next to the primary output)");
  }
  Command(const Command&) = delete;
  Command& operator=(const Command&) = delete;

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    getters_.emplace_back(name, [&var] { return json(var); });
    return sub_->add_option("--" + name, var, help)->capture_default_str();
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    getters_.emplace_back(name, [&var] { return json(var); });
    return sub_->add_flag("--" + name, var, help);
  }

  [[nodiscard]] bool selected() const { return sub_->parsed(); }
  [[nodiscard]] std::string name() const { return sub_->get_name(); }

  void apply_config() const {
    if (config_path_.empty()) return;
    for (const auto& e : read_config_file(config_path_)) {
      const std::string where = config_path_ + ":" + std::to_string(e.line) + ": ";
      if (e.key == "config") throw ConfigError(where + "'config' cannot be set from a config file");
      auto* opt = sub_->get_option_no_throw("--" + e.key);
      if (opt == nullptr) throw ConfigError(where + "unknown key '" + e.key + "' for command '" + name() + "'");
      if (opt->count() > 0) continue;
      try {
        opt->add_result(e.value);
        opt->run_callback();
      } catch (const CLI::Error& err) {
        throw ConfigError(where + "key '" + e.key + "': " + err.what());
      }
    }
  }

  [[nodiscard]] json resolved() const {
    json j = json::object();
    for (const auto& [name, get] : getters_) j[name] = get();
    return j;
  }

  int threads = 1;
  std::string manifest;

 private:
  CLI::App* sub_;
  std::string config_path_;
  std::vector<std::pair<std::string, std::function<json()>>> getters_;
};

struct BankOptions {
  int j = 2;
  int l = 8;
  int n = 32;
  std::string parameterization = "canonical";
  std::string init = "tight-frame";
  std::uint64_t seed = 0;

  void bind(Command& c) {
    c.add("j", j, "number of scales J");
    c.add("l", l, "number of orientations L");
    c.add("n", n, "image side; must be even and divisible by 2^J");
    c.add("parameterization", parameterization, "canonical | equivariant | pixelwise");
    c.add("init", init, "tight-frame | random");
    c.add("seed", seed, "random seed");
  }

  [[nodiscard]] FilterbankSpec spec() const {
    FilterbankSpec s;
    s.J = j;
    s.L = l;
    s.n = n;
    s.parameterization = parse_parameterization(parameterization);
    s.init = parse_init_scheme(init);
    s.seed = seed;
    s.validate();
    return s;
  }
};

ColorPolicy parse_color(const std::string& s) {
  if (s == "per-channel" || s == "per_channel") return ColorPolicy::per_channel;
  if (s == "luminance") return ColorPolicy::luminance;
  throw ConfigError("unknown color policy '" + s + "' (expected per-channel or luminance)");
}

Fill parse_fill(const std::string& s) {
  if (s == "zero") return Fill::zero;
  if (s == "circular") return Fill::circular;
  throw ConfigError("unknown fill '" + s + "' (expected zero or circular)");
}

void require(const std::string& value, const std::string& key) {
  if (value.empty()) throw ConfigError("missing required option --" + key);
}

RealField luminance(const std::vector<RealField>& planes) {
  if (planes.size() == 1) return planes[0];
  RealField y(planes[0].n());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = 0.299 * planes[0][k] + 0.587 * planes[1][k] + 0.114 * planes[2][k];
  return y;
}

// Bilinear resampling onto an n x n grid, pixel centres aligned.
RealField resample(const RealField& x, int n) {
  const int m = x.n();
  RealField out(n);
  const double s = static_cast<double>(m) / n;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double sr = std::clamp((r + 0.5) * s - 0.5, 0.0, m - 1.0);
      const double sc = std::clamp((c + 0.5) * s - 0.5, 0.0, m - 1.0);
      const int r0 = static_cast<int>(sr), c0 = static_cast<int>(sc);
      const int r1 = std::min(r0 + 1, m - 1), c1 = std::min(c0 + 1, m - 1);
      const double fr = sr - r0, fc = sc - c0;
      out(r, c) = (1 - fr) * ((1 - fc) * x(r0, c0) + fc * x(r0, c1)) + fr * ((1 - fc) * x(r1, c0) + fc * x(r1, c1));
    }
  }
  return out;
}

// Zero offset moved to the centre pixel (n/2, n/2).
template <class F>
RealField centred(int n, F&& value) {
  RealField out(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(r, c) = value((r + n / 2) % n, (c + n / 2) % n);
  return out;
}

// Two anisotropic Gaussian bumps; smooth enough that bilinear warps are accurate.
RealField smooth_test_image(int n) {
  RealField x(n);
  const double c = (n - 1) / 2.0, s = n / 32.0;
  for (int r = 0; r < n; ++r) {
    for (int q = 0; q < n; ++q) {
      const double a = (r - c - 2.0 * s) / (5.0 * s), b = (q - c + s) / (3.0 * s);
      const double d = ((r - c + 4.0 * s) * (r - c + 4.0 * s) + (q - c - 5.0 * s) * (q - c - 5.0 * s)) / (6.0 * s * s);
      x(r, q) = std::exp(-0.5 * (a * a + b * b)) + 0.5 * std::exp(-0.5 * d);
    }
  }
  return x;
}

fs::path default_manifest(const Command& c, const fs::path& out, bool directory) {
  if (!c.manifest.empty()) return c.manifest;
  return directory ? out / "manifest.json" : fs::path(out.string() + ".manifest.json");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

class Cli {
 public:
  Cli() : app_("pscat: parametric scattering networks with learnable Morlet filters") {
    app_.require_subcommand(1);
    app_.set_version_flag("--version", std::string(kVersion));
    app_.footer("Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical divergence.");

    init_.add("out", init_out_, "filterbank JSON to write");
    init_bank_.bind(init_);

    show_.add("bank", show_bank_, "filterbank JSON");
    show_.add("out", show_out_, "output directory");
    show_.add("format", show_format_, "pgm | png")->check(CLI::IsMember({"pgm", "png"}));

    transform_.add("bank", transform_bank_, "filterbank JSON");
    transform_.add("input", transform_inputs_, "input images (PGM or PNG); every channel becomes one batch item")
        ->delimiter(',');
    transform_.add("out", transform_out_, "tensor file; the sidecar goes to <out>.json");
    transform_.add("color", transform_color_, "RGB handling: per-channel | luminance");
    transform_.flag("resize", transform_resize_, "resample inputs to the bank size instead of failing");

    train_bank_.bind(train_);
    train_.add("bank", train_bank_file_, "start from this filterbank instead of --j/--l/--n/--init");
    train_.add("data", train_data_, "synthetic | cifar10 | images");
    train_.add("train-path", train_paths_, "cifar10: batch files; images: one class directory tree")->delimiter(',');
    train_.add("test-path", test_paths_, "held-out data in the same format")->delimiter(',');
    train_.add("classes", train_classes_, "synthetic: class count");
    train_.add("per-class", train_per_class_, "synthetic: training samples per class");
    train_.add("test-per-class", test_per_class_, "synthetic: test samples per class (0 disables testing)");
    train_.add("noise", train_noise_, "synthetic: additive noise standard deviation");
    train_.add("limit", train_limit_, "cifar10: read at most this many records per split (0 = all)");
    train_.add("color", train_color_, "RGB handling: per-channel | luminance");
    train_.add("subsample", train_subsample_, "train on a class-balanced random subset of this size (0 = all)");
    train_.add("epochs", train_cfg_.epochs, "epochs");
    train_.add("batch-size", train_cfg_.batch_size, "minibatch size for sets above 1024 samples");
    train_.add("lr-scattering", train_cfg_.max_lr_scattering, "peak learning rate of the filter parameters");
    train_.add("lr-head", train_cfg_.max_lr_head, "peak learning rate of batch norm and the linear head");
    train_.add("momentum", train_cfg_.momentum, "SGD momentum");
    train_.add("weight-decay", train_cfg_.weight_decay, "weight decay of the linear head");
    train_.add("eval-every", train_cfg_.eval_every, "test accuracy every k epochs (0 = last epoch only)");
    train_.flag("fixed", train_fixed_, "keep the filters frozen");
    train_.add("out", train_out_, "output directory");

    stab_.add("bank", stab_bank_, "filterbank JSON");
    stab_.add("image", stab_image_, "reference image (default: a smooth synthetic image)");
    stab_.add("kinds", stab_kinds_, "deformations: rotation, scale, shear, translation, custom1, custom2")
        ->delimiter(',');
    stab_.add("steps", stab_steps_, "strengths per kind, evenly spaced from identity to the maximum")
        ->check(CLI::Range(2, 1000));
    stab_.add("fill", stab_fill_, "out-of-image samples: zero | circular");
    stab_.add("out", stab_out_, "CSV output");

    dist_.add("a", dist_a_, "filterbank JSON (the reference for --runlog)");
    dist_.add("b", dist_b_, "second filterbank JSON");
    dist_.add("runlog", dist_runlog_, "run log; writes the per-epoch distance to --a as CSV");
    dist_.add("out", dist_out_, "JSON match (two banks) or CSV trajectory (--runlog)");

    bench_bank_.j = 2;
    bench_bank_.l = 8;
    bench_bank_.n = 32;
    bench_bank_.bind(bench_);
    bench_.add("batch", bench_batch_, "images per batch")->check(CLI::PositiveNumber);
    bench_.add("repeats", bench_repeats_, "timed batches per mode")->check(CLI::PositiveNumber);
    bench_.add("out", bench_out_, "JSON report");
  }

  int run(int argc, const char* const* argv) {
    try {
      app_.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app_.exit(e) == 0 ? kExitOk : kExitConfig;
    }
    const std::vector<std::pair<Command*, void (Cli::*)()>> table{
        {&init_, &Cli::cmd_init},       {&show_, &Cli::cmd_show_filters}, {&transform_, &Cli::cmd_transform},
        {&train_, &Cli::cmd_train},     {&stab_, &Cli::cmd_stability},    {&dist_, &Cli::cmd_distance},
        {&bench_, &Cli::cmd_bench}};
    for (const auto& [cmd, fn] : table) {
      if (cmd->selected()) return execute(*cmd, fn);
    }
    return kExitConfig;
  }

 private:
  int execute(Command& cmd, void (Cli::*fn)()) {
    current_ = &cmd;
    auto fail = [&](const char* kind, const std::string& msg, int code) {
      std::cerr << "pscat " << cmd.name() << ": " << msg << '\n';
      if (manifest_) {
        try {
          manifest_->fail(kind, msg, code);
        } catch (const std::exception& e) {
          std::cerr << "pscat: could not update the manifest: " << e.what() << '\n';
        }
      }
      return code;
    };
    try {
      cmd.apply_config();
      (this->*fn)();
      if (manifest_) manifest_->succeed();
      return kExitOk;
    } catch (const ConfigError& e) {
      return fail("config", e.what(), kExitConfig);
    } catch (const StrengthOutOfRange& e) {
      return fail("config", e.what(), kExitConfig);
    } catch (const NumericalDivergence& e) {
      return fail("divergence", e.what(), kExitDivergence);
    } catch (const Error& e) {
      return fail("data", e.what(), kExitData);
    } catch (const fs::filesystem_error& e) {
      return fail("data", e.what(), kExitData);
    } catch (const std::exception& e) {
      return fail("internal", e.what(), kExitInternal);
    }
  }

  Manifest& open_manifest(const fs::path& path, std::uint64_t seed) {
    manifest_.emplace(path, current_->name(), current_->resolved(), seed, current_->threads);
    return *manifest_;
  }

  void cmd_init() {
    const auto spec = init_bank_.spec();
    auto& m = open_manifest(default_manifest(init_, init_out_, false), spec.seed);
    const FilterBank bank(spec);
    save_filterbank(bank, init_out_);
    m.add_output(init_out_);

    std::printf("%5s %3s %3s %12s %12s %12s %12s\n", "index", "j", "l", "sigma", "theta", "xi", "gamma");
    const auto ps = bank.params();
    for (int i = 0; i < bank.size(); ++i) {
      std::printf("%5d %3d %3d %12.6f %12.6f %12.6f %12.6f\n", i, bank.scale_of(i), bank.orientation_of(i),
                  ps[i].sigma, ps[i].theta, ps[i].xi, ps[i].gamma);
    }
  }

  void cmd_show_filters() {
    require(show_bank_, "bank");
    const fs::path out(show_out_);
    auto& m = open_manifest(default_manifest(show_, out, true), 0);
    const auto bank = load_filterbank(show_bank_);
    const int n = bank.n();
    const auto write = [&](const std::string& stem, const RealField& img, double lo, double hi) {
      const fs::path p = out / (stem + "." + show_format_);
      if (show_format_ == "png") {
        write_png(p, img, lo, hi);
      } else {
        write_pgm(p, img, lo, hi);
      }
      m.add_output(p);
    };
    for (int i = 0; i < bank.size(); ++i) {
      const auto& psi = bank.filter_spatial(i);
      const auto& hat = bank.filter_hat(i, 0);
      const RealField re = centred(n, [&](int r, int c) { return psi(r, c).real(); });
      const RealField mag = centred(n, [&](int r, int c) { return std::abs(hat(r, c)); });
      double peak = 0.0, top = 0.0;
      for (double v : re) peak = std::max(peak, std::abs(v));
      for (double v : mag) top = std::max(top, v);
      char stem[32];
      std::snprintf(stem, sizeof stem, "psi_%03d", i);
      write(std::string(stem) + "_real", re, -peak, peak);
      write(std::string(stem) + "_fourier", mag, 0.0, top);
    }
    const auto& phi = bank.lowpass_spatial();
    const RealField lp = centred(n, [&](int r, int c) { return phi(r, c); });
    double top = 0.0;
    for (double v : lp) top = std::max(top, std::abs(v));
    write("phi_real", lp, -top, top);
    save_params_csv(out / "params.csv", bank);
    m.add_output(out / "params.csv");
    std::printf("wrote %d filters to %s\n", bank.size(), out.string().c_str());
  }

  void cmd_transform() {
    require(transform_bank_, "bank");
    if (transform_inputs_.empty()) throw ConfigError("missing required option --input");
    const auto policy = parse_color(transform_color_);
    auto& m = open_manifest(default_manifest(transform_, transform_out_, false), 0);
    const auto bank = load_filterbank(transform_bank_);
    std::vector<RealField> batch;
    for (const auto& path : transform_inputs_) {
      auto planes = read_image(path);
      if (policy == ColorPolicy::luminance) planes = {luminance(planes)};
      for (auto& p : planes) {
        if (p.n() != bank.n()) {
          if (!transform_resize_) {
            throw ShapeMismatch(path + ": image is " + std::to_string(p.n()) + "x" + std::to_string(p.n()) +
                                ", the bank expects " + std::to_string(bank.n()) + "x" + std::to_string(bank.n()) +
                                " (use --resize)");
          }
          p = resample(p, bank.n());
        }
        batch.push_back(std::move(p));
      }
    }
    const auto out = forward(batch, bank, nullptr, transform_.threads);
    save_tensor(out, transform_out_);
    m.add_output(transform_out_);
    m.add_output(transform_out_ + ".json");
    std::printf("wrote %d x %d x %d x %d tensor to %s\n", out.batch, out.channels, out.side, out.side,
                transform_out_.c_str());
  }

  std::pair<Dataset, std::optional<Dataset>> load_training_data(int n, std::uint64_t seed) const {
    const auto policy = parse_color(train_color_);
    if (train_data_ == "synthetic") {
      Dataset tr = synth_textures(train_classes_, train_per_class_, n, 1000 + seed, train_noise_);
      if (test_per_class_ <= 0) return {std::move(tr), std::nullopt};
      return {std::move(tr), synth_textures(train_classes_, test_per_class_, n, 2000 + seed, train_noise_)};
    }
    if (train_paths_.empty()) throw ConfigError("--data " + train_data_ + " needs --train-path");
    if (train_data_ == "cifar10") {
      Dataset tr = read_cifar10(train_paths_, policy, train_limit_);
      if (test_paths_.empty()) return {std::move(tr), std::nullopt};
      return {std::move(tr), read_cifar10(test_paths_, policy, train_limit_)};
    }
    if (train_data_ == "images") {
      if (train_paths_.size() != 1 || test_paths_.size() > 1) {
        throw ConfigError("--data images takes one directory per split");
      }
      Dataset tr = load_image_directory(train_paths_[0], policy);
      if (test_paths_.empty()) return {std::move(tr), std::nullopt};
      return {std::move(tr), load_image_directory(test_paths_[0], policy)};
    }
    throw ConfigError("unknown --data '" + train_data_ + "' (expected synthetic, cifar10 or images)");
  }

  void cmd_train() {
    TrainConfig cfg = train_cfg_;
    std::optional<FilterBank> start;
    if (train_bank_file_.empty()) {
      cfg.bank = train_bank_.spec();
    } else {
      start = load_filterbank(train_bank_file_);
      cfg.bank = start->spec();
    }
    cfg.seed = train_bank_.seed;
    cfg.bank.seed = cfg.seed;
    cfg.learnable = !train_fixed_;
    cfg.subsample_size = train_subsample_;
    cfg.threads = train_.threads;
    cfg.validate();
    parse_color(train_color_);

    const fs::path out(train_out_);
    auto& m = open_manifest(default_manifest(train_, out, true), cfg.seed);
    auto [train_set, test_set] = load_training_data(cfg.bank.n, cfg.seed);
    if (test_set && (test_set->classes != train_set.classes || test_set->planes != train_set.planes)) {
      throw DataError("training and test data disagree in classes or channels");
    }

    Model model = make_model(cfg, train_set.classes, train_set.planes);
    if (start) model.bank = *start;
    save_filterbank(model.bank, out / "bank_initial.json");
    m.add_output(out / "bank_initial.json");

    auto result = train(std::move(model), train_set, test_set ? &*test_set : nullptr, cfg);
    result.log.header["data"] = train_data_;
    result.log.header["color_policy"] = train_color_;
    if (train_data_ == "synthetic") {
      result.log.header["synthetic"] = {{"classes", train_classes_},
                                        {"per_class", train_per_class_},
                                        {"test_per_class", test_per_class_},
                                        {"noise", train_noise_},
                                        {"train_seed", 1000 + cfg.seed},
                                        {"test_seed", 2000 + cfg.seed}};
    }
    save_runlog(result.log, out / "runlog.jsonl");
    m.add_output(out / "runlog.jsonl");
    save_filterbank(result.model.bank, out / "bank.json");
    m.add_output(out / "bank.json");
    if (!result.log.epochs.front().params.empty()) {
      save_trajectory_csv(out / "trajectory.csv",
                          distance_trajectory(result.log, result.log.epochs.front().params));
      m.add_output(out / "trajectory.csv");
    }

    const auto& last = result.log.epochs.back();
    json summary = {{"epochs", cfg.epochs},
                    {"train_loss", last.train_loss},
                    {"train_accuracy", last.train_acc},
                    {"train_samples", train_set.size()}};
    if (last.test_acc) summary["test_accuracy"] = *last.test_acc;
    std::ofstream(out / "summary.json") << summary.dump(2) << '\n';
    m.add_output(out / "summary.json");
    std::printf("epoch %d: train loss %.6f, train accuracy %.4f", last.epoch, last.train_loss, last.train_acc);
    if (last.test_acc) std::printf(", test accuracy %.4f", *last.test_acc);
    std::printf("\n");
  }

  void cmd_stability() {
    require(stab_bank_, "bank");
    const Fill fill = parse_fill(stab_fill_);
    std::vector<DeformKind> kinds;
    for (const auto& k : stab_kinds_) kinds.push_back(parse_deform_kind(k));
    auto& m = open_manifest(default_manifest(stab_, stab_out_, false), 0);
    m.set("deformation_conventions",
          {{"centre", "(n - 1) / 2"},
           {"rotation", "degrees"},
           {"shear", "degrees, rows displaced in proportion to the column offset"},
           {"translation", "pixels along the column axis"},
           {"custom", "displacement evaluated on coordinates normalized to [-1, 1], scaled by (n - 1) / 2"},
           {"fill", stab_fill_}});
    const auto bank = load_filterbank(stab_bank_);
    const RealField x = stab_image_.empty() ? smooth_test_image(bank.n()) : luminance(read_image(stab_image_));
    if (x.n() != bank.n()) throw ShapeMismatch(stab_image_ + ": image size does not match the bank");
    bool append = false;
    for (auto kind : kinds) {
      const double lo = deform_min_strength(kind), hi = deform_max_strength(kind);
      std::vector<double> strengths;
      for (int i = 0; i < stab_steps_; ++i) {
        strengths.push_back(i == stab_steps_ - 1 ? hi : lo + (hi - lo) * i / (stab_steps_ - 1));
      }
      const auto curve = stability_curve(bank, x, kind, strengths, fill, stab_.threads);
      save_stability_csv(stab_out_, kind, strengths, curve, append);
      append = true;
      std::printf("%-12s max strength %6.3f: normalized distance %.6f\n", to_string(kind).c_str(), hi, curve.back());
    }
    m.add_output(stab_out_);
  }

  static std::vector<MorletParams> morlet_params(const FilterBank& bank, const std::string& path) {
    const auto ps = bank.params();
    if (ps.empty()) throw DataError(path + ": bank carries no Morlet parameters");
    return {ps.begin(), ps.end()};
  }

  void cmd_distance() {
    require(dist_a_, "a");
    if (dist_runlog_.empty()) require(dist_b_, "b");
    auto& m = open_manifest(default_manifest(dist_, dist_out_, false), 0);
    const auto a = morlet_params(load_filterbank(dist_a_), dist_a_);
    if (!dist_runlog_.empty()) {
      const auto series = distance_trajectory(load_runlog(dist_runlog_), a);
      save_trajectory_csv(dist_out_, series);
      m.add_output(dist_out_);
      std::printf("final distance %.6f after %zu epochs\n", series.back(), series.size() - 1);
      return;
    }
    const auto b = morlet_params(load_filterbank(dist_b_), dist_b_);
    const auto match = filterbank_distance(a, b);
    json pairs = json::array();
    for (std::size_t i = 0; i < match.pairs.size(); ++i) {
      pairs.push_back({{"a", match.pairs[i].first}, {"b", match.pairs[i].second}, {"cost", match.costs[i]}});
    }
    const json report = {{"total", match.total}, {"pairs", std::move(pairs)}};
    if (fs::path(dist_out_).has_parent_path()) fs::create_directories(fs::path(dist_out_).parent_path());
    std::ofstream(dist_out_) << report.dump(2) << '\n';
    m.add_output(dist_out_);
    std::printf("distance %.12g\n", match.total);
  }

  void cmd_bench() {
    const auto spec = bench_bank_.spec();
    auto& m = open_manifest(default_manifest(bench_, bench_out_, false), spec.seed);
    FilterBank bank(spec);
    Rng rng(spec.seed, 0xbe0c);
    std::vector<RealField> batch(bench_batch_, RealField(spec.n));
    for (auto& x : batch)
      for (auto& v : x) v = rng.normal();
    const int threads = bench_.threads;

    double forward_sum = 0.0;
    (void)forward(batch, bank, nullptr, threads);
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < bench_repeats_; ++r) {
      const auto out = forward(batch, bank, nullptr, threads);
      for (double v : out.data) forward_sum += v;
    }
    const double fixed_s = seconds_since(t0);

    double grad_sum = 0.0;
    t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < bench_repeats_; ++r) {
      bank.set_flat(bank.flat());
      bank.realize();
      Tape tape;
      auto out = forward(batch, bank, &tape, threads);
      for (auto& v : out.data) v = 1.0;
      const auto grads = scattering_backward(tape, bank, out, false, threads);
      for (double g : param_chain(grads.filter_hat, bank).flat()) grad_sum += g;
    }
    const double learnable_s = seconds_since(t0);

    const double images = static_cast<double>(bench_batch_) * bench_repeats_;
    const double fixed_ips = images / fixed_s, learnable_ips = images / learnable_s;
    const json report = {{"J", spec.J},
                         {"L", spec.L},
                         {"n", spec.n},
                         {"parameterization", to_string(spec.parameterization)},
                         {"batch", bench_batch_},
                         {"repeats", bench_repeats_},
                         {"checksum", {{"forward_sum", forward_sum}, {"gradient_sum", grad_sum}}},
                         {"timing",
                          {{"fixed_forward_images_per_sec", fixed_ips},
                           {"learnable_forward_backward_images_per_sec", learnable_ips},
                           {"ratio", fixed_ips / learnable_ips}}}};
    if (fs::path(bench_out_).has_parent_path()) fs::create_directories(fs::path(bench_out_).parent_path());
    std::ofstream(bench_out_) << report.dump(2) << '\n';
    m.add_output(bench_out_);
    std::printf("fixed forward:                 %10.1f images/s\n", fixed_ips);
    std::printf("learnable forward + backward:  %10.1f images/s\n", learnable_ips);
    std::printf("ratio fixed / learnable:       %10.2f\n", fixed_ips / learnable_ips);
  }

  CLI::App app_;
  Command init_{app_, "init", "write an initialized filterbank"};
  Command show_{app_, "show-filters", "render filters as images (zero offset at the centre) plus a parameter table"};
  Command transform_{app_, "transform", "scattering transform of images into a tensor file"};
  Command train_{app_, "train", "train scattering + batch norm + linear head"};
  Command stab_{app_, "stability", "normalized scattering distance under deformations of growing strength"};
  Command dist_{app_, "distance", "matched Morlet-parameter distance between filterbanks or along a run"};
  Command bench_{app_, "bench", "throughput of fixed vs learnable scattering"};

  Command* current_ = nullptr;
  std::optional<Manifest> manifest_;

  BankOptions init_bank_;
  std::string init_out_ = "filterbank.json";

  std::string show_bank_, show_out_ = "filters", show_format_ = "pgm";

  std::string transform_bank_, transform_out_ = "scattering.bin", transform_color_ = "per-channel";
  std::vector<std::string> transform_inputs_;
  bool transform_resize_ = false;

  BankOptions train_bank_;
  std::string train_bank_file_, train_data_ = "synthetic", train_color_ = "per-channel", train_out_ = "run";
  std::vector<std::string> train_paths_, test_paths_;
  int train_classes_ = 4, train_per_class_ = 50, test_per_class_ = 250;
  double train_noise_ = 2.0;
  std::size_t train_limit_ = 0, train_subsample_ = 0;
  bool train_fixed_ = false;
  TrainConfig train_cfg_;

  std::string stab_bank_, stab_image_, stab_fill_ = "zero", stab_out_ = "stability.csv";
  std::vector<std::string> stab_kinds_ = kAllKinds;
  int stab_steps_ = 11;

  std::string dist_a_, dist_b_, dist_runlog_, dist_out_ = "distance.json";

  BankOptions bench_bank_;
  int bench_batch_ = 32, bench_repeats_ = 3;
  std::string bench_out_ = "bench.json";
};

}  // namespace

int run(int argc, const char* const* argv) {
  Cli cli;
  return cli.run(argc, argv);
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"pscat"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace pscat::cli
