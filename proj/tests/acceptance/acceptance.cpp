// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

// Release acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. `--only 3,7` runs a subset.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "manifest.hpp"
#include "oracles/finite_diff.hpp"
#include "oracles/spatial_oracle.hpp"
#include "pscat/analysis.hpp"
#include "pscat/deform.hpp"
#include "pscat/io.hpp"
#include "pscat/morlet.hpp"
#include "pscat/rng.hpp"
#include "pscat/scattering.hpp"
#include "pscat/spectral.hpp"
#include "pscat/training.hpp"

#ifndef PSCAT_CLI_PATH
#error "PSCAT_CLI_PATH must name the pscat executable"
#endif

using namespace pscat;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Report {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) {
      out_.pass = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += s;
  }
  [[nodiscard]] Outcome outcome() const {
    Outcome o = out_;
    o.detail = notes_;
    if (!failures_.empty()) o.detail += (o.detail.empty() ? "" : " | ") + std::string("failed: ") + failures_;
    return o;
  }

 private:
  Outcome out_;
  std::string notes_, failures_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

RealField random_image(int n, Rng& rng) {
  RealField x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

ComplexField random_field(int n, Rng& rng) {
  ComplexField f(n);
  for (auto& v : f) v = {rng.normal(), rng.normal()};
  return f;
}

cplx inner(const ComplexField& a, const ComplexField& b) {
  cplx acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::conj(a[k]) * b[k];
  return acc;
}

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

RealField smooth_image(int n) {
  RealField x(n);
  const double c = (n - 1) / 2.0;
  for (int r = 0; r < n; ++r) {
    for (int q = 0; q < n; ++q) {
      const double a = (r - c - 2.0) / 5.0, b = (q - c + 1.0) / 3.0;
      const double d = ((r - c + 4.0) * (r - c + 4.0) + (q - c - 5.0) * (q - c - 5.0)) / 6.0;
      x(r, q) = std::exp(-0.5 * (a * a + b * b)) + 0.5 * std::exp(-0.5 * d);
    }
  }
  return x;
}

// Fourth-order central differences: truncation error stays below the 1e-4
// relative tolerance even for small gradient entries.
std::vector<double> numeric_gradient4(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    const double step = h * std::max(1.0, std::abs(x0));
    auto at = [&](double d) {
      x[i] = x0 + d;
      return f(x);
    };
    const double f1 = at(step), fm1 = at(-step), f2 = at(2 * step), fm2 = at(-2 * step);
    x[i] = x0;
    g[i] = (8.0 * (f1 - fm1) - (f2 - fm2)) / (12.0 * step);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Synthetic texture benchmark, shared by criteria 7, 8 and 9.

constexpr int kSeeds = 5;

struct Cell {
  bool learnable;
  InitScheme init;
  const char* name;
};

constexpr Cell kCells[] = {{true, InitScheme::tight_frame, "learnable-TF"},
                           {true, InitScheme::random, "learnable-random"},
                           {false, InitScheme::tight_frame, "fixed-TF"},
                           {false, InitScheme::random, "fixed-random"}};

TrainConfig benchmark_config(const Cell& c, int seed) {
  TrainConfig cfg;
  cfg.bank.J = 2;
  cfg.bank.L = 4;
  cfg.bank.n = 32;
  cfg.bank.init = c.init;
  cfg.epochs = 200;
  cfg.learnable = c.learnable;
  cfg.seed = static_cast<std::uint64_t>(seed);
  return cfg;
}

Dataset benchmark_train(int seed) { return synth_textures(4, 50, 32, 1000 + seed, 2.0); }
Dataset benchmark_test(int seed) { return synth_textures(4, 250, 32, 2000 + seed, 2.0); }

class BenchmarkRuns {
 public:
  const TrainResult& get(int cell, int seed) {
    const auto key = std::make_pair(cell, seed);
    auto it = runs_.find(key);
    if (it == runs_.end()) {
      const auto tr = benchmark_train(seed), te = benchmark_test(seed);
      it = runs_.emplace(key, train(tr, &te, benchmark_config(kCells[cell], seed))).first;
    }
    return it->second;
  }

 private:
  std::map<std::pair<int, int>, TrainResult> runs_;
};

BenchmarkRuns& runs() {
  static BenchmarkRuns r;
  return r;
}

// ---------------------------------------------------------------------------

Outcome gradient_fidelity() {
  Report rep;
  Rng rng(20260);
  const auto ds = synth_textures(3, 2, 16, 41, 0.5);
  double worst_rel = 0.0, worst_abs = 0.0;
  std::size_t checked = 0;
  for (int t = 0; t < 20; ++t) {
    TrainConfig cfg;
    cfg.bank.J = 1 + static_cast<int>(rng.below(2));
    cfg.bank.L = std::array{1, 2, 4}[rng.below(3)];
    cfg.bank.n = 16;
    cfg.bank.parameterization = static_cast<Parameterization>(t % 3);
    cfg.bank.init = rng.below(2) == 0 ? InitScheme::tight_frame : InitScheme::random;
    cfg.seed = 100 + static_cast<std::uint64_t>(t);
    Model model = make_model(cfg, ds.classes, ds.planes);
    const auto analytic = loss_and_grads(model, ds, true, 1).grads.bank;
    const auto numeric = numeric_gradient4(
        [&](const std::vector<double>& v) {
          Model m = model;
          m.bank.set_flat(v);
          m.bank.realize();
          return loss_and_grads(m, ds, false, 1).xent.loss;
        },
        model.bank.flat(), 1e-4);
    const auto c = oracle::compare_gradients(analytic, numeric, 1e-4, 1e-8, 1e-8);
    worst_rel = std::max(worst_rel, c.worst_rel);
    worst_abs = std::max(worst_abs, c.worst_abs);
    checked += analytic.size();
    rep.check(c.ok, "config " + std::to_string(t) + " (" + to_string(cfg.bank.parameterization) +
                        " J=" + std::to_string(cfg.bank.J) + " L=" + std::to_string(cfg.bank.L) +
                        ") rel " + fmt("%.2e", c.worst_rel) + " abs " + fmt("%.2e", c.worst_abs));
  }
  rep.note("20 configs, " + std::to_string(checked) + " gradient entries");
  rep.note("worst rel " + fmt("%.2e", worst_rel));
  rep.note("worst abs " + fmt("%.2e", worst_abs));
  return rep.outcome();
}

Outcome tight_frame_exactness() {
  Report rep;
  const auto ps = tight_frame_init(2, 8);
  rep.check(ps.size() == 16, "filter count");
  const double pi = std::numbers::pi;
  const double sigma[2] = {0.8, 1.6};
  const double xi[2] = {3.0 * pi / 4.0, 3.0 * pi / 8.0};
  for (int j = 0; j < 2; ++j) {
    for (int l = 0; l < 8; ++l) {
      const auto& p = ps[j * 8 + l];
      const std::string at = " at j=" + std::to_string(j) + " l=" + std::to_string(l);
      rep.check(p.sigma == sigma[j], "sigma" + at);
      rep.check(p.xi == xi[j], "xi" + at);
      rep.check(p.gamma == 0.5, "gamma" + at);
      rep.check(p.theta == l * pi / 8.0, "theta" + at);
    }
  }
  rep.note("sigma {0.8, 1.6}, xi {3pi/4, 3pi/8}, gamma 0.5, theta l*pi/8, bitwise");
  return rep.outcome();
}

Outcome channel_counts() {
  Report rep;
  const auto a = path_table(2, 8), b = path_table(4, 8);
  rep.check(a.size() == 81 && channel_count(2, 8) == 81, "J=2 L=8 gives " + std::to_string(a.size()));
  rep.check(b.size() == 417 && channel_count(4, 8) == 417, "J=4 L=8 gives " + std::to_string(b.size()));
  rep.note("(2,8) -> " + std::to_string(a.size()) + ", (4,8) -> " + std::to_string(b.size()));
  return rep.outcome();
}

Outcome oracle_equivalence() {
  Report rep;
  Rng rng(8);
  double worst = 0.0;
  for (auto init : {InitScheme::tight_frame, InitScheme::random}) {
    FilterbankSpec spec;
    spec.J = 1;
    spec.L = 2;
    spec.n = 8;
    spec.init = init;
    spec.seed = 5;
    const FilterBank fb(spec);
    std::vector<ComplexField> psi;
    for (const auto& p : fb.params()) psi.push_back(oracle::morlet(p, 8));
    for (int t = 0; t < 3; ++t) {
      const auto x = random_image(8, rng);
      const auto ref = oracle::scattering(x, psi, oracle::lowpass(1, 8), 1, 2);
      const std::vector<RealField> batch{x};
      const auto out = forward(batch, fb);
      rep.check(static_cast<int>(ref.size()) == out.channels, "channel count");
      for (int c = 0; c < out.channels; ++c)
        for (std::size_t k = 0; k < ref[c].size(); ++k) worst = std::max(worst, std::abs(out.map(0, c)[k] - ref[c][k]));
    }
  }
  rep.check(worst <= 1e-9, "forward vs oracle " + fmt("%.2e", worst));
  rep.note("forward max abs err " + fmt("%.2e", worst));

  double ident = 0.0;
  for (int n : {8, 16}) {
    const auto f_hat = random_field(n, rng);
    const auto f = ifft2(f_hat);
    const auto x = random_field(n, rng);
    const auto x_hat = fft2(x);
    for (int s = 2; s <= n / 2; s *= 2) {
      ident = std::max(ident, max_diff(ifft2(periodize(f_hat, s)), oracle::coarse_filter(f, s)));
      int level = 0;
      while ((1 << level) < s) ++level;
      ident = std::max(ident, max_diff(filter_subsample(x_hat, f_hat, s),
                                       oracle::every_nth(oracle::circular_conv(x, f), s)));
      ident = std::max(ident, max_diff(conv_fft(x, f_hat, level), oracle::every_nth(oracle::circular_conv(x, f), s)));
      const auto y = random_field(n / s, rng);
      ident = std::max(ident, std::abs(inner(periodize(x, s), y) - inner(x, unfold(y, s))));
      ident = std::max(ident, std::abs(inner(decimate(x, s), y) - inner(x, upsample_zero(y, s))));
      const auto back = filter_subsample_backward(x_hat, f_hat, s, y, true, false);
      ident = std::max(ident, std::abs(inner(y, filter_subsample(x_hat, f_hat, s)).real() - inner(back.input, x).real()));
    }
  }
  rep.check(ident <= 1e-10, "subsampling/adjoint identities " + fmt("%.2e", ident));
  rep.note("identities max err " + fmt("%.2e", ident));
  return rep.outcome();
}

Outcome zero_mean() {
  Report rep;
  Rng rng(55);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const MorletParams p{rng.uniform(0.5, 6.0), rng.uniform(0.0, 2.0 * std::numbers::pi), rng.uniform(0.0, 3.0),
                         rng.uniform(0.3, 2.0)};
    const auto psi = morlet_sample(p, GridSpec(32));
    cplx sum = 0.0;
    double mass = 0.0;
    for (const auto& v : psi) {
      sum += v;
      mass += std::abs(v);
    }
    const double ratio = mass > 0.0 ? std::abs(sum) / mass : 0.0;
    worst = std::max(worst, ratio);
    rep.check(std::abs(sum) <= 1e-10 * mass, "draw " + std::to_string(t));
  }
  rep.note("100 draws, worst |sum psi| / sum |psi| = " + fmt("%.2e", worst));
  return rep.outcome();
}

Outcome filterbank_distance_exact() {
  Report rep;
  Rng rng(66);
  auto draw = [&] {
    std::vector<MorletParams> v;
    for (int i = 0; i < 8; ++i) {
      v.push_back({rng.uniform(0.5, 5.0), rng.uniform(-10.0, 10.0), rng.uniform(0.0, 3.0), rng.uniform(0.3, 2.0)});
    }
    return v;
  };
  double worst = 0.0;
  for (int t = 0; t < 4; ++t) {
    const auto a = draw(), b = draw();
    rep.check(filterbank_distance(a, a).total == 0.0, "d(A, A) != 0");
    std::vector<int> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (int i = 0; i < 8; ++i) total += morlet_distance(a[i], b[perm[i]]);
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double d = filterbank_distance(a, b).total;
    worst = std::max(worst, std::abs(d - best));
    rep.check(std::abs(d - best) <= 1e-12 * std::max(1.0, best), "brute force mismatch");

    std::vector<int> shuffle(8);
    std::iota(shuffle.begin(), shuffle.end(), 0);
    for (int i = 7; i > 0; --i) std::swap(shuffle[i], shuffle[rng.below(i + 1)]);
    std::vector<MorletParams> pa(8), pb(8);
    for (int i = 0; i < 8; ++i) pa[i] = a[shuffle[i]];
    for (int i = 0; i < 8; ++i) pb[i] = b[shuffle[7 - i]];
    rep.check(std::abs(filterbank_distance(pa, pb).total - d) <= 1e-12 * std::max(1.0, d), "permutation invariance");
  }
  rep.note("4 random pairs vs 8! enumeration, max diff " + fmt("%.1e", worst));
  return rep.outcome();
}

Outcome stability() {
  Report rep;
  FilterbankSpec spec;
  spec.J = 2;
  spec.L = 4;
  spec.n = 32;
  const FilterBank fixed_bank(spec);
  const auto x = smooth_image(32);
  for (int k = 0; k < 6; ++k) {
    const auto kind = static_cast<DeformKind>(k);
    const std::vector<double> s{deform_min_strength(kind)};
    rep.check(stability_curve(fixed_bank, x, kind, s)[0] == 0.0, to_string(kind) + " at identity");
  }
  std::vector<double> strengths;
  for (int i = 1; i <= 10; ++i) strengths.push_back(i);
  const auto curve = stability_curve(fixed_bank, x, DeformKind::rotation, strengths);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    rep.check(curve[i] >= curve[i - 1] - 1e-3, "rotation curve decreases at " + std::to_string(i + 1) + " deg");
  }
  const std::vector<double> top{deform_max_strength(DeformKind::rotation)};
  const auto& learned = runs().get(0, 0).model.bank;
  const double d_fixed = stability_curve(fixed_bank, x, DeformKind::rotation, top)[0];
  const double d_learned = stability_curve(learned, x, DeformKind::rotation, top)[0];
  rep.check(d_fixed < 1.0, "fixed bank at 10 deg: " + fmt("%.4f", d_fixed));
  rep.check(d_learned < 1.0, "learned bank at 10 deg: " + fmt("%.4f", d_learned));
  rep.note("rotation 10 deg: fixed " + fmt("%.4f", d_fixed) + ", learned " + fmt("%.4f", d_learned));
  return rep.outcome();
}

Outcome small_data_ordering() {
  Report rep;
  double mean[4] = {0, 0, 0, 0};
  for (int c = 0; c < 4; ++c) {
    for (int seed = 0; seed < kSeeds; ++seed) mean[c] += *runs().get(c, seed).log.epochs.back().test_acc / kSeeds;
    rep.note(std::string(kCells[c].name) + " " + fmt("%.4f", mean[c]));
  }
  rep.check(mean[0] >= mean[2], "learnable-TF < fixed-TF");
  rep.check(*std::min_element(mean, mean + 4) == mean[3], "fixed-random is not the minimum");
  return rep.outcome();
}

Outcome perturb_recovery() {
  Report rep;
  const auto& trained = runs().get(0, 0);
  RecoveryConfig rc;
  rc.perturbation = 0.3;
  rc.steps = 60;
  rc.lr = 0.05;
  rc.momentum = 0.9;
  const auto log = perturb_and_reoptimize(trained.model, benchmark_train(0), {0, ParamField::theta}, rc);
  rep.check(log.distance() < 0.05, "theta ended " + fmt("%.4f", log.distance()) + " rad away");
  rep.note("theta_0 " + fmt("%.4f", log.initial) + " -> " + fmt("%.4f", log.perturbed) + " -> " +
           fmt("%.4f", log.final_value) + ", |delta| " + fmt("%.4f", log.distance()));
  return rep.outcome();
}

// ---------------------------------------------------------------------------
// CLI criteria.

fs::path scratch_dir() {
  static const fs::path p = [] {
    auto d = fs::temp_directory_path() / "pscat_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

int cli(const fs::path& cwd, const std::string& args) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" + std::string(PSCAT_CLI_PATH) + "' " + args + " > cli.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome bench_direction() {
  Report rep;
  const auto dir = scratch_dir() / "bench";
  fs::create_directories(dir);
  const int code = cli(dir, "bench --j 2 --l 8 --n 32 --batch 32 --repeats 3 --threads 1 --out bench.json");
  rep.check(code == 0, "pscat bench exited with " + std::to_string(code));
  if (code != 0) return rep.outcome();
  const auto t = read_json(dir / "bench.json")["timing"];
  const double fixed = t["fixed_forward_images_per_sec"], learnable = t["learnable_forward_backward_images_per_sec"];
  rep.check(fixed > learnable, "fixed forward not faster");
  rep.note("fixed " + fmt("%.1f", fixed) + " img/s, learnable fwd+bwd " + fmt("%.1f", learnable) + " img/s, ratio " +
           fmt("%.2f", fixed / learnable));
  return rep.outcome();
}

Outcome determinism() {
  Report rep;
  const auto root = scratch_dir() / "determinism";
  fs::create_directories(root);
  {
    RealField img(32);
    Rng rng(9);
    for (auto& v : img) v = rng.uniform();
    write_png(root / "input.png", img, 0.0, 1.0);
  }
  const std::string input = (root / "input.png").string();
  const std::vector<std::string> commands{
      "init --j 2 --l 8 --out tf.json",
      "init --j 2 --l 8 --init random --seed 7 --out rand.json",
      "init --j 2 --l 4 --parameterization equivariant --init random --seed 3 --out eq.json",
      "init --j 1 --l 2 --n 16 --parameterization pixelwise --out px.json",
      "show-filters --bank tf.json --out filters_pgm",
      "show-filters --bank rand.json --out filters_png --format png",
      "transform --bank tf.json --input " + input + " --out s.bin",
      "train --j 2 --l 4 --init random --seed 1 --epochs 3 --per-class 8 --test-per-class 8 --out run_learn",
      "train --j 2 --l 4 --fixed --epochs 3 --per-class 8 --test-per-class 8 --out run_fixed",
      "train --j 1 --l 2 --n 16 --parameterization equivariant --epochs 2 --per-class 6 --test-per-class 0 --out run_eq",
      "stability --bank rand.json --steps 4 --out stab.csv",
      "distance --a tf.json --b rand.json --out dist.json",
      "distance --a run_learn/bank_initial.json --runlog run_learn/runlog.jsonl --out traj.csv",
      "bench --j 2 --l 4 --n 32 --batch 4 --repeats 1 --out bench.json",
  };
  for (const char* run : {"a", "b"}) {
    const auto dir = root / run;
    fs::create_directories(dir);
    for (const auto& c : commands) {
      const int code = cli(dir, c + " --threads 1");
      rep.check(code == 0, std::string(run) + ": '" + c + "' exited with " + std::to_string(code));
    }
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a");
    const auto other = root / "b" / rel;
    const std::string name = rel.filename().string();
    if (name == "cli.log") continue;
    ++files;
    if (!fs::exists(other)) {
      rep.check(false, rel.string() + " missing in second run");
      continue;
    }
    bool same;
    if (name.ends_with("manifest.json") || name == "manifest.json") {
      same = cli::strip_timestamps(read_json(e.path())) == cli::strip_timestamps(read_json(other));
    } else if (name == "bench.json") {
      auto ja = read_json(e.path()), jb = read_json(other);
      ja.erase("timing");
      jb.erase("timing");
      same = ja == jb;
    } else {
      same = read_bytes(e.path()) == read_bytes(other);
    }
    rep.check(same, rel.string() + " differs");
  }
  rep.check(files > 50, "too few outputs compared");
  rep.note(std::to_string(commands.size()) + " commands, " + std::to_string(files) +
           " files compared (manifest timestamps and bench timings excluded)");
  return rep.outcome();
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--only") {
      std::stringstream ss(argv[i + 1]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient fidelity", gradient_fidelity},
      {"tight-frame init exactness", tight_frame_exactness},
      {"channel-count formulas", channel_counts},
      {"oracle equivalence", oracle_equivalence},
      {"zero-mean wavelets", zero_mean},
      {"filterbank distance", filterbank_distance_exact},
      {"deformation stability", stability},
      {"small-data ordering", small_data_ordering},
      {"perturb-and-reoptimize", perturb_recovery},
      {"throughput direction", bench_direction},
      {"CLI determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %2d  %-28s (%.1fs)  %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, dt,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
