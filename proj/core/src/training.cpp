// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "pscat/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pscat/autograd.hpp"
#include "pscat/errors.hpp"
#include "pscat/rng.hpp"

namespace pscat {

double one_cycle_lr(long step, long total_steps, double max_lr) {
  const double start = max_lr / kOneCycleDiv;
  const double end = start / kOneCycleFinalDiv;
  const long peak = static_cast<long>(std::floor(kOneCycleWarmup * static_cast<double>(total_steps)));
  if (step <= peak) {
    if (peak == 0) return max_lr;
    return start + (max_lr - start) * static_cast<double>(step) / static_cast<double>(peak);
  }
  const long span = total_steps - 1 - peak;
  const double t = span > 0 ? static_cast<double>(step - peak) / static_cast<double>(span) : 1.0;
  const double w = std::min(t, 1.0);
  return (1.0 - w) * max_lr + w * end;
}

Features to_features(const ScatteringOutput& s, int planes) {
  if (planes < 1 || s.batch % planes != 0) throw ShapeMismatch("to_features: batch is not a multiple of planes");
  Features f;
  f.batch = s.batch / planes;
  f.channels = s.channels * planes;
  f.area = s.area();
  f.data = s.data;
  return f;
}

Features batchnorm_forward(const Features& x, BatchNorm& bn, bool training, BatchNormCache* cache) {
  if (x.channels != bn.channels()) throw ShapeMismatch("batchnorm: channel count mismatch");
  if (training && x.batch < 2) throw DegenerateBatch("batchnorm: training batch needs at least two samples");
  Features y(x.batch, x.channels, x.area);
  const double m = static_cast<double>(x.batch) * static_cast<double>(x.area);
  if (cache) {
    cache->x_hat.assign(x.data.size(), 0.0);
    cache->inv_std.assign(static_cast<std::size_t>(x.channels), 0.0);
  }
  for (int c = 0; c < x.channels; ++c) {
    auto at = [&](int b, std::size_t k) { return (static_cast<std::size_t>(b) * x.channels + c) * x.area + k; };
    double mean, var;
    if (training) {
      double s = 0.0;
      for (int b = 0; b < x.batch; ++b)
        for (std::size_t k = 0; k < x.area; ++k) s += x.data[at(b, k)];
      mean = s / m;
      double ss = 0.0;
      for (int b = 0; b < x.batch; ++b)
        for (std::size_t k = 0; k < x.area; ++k) ss += (x.data[at(b, k)] - mean) * (x.data[at(b, k)] - mean);
      var = ss / m;
      bn.running_mean[c] = (1.0 - BatchNorm::kMomentum) * bn.running_mean[c] + BatchNorm::kMomentum * mean;
      const double unbiased = m > 1.0 ? ss / (m - 1.0) : var;
      bn.running_var[c] = (1.0 - BatchNorm::kMomentum) * bn.running_var[c] + BatchNorm::kMomentum * unbiased;
    } else {
      mean = bn.running_mean[c];
      var = bn.running_var[c];
    }
    const double inv = 1.0 / std::sqrt(var + BatchNorm::kEps);
    if (cache) cache->inv_std[c] = inv;
    for (int b = 0; b < x.batch; ++b) {
      for (std::size_t k = 0; k < x.area; ++k) {
        const double xh = (x.data[at(b, k)] - mean) * inv;
        if (cache) cache->x_hat[at(b, k)] = xh;
        y.data[at(b, k)] = bn.scale[c] * xh + bn.shift[c];
      }
    }
  }
  return y;
}

BatchNormGrads batchnorm_backward(const Features& dy, const BatchNorm& bn, const BatchNormCache& cache) {
  BatchNormGrads g{Features(dy.batch, dy.channels, dy.area), std::vector<double>(bn.channels(), 0.0),
                   std::vector<double>(bn.channels(), 0.0)};
  const double m = static_cast<double>(dy.batch) * static_cast<double>(dy.area);
  for (int c = 0; c < dy.channels; ++c) {
    auto at = [&](int b, std::size_t k) { return (static_cast<std::size_t>(b) * dy.channels + c) * dy.area + k; };
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (int b = 0; b < dy.batch; ++b) {
      for (std::size_t k = 0; k < dy.area; ++k) {
        sum_dy += dy.data[at(b, k)];
        sum_dy_xh += dy.data[at(b, k)] * cache.x_hat[at(b, k)];
      }
    }
    g.shift[c] = sum_dy;
    g.scale[c] = sum_dy_xh;
    const double k1 = bn.scale[c] * cache.inv_std[c] / m;
    for (int b = 0; b < dy.batch; ++b) {
      for (std::size_t k = 0; k < dy.area; ++k) {
        const std::size_t i = at(b, k);
        g.input.data[i] = k1 * (m * dy.data[i] - sum_dy - cache.x_hat[i] * sum_dy_xh);
      }
    }
  }
  return g;
}

LinearHead::LinearHead(int classes_, std::size_t dim_, std::uint64_t seed)
    : classes(classes_), dim(dim_), weight(classes_ * dim_), bias(classes_) {
  Rng rng(seed, 0x4ead);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  for (auto& w : weight) w = rng.uniform(-bound, bound);
  for (auto& b : bias) b = rng.uniform(-bound, bound);
}

std::vector<double> LinearHead::forward(const Features& x) const {
  if (x.dim() != dim) throw ShapeMismatch("linear head: feature dimension mismatch");
  std::vector<double> logits(static_cast<std::size_t>(x.batch) * classes);
  for (int b = 0; b < x.batch; ++b) {
    const double* xb = x.data.data() + b * dim;
    for (int c = 0; c < classes; ++c) {
      const double* w = weight.data() + c * dim;
      double acc = bias[c];
      for (std::size_t k = 0; k < dim; ++k) acc += w[k] * xb[k];
      logits[static_cast<std::size_t>(b) * classes + c] = acc;
    }
  }
  return logits;
}

LinearGrads linear_backward(const LinearHead& head, const Features& x, std::span<const double> dlogits) {
  LinearGrads g{Features(x.batch, x.channels, x.area), std::vector<double>(head.weight.size(), 0.0),
                std::vector<double>(head.bias.size(), 0.0)};
  for (int b = 0; b < x.batch; ++b) {
    const double* xb = x.data.data() + b * head.dim;
    double* dxb = g.input.data.data() + b * head.dim;
    for (int c = 0; c < head.classes; ++c) {
      const double d = dlogits[static_cast<std::size_t>(b) * head.classes + c];
      g.bias[c] += d;
      double* dw = g.weight.data() + c * head.dim;
      const double* w = head.weight.data() + c * head.dim;
      for (std::size_t k = 0; k < head.dim; ++k) {
        dw[k] += d * xb[k];
        dxb[k] += d * w[k];
      }
    }
  }
  return g;
}

XentResult softmax_xent(std::span<const double> logits, std::span<const int> labels, int classes) {
  const std::size_t batch = labels.size();
  XentResult r;
  r.grad.assign(logits.size(), 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* z = logits.data() + b * classes;
    const double zmax = *std::max_element(z, z + classes);
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) sum += std::exp(z[c] - zmax);
    const double lse = zmax + std::log(sum);
    r.loss += lse - z[labels[b]];
    int arg = 0;
    for (int c = 0; c < classes; ++c) {
      if (z[c] > z[arg]) arg = c;
      r.grad[b * classes + c] = (std::exp(z[c] - lse) - (c == labels[b] ? 1.0 : 0.0)) / static_cast<double>(batch);
    }
    if (arg == labels[b]) ++r.correct;
  }
  r.loss /= static_cast<double>(batch);
  return r;
}

void sgd_momentum_step(std::span<double> params, std::span<const double> grads, std::span<double> velocity,
                       double lr, double momentum, double weight_decay, std::span<const double> lower_bounds) {
  if (grads.size() != params.size() || velocity.size() != params.size() ||
      (!lower_bounds.empty() && lower_bounds.size() != params.size())) {
    throw SizeMismatch("sgd_momentum_step: parameter, gradient and state sizes differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grads[i] + weight_decay * params[i];
    params[i] -= lr * velocity[i];
    if (!lower_bounds.empty()) params[i] = std::max(params[i], lower_bounds[i]);
  }
}

void TrainConfig::validate() const {
  bank.validate();
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (!(max_lr_scattering >= 0.0) || !(max_lr_head >= 0.0)) throw ConfigError("learning rates must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (eval_every < 0) throw ConfigError("eval_every must be >= 0");
  if (threads < 1) throw ConfigError("threads must be positive");
}

Optimizer::Optimizer(const Model& model, double momentum, double weight_decay)
    : momentum_(momentum),
      weight_decay_(weight_decay),
      v_bank_(model.bank.flat_size(), 0.0),
      v_scale_(model.bn.scale.size(), 0.0),
      v_shift_(model.bn.shift.size(), 0.0),
      v_weight_(model.head.weight.size(), 0.0),
      v_bias_(model.head.bias.size(), 0.0) {}

void Optimizer::step(Model& model, const ModelGrads& g, double lr_scattering, double lr_head) {
  if (!g.bank.empty()) {
    auto p = model.bank.flat();
    sgd_momentum_step(p, g.bank, v_bank_, lr_scattering, momentum_, 0.0, model.bank.flat_lower_bounds());
    for (double v : p) {
      if (!std::isfinite(v)) throw NumericalDivergence("filter parameters became non-finite");
    }
    model.bank.set_flat(p);
    try {
      model.bank.realize();
    } catch (const DegenerateEnvelope& e) {
      throw NumericalDivergence(std::string("filters degenerated during training: ") + e.what());
    }
  }
  sgd_momentum_step(model.bn.scale, g.bn_scale, v_scale_, lr_head, momentum_, 0.0);
  sgd_momentum_step(model.bn.shift, g.bn_shift, v_shift_, lr_head, momentum_, 0.0);
  sgd_momentum_step(model.head.weight, g.head_weight, v_weight_, lr_head, momentum_, weight_decay_);
  sgd_momentum_step(model.head.bias, g.head_bias, v_bias_, lr_head, momentum_, weight_decay_);
}

Model make_model(const TrainConfig& cfg, int classes, int planes) {
  FilterbankSpec spec = cfg.bank;
  spec.seed = cfg.seed;
  spec.validate();
  FilterBank bank(spec);
  if (spec.parameterization == Parameterization::pixelwise) {
    // Pixel-wise banks start from the Morlet initialization they replace.
    FilterbankSpec morlet_spec = spec;
    morlet_spec.parameterization = Parameterization::canonical;
    bank = pixelwise_init_from(FilterBank(morlet_spec));
  }
  const int channels = channel_count(spec.J, spec.L) * planes;
  const std::size_t area = static_cast<std::size_t>(spec.n >> spec.J) * (spec.n >> spec.J);
  return Model{std::move(bank), planes, BatchNorm(channels), LinearHead(classes, channels * area, cfg.seed)};
}

namespace {

Features scatter_features(const FilterBank& bank, const Dataset& ds, int threads, Tape* tape = nullptr) {
  return to_features(forward(ds.images, bank, tape, threads), ds.planes);
}

Dataset batch_of(const Dataset& ds, std::span<const std::size_t> order, std::size_t lo, std::size_t hi) {
  return select(ds, std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                             order.begin() + static_cast<std::ptrdiff_t>(hi)));
}

std::vector<double> eval_logits(const Model& model, const Features& f) {
  BatchNorm bn = model.bn;
  return model.head.forward(batchnorm_forward(f, bn, false));
}

std::vector<MorletParams> snapshot(const FilterBank& bank) {
  if (bank.parameterization() == Parameterization::pixelwise) return {};
  return {bank.params().begin(), bank.params().end()};
}

void check_finite(double loss, int epoch) {
  if (!std::isfinite(loss)) {
    throw NumericalDivergence("training loss became non-finite at epoch " + std::to_string(epoch));
  }
}

constexpr std::size_t kFullBatchLimit = 1024;
constexpr std::size_t kEvalChunk = 1024;

}  // namespace

StepResult loss_and_grads(Model& model, const Dataset& batch, bool learnable, int threads,
                          const Features* cached_features) {
  Tape tape;
  Features x = cached_features ? *cached_features
                               : scatter_features(model.bank, batch, threads, learnable ? &tape : nullptr);
  BatchNormCache cache;
  const Features y = batchnorm_forward(x, model.bn, true, &cache);
  const auto logits = model.head.forward(y);
  StepResult r;
  r.xent = softmax_xent(logits, batch.labels, model.head.classes);
  auto lin = linear_backward(model.head, y, r.xent.grad);
  auto bn = batchnorm_backward(lin.input, model.bn, cache);
  r.grads.head_weight = std::move(lin.weight);
  r.grads.head_bias = std::move(lin.bias);
  r.grads.bn_scale = std::move(bn.scale);
  r.grads.bn_shift = std::move(bn.shift);
  if (learnable) {
    if (cached_features) throw TapeMissing("learnable step cannot reuse cached features");
    const int J = model.bank.J();
    ScatteringOutput upstream(static_cast<int>(batch.images.size()), path_table(J, model.bank.L()),
                              model.bank.n() >> J);
    upstream.data = std::move(bn.input.data);
    const auto sg = scattering_backward(tape, model.bank, upstream, false, threads);
    r.grads.bank = param_chain(sg.filter_hat, model.bank).flat();
  }
  return r;
}

std::vector<double> predict_logits(const Model& model, const Dataset& ds, int threads) {
  std::vector<double> out;
  out.reserve(ds.size() * model.head.classes);
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t lo = 0; lo < ds.size(); lo += kEvalChunk) {
    const std::size_t hi = std::min(ds.size(), lo + kEvalChunk);
    const auto part = eval_logits(model, scatter_features(model.bank, batch_of(ds, order, lo, hi), threads));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

Evaluation evaluate(const Model& model, const Dataset& ds, int threads) {
  const auto logits = predict_logits(model, ds, threads);
  const auto x = softmax_xent(logits, ds.labels, model.head.classes);
  return {x.loss, static_cast<double>(x.correct) / static_cast<double>(ds.size())};
}

TrainResult train(const Dataset& train_set, const Dataset* test_set, const TrainConfig& cfg) {
  cfg.validate();
  return train(make_model(cfg, train_set.classes, train_set.planes), train_set, test_set, cfg);
}

TrainResult train(Model model, const Dataset& full_train, const Dataset* test_set, const TrainConfig& cfg) {
  cfg.validate();
  full_train.validate();
  if (full_train.side() != model.bank.n()) throw ShapeMismatch("training images do not match the bank size");
  const Dataset train_set =
      cfg.subsample_size > 0 ? subsample_dataset(full_train, cfg.subsample_size, cfg.seed) : full_train;
  const std::size_t count = train_set.size();
  const bool full_batch = count <= kFullBatchLimit;
  if (count < 2) throw DegenerateBatch("training needs at least two samples");
  const std::size_t batch_size = full_batch ? count : static_cast<std::size_t>(cfg.batch_size);
  // A trailing batch of one sample cannot be normalized; it is dropped.
  std::size_t batches = count / batch_size;
  if (count % batch_size >= 2) ++batches;
  const long total_steps = static_cast<long>(cfg.epochs) * static_cast<long>(batches);

  RunLog log;
  log.header = {
      {"format", "pscat-runlog"},
      {"version", 1},
      {"J", cfg.bank.J},
      {"L", cfg.bank.L},
      {"n", cfg.bank.n},
      {"parameterization", to_string(model.bank.parameterization())},
      {"init", to_string(cfg.bank.init)},
      {"learnable", cfg.learnable},
      {"seed", cfg.seed},
      {"epochs", cfg.epochs},
      {"batch_size", batch_size},
      {"max_lr_scattering", cfg.max_lr_scattering},
      {"max_lr_head", cfg.max_lr_head},
      {"momentum", cfg.momentum},
      {"weight_decay", cfg.weight_decay},
      {"train_samples", count},
      {"test_samples", test_set ? test_set->size() : 0},
      {"classes", train_set.classes},
      {"dataset", train_set.source},
      {"planes", train_set.planes},
  };

  // Fixed full-batch runs scatter the training set once.
  std::optional<Features> cached;
  if (!cfg.learnable && full_batch) cached = scatter_features(model.bank, train_set, cfg.threads);
  std::optional<Features> cached_test;
  if (!cfg.learnable && test_set) cached_test = scatter_features(model.bank, *test_set, cfg.threads);

  auto test_accuracy = [&]() -> double {
    if (cached_test) {
      const auto x = softmax_xent(eval_logits(model, *cached_test), test_set->labels, model.head.classes);
      return static_cast<double>(x.correct) / static_cast<double>(test_set->size());
    }
    return evaluate(model, *test_set, cfg.threads).accuracy;
  };

  {
    Model probe = model;
    const Features f = cached ? *cached : scatter_features(probe.bank, train_set, cfg.threads);
    const auto logits = probe.head.forward(batchnorm_forward(f, probe.bn, true));
    const auto x = softmax_xent(logits, train_set.labels, probe.head.classes);
    check_finite(x.loss, 0);
    EpochRecord r0;
    r0.train_loss = x.loss;
    r0.train_acc = static_cast<double>(x.correct) / static_cast<double>(count);
    r0.params = snapshot(model.bank);
    log.epochs.push_back(std::move(r0));
  }

  Optimizer opt(model, cfg.momentum, cfg.weight_decay);
  std::vector<std::size_t> order(count);
  long step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < count; ++i) order[i] = i;
    if (!full_batch) {
      Rng rng(cfg.seed, 0xe90c00000000ull + static_cast<std::uint64_t>(epoch));
      for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    }
    double loss_sum = 0.0;
    int correct = 0;
    std::size_t seen = 0;
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * batch_size, hi = std::min(count, lo + batch_size);
      const double lr_s = one_cycle_lr(step, total_steps, cfg.max_lr_scattering);
      const double lr_h = one_cycle_lr(step, total_steps, cfg.max_lr_head);
      StepResult res = full_batch ? loss_and_grads(model, train_set, cfg.learnable, cfg.threads,
                                                   cached ? &*cached : nullptr)
                                  : loss_and_grads(model, batch_of(train_set, order, lo, hi), cfg.learnable,
                                                   cfg.threads);
      check_finite(res.xent.loss, epoch);
      opt.step(model, res.grads, lr_s, lr_h);
      loss_sum += res.xent.loss * static_cast<double>(hi - lo);
      correct += res.xent.correct;
      seen += hi - lo;
      rec.lr = lr_h;
      rec.lr_scattering = lr_s;
      ++step;
    }
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
    rec.params = snapshot(model.bank);
    const bool eval_now = cfg.eval_every > 0 ? (epoch % cfg.eval_every == 0 || epoch == cfg.epochs)
                                             : epoch == cfg.epochs;
    if (test_set && eval_now) rec.test_acc = test_accuracy();
    log.epochs.push_back(std::move(rec));
  }
  return {std::move(model), std::move(log)};
}

RecoveryLog perturb_and_reoptimize(Model model, const Dataset& train_set, const ParamSelector& which,
                                   const RecoveryConfig& cfg) {
  const auto mode = model.bank.parameterization();
  if (mode == Parameterization::pixelwise) throw ConfigError("perturb_and_reoptimize needs a Morlet bank");
  const int groups = mode == Parameterization::equivariant ? model.bank.J() : model.bank.size();
  if (which.index < 0 || which.index >= groups) throw ConfigError("parameter index out of range");
  const std::size_t slot = 4 * static_cast<std::size_t>(which.index) + static_cast<std::size_t>(which.field);

  auto flat = model.bank.flat();
  const double lower = model.bank.flat_lower_bounds()[slot];
  RecoveryLog log;
  log.initial = flat[slot];
  log.perturbed = cfg.multiplicative ? flat[slot] * cfg.perturbation : flat[slot] + cfg.perturbation;
  flat[slot] = log.perturbed;
  model.bank.set_flat(flat);
  model.bank.realize();
  double velocity = 0.0;
  for (int s = 0; s < cfg.steps; ++s) {
    const auto res = loss_and_grads(model, train_set, true, cfg.threads);
    check_finite(res.xent.loss, s);
    log.losses.push_back(res.xent.loss);
    velocity = cfg.momentum * velocity + res.grads.bank[slot];
    flat[slot] = std::max(flat[slot] - cfg.lr * velocity, lower);
    model.bank.set_flat(flat);
    model.bank.realize();
    log.values.push_back(flat[slot]);
  }
  log.final_value = flat[slot];
  return log;
}

}  // namespace pscat
