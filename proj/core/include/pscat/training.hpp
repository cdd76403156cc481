// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "pscat/dataset.hpp"
#include "pscat/filterbank.hpp"
#include "pscat/scattering.hpp"

namespace pscat {

inline constexpr double kOneCycleWarmup = 0.3;
inline constexpr double kOneCycleDiv = 25.0;
inline constexpr double kOneCycleFinalDiv = 1e4;

/// One-cycle schedule: linear warmup from max_lr / 25 to max_lr at step
/// floor(0.3 * total), then linear anneal to max_lr / (25 * 1e4) at the last step.
[[nodiscard]] double one_cycle_lr(long step, long total_steps, double max_lr);

/// Dense B x channels x area activations.
struct Features {
  int batch = 0;
  int channels = 0;
  std::size_t area = 0;
  std::vector<double> data;

  Features() = default;
  Features(int b, int c, std::size_t a) : batch(b), channels(c), area(a), data(b * c * a, 0.0) {}
  [[nodiscard]] std::size_t dim() const noexcept { return channels * area; }
};

/// Scattering output with each sample's `planes` items concatenated along the
/// channel axis.
[[nodiscard]] Features to_features(const ScatteringOutput& s, int planes);

struct BatchNorm {
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

  std::vector<double> scale, shift, running_mean, running_var;

  BatchNorm() = default;
  explicit BatchNorm(int channels)
      : scale(channels, 1.0), shift(channels, 0.0), running_mean(channels, 0.0), running_var(channels, 1.0) {}
  [[nodiscard]] int channels() const noexcept { return static_cast<int>(scale.size()); }
};

struct BatchNormCache {
  std::vector<double> x_hat;
  std::vector<double> inv_std;
};

/// Training mode normalizes with batch statistics (over batch and spatial
/// axes) and updates the running estimates; evaluation mode uses the running
/// estimates. Throws DegenerateBatch for a training batch of fewer than two.
[[nodiscard]] Features batchnorm_forward(const Features& x, BatchNorm& bn, bool training,
                                         BatchNormCache* cache = nullptr);

struct BatchNormGrads {
  Features input;
  std::vector<double> scale, shift;
};

[[nodiscard]] BatchNormGrads batchnorm_backward(const Features& dy, const BatchNorm& bn,
                                                const BatchNormCache& cache);

/// logits = W x + b, W is classes x dim row-major.
struct LinearHead {
  int classes = 0;
  std::size_t dim = 0;
  std::vector<double> weight, bias;

  LinearHead() = default;
  /// Uniform(-1/sqrt(dim), 1/sqrt(dim)) initialization.
  LinearHead(int classes, std::size_t dim, std::uint64_t seed);

  [[nodiscard]] std::vector<double> forward(const Features& x) const;
};

struct LinearGrads {
  Features input;
  std::vector<double> weight, bias;
};

[[nodiscard]] LinearGrads linear_backward(const LinearHead& head, const Features& x,
                                          std::span<const double> dlogits);

struct XentResult {
  double loss = 0.0;
  std::vector<double> grad;  ///< (softmax - onehot) / B
  int correct = 0;
};

/// Mean cross-entropy of B x C logits, log-sum-exp stabilized.
[[nodiscard]] XentResult softmax_xent(std::span<const double> logits, std::span<const int> labels, int classes);

/// v = momentum v + g + weight_decay p; p -= lr v; then p = max(p, lower) where
/// lower bounds are given.
void sgd_momentum_step(std::span<double> params, std::span<const double> grads, std::span<double> velocity,
                       double lr, double momentum, double weight_decay,
                       std::span<const double> lower_bounds = {});

struct TrainConfig {
  FilterbankSpec bank;  ///< bank.seed is overwritten by `seed`
  int epochs = 200;
  int batch_size = 1024;
  double max_lr_scattering = 0.1;
  double max_lr_head = 0.001;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
  std::size_t subsample_size = 0;  ///< 0 keeps the whole training set
  bool learnable = true;
  int eval_every = 0;  ///< test accuracy every k epochs; 0 = last epoch only
  int threads = 1;

  /// Throws ConfigError on non-positive sizes or momentum outside [0, 1).
  void validate() const;
};

struct Model {
  FilterBank bank;
  int planes = 1;
  BatchNorm bn;
  LinearHead head;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;             ///< head group
  double lr_scattering = 0.0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  std::optional<double> test_acc;
  std::vector<MorletParams> params;  ///< per filter; empty for pixelwise banks
};

struct RunLog {
  nlohmann::json header;
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  Model model;
  RunLog log;
};

struct ModelGrads {
  std::vector<double> bank;  ///< FilterBank::flat() layout; empty when fixed
  std::vector<double> bn_scale, bn_shift;
  std::vector<double> head_weight, head_bias;
};

/// SGD state for every parameter group. Weight decay is applied to the linear
/// head only; filter parameters are clamped to their lower bounds.
class Optimizer {
 public:
  Optimizer(const Model& model, double momentum, double weight_decay);
  void step(Model& model, const ModelGrads& grads, double lr_scattering, double lr_head);

 private:
  double momentum_;
  double weight_decay_;
  std::vector<double> v_bank_, v_scale_, v_shift_, v_weight_, v_bias_;
};

[[nodiscard]] Model make_model(const TrainConfig& cfg, int classes, int planes);

/// Full-batch gradient descent when the training set has at most 1024 samples,
/// otherwise shuffled minibatches of cfg.batch_size. Epoch 0 of the log holds
/// the initial parameters and loss. Throws NumericalDivergence on a non-finite
/// loss.
[[nodiscard]] TrainResult train(const Dataset& train_set, const Dataset* test_set, const TrainConfig& cfg);

/// Same as above, continuing from an existing model.
[[nodiscard]] TrainResult train(Model model, const Dataset& train_set, const Dataset* test_set,
                                const TrainConfig& cfg);

/// Evaluation-mode logits, B x C.
[[nodiscard]] std::vector<double> predict_logits(const Model& model, const Dataset& ds, int threads = 1);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

[[nodiscard]] Evaluation evaluate(const Model& model, const Dataset& ds, int threads = 1);

/// Training-mode loss and its gradient for every group (used by the trainer
/// and the single-parameter recovery). The bank must be realized.
struct StepResult {
  XentResult xent;
  ModelGrads grads;
};

[[nodiscard]] StepResult loss_and_grads(Model& model, const Dataset& batch, bool learnable, int threads,
                                        const Features* cached_features = nullptr);

enum class ParamField { sigma, theta, xi, gamma };

struct ParamSelector {
  int index = 0;  ///< filter index (canonical) or scale index (equivariant)
  ParamField field = ParamField::theta;
};

struct RecoveryConfig {
  double perturbation = 0.3;
  bool multiplicative = false;  ///< value *= perturbation instead of += perturbation
  int steps = 100;
  double lr = 0.05;
  double momentum = 0.9;
  int threads = 1;
};

struct RecoveryLog {
  double initial = 0.0;
  double perturbed = 0.0;
  double final_value = 0.0;
  std::vector<double> values;  ///< after each step
  std::vector<double> losses;  ///< before each step
  [[nodiscard]] double distance() const { return std::abs(final_value - initial); }
};

/// Perturbs one Morlet parameter of a trained model, freezes everything else,
/// and optimizes that scalar alone on the training loss.
[[nodiscard]] RecoveryLog perturb_and_reoptimize(Model model, const Dataset& train_set,
                                                 const ParamSelector& which, const RecoveryConfig& cfg);

}  // namespace pscat
