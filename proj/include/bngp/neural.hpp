// Copyright 2026 The bngp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef BNGP_NEURAL_HPP_
#define BNGP_NEURAL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bngp/common.hpp"

namespace bngp::nn {

using Matrix = Eigen::MatrixXd;  // rows are batch samples
using Vector = Eigen::VectorXd;

enum class HiddenActivation { kRelu, kLeakyRelu };
enum class OutputActivation { kSigmoid, kScaledSigmoid, kIdentity };
enum class Mode { kTrain, kEval };

struct MlpConfig {
  std::vector<std::size_t> layer_widths;  // input, hidden..., output
  HiddenActivation hidden_activation = HiddenActivation::kLeakyRelu;
  double leak_slope = 0.01;
  OutputActivation output_activation = OutputActivation::kSigmoid;
  bool batch_norm = false;  // applied pre-activation on hidden layers
  std::uint64_t seed = 0;
};

// Per-parameter gradients, shaped like the network, plus the gradient with
// respect to the input batch (needed to backpropagate through a release
// into the generator).
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  std::vector<Vector> bn_scales;
  std::vector<Vector> bn_shifts;
  Matrix input;
};

// Feedforward network with dense layers, optional batch normalization on
// hidden layers, and a configurable output activation. Weights are
// initialized U(-1/sqrt(fan_in), 1/sqrt(fan_in)) from the config seed.
class Mlp {
 public:
  explicit Mlp(MlpConfig config);

  const MlpConfig& config() const { return config_; }
  std::size_t input_width() const { return config_.layer_widths.front(); }
  std::size_t output_width() const { return config_.layer_widths.back(); }
  std::size_t layer_count() const { return weights_.size(); }

  // Train mode uses batch statistics, updates the running moments, and
  // caches activations for backward; eval mode uses running moments and is
  // deterministic.
  Matrix forward(const Matrix& batch, Mode mode);

  // Exact gradients for the last train-mode forward; consumes the cache.
  // loss_grad is d(loss)/d(output), same shape as the forward result.
  Gradients backward(const Matrix& loss_grad);

  Gradients zero_gradients() const;
  std::size_t parameter_count() const;
  // Mutable views over every parameter, in a fixed traversal order
  // (weights, biases, bn scale, bn shift per layer).
  std::vector<double*> parameter_pointers();

  // Versioned flat-text checkpoint: header lines (format tag, widths,
  // activations, batch-norm flag, seed) followed by one parameter per line
  // in traversal order, running moments included. %.17g round-trips doubles.
  std::string checkpoint_string() const;
  static Mlp from_checkpoint_string(const std::string& text);
  void save_checkpoint(const std::string& path) const;
  static Mlp load_checkpoint(const std::string& path);

 private:
  struct LayerCache {
    Matrix input;
    Matrix normalized;      // (z - mean) * inv_std; empty when no batch norm
    Vector inv_std;
    Matrix pre_activation;  // value entering the activation function
    Matrix activated;
  };

  Matrix run_forward(const Matrix& batch, Mode mode,
                     std::vector<LayerCache>* cache);
  bool layer_has_norm(std::size_t layer) const {
    return config_.batch_norm && layer + 1 < weights_.size();
  }

  MlpConfig config_;
  std::vector<Matrix> weights_;  // out x in
  std::vector<Vector> biases_;
  std::vector<Vector> bn_scales_;
  std::vector<Vector> bn_shifts_;
  std::vector<Vector> bn_running_mean_;
  std::vector<Vector> bn_running_var_;
  std::vector<LayerCache> cache_;
  bool cache_valid_ = false;

  static constexpr double kBnEpsilon = 1e-5;
  static constexpr double kBnMomentum = 0.9;
};

// Adam with bias correction and decoupled weight decay; the learning rate is
// non-increasing across epochs via decay_learning_rate.
struct OptimizerState {
  double learning_rate = 1e-3;
  double decay_rate = 0.988;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
};

OptimizerState make_optimizer(const Mlp& net, double learning_rate,
                              double weight_decay = 1e-5,
                              double decay_rate = 0.988);

void adam_step(Mlp& net, const Gradients& grads, OptimizerState& state);

inline void decay_learning_rate(OptimizerState& state) {
  state.learning_rate *= state.decay_rate;
}

struct ScalarLoss {
  std::function<double(const Matrix&)> value;
  std::function<Matrix(const Matrix&)> grad;  // d(loss)/d(output)
};

// Central-difference gradient per parameter against backward(); returns the
// max relative error over parameters with |analytic| > 1e-8.
double finite_difference_check(Mlp& net, const Matrix& batch,
                               const ScalarLoss& loss, double epsilon_fd);

}  // namespace bngp::nn

#endif  // BNGP_NEURAL_HPP_
