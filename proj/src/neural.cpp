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
#include "bngp/neural.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "bngp/rng.hpp"

namespace bngp::nn {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

Mlp::Mlp(MlpConfig config) : config_(std::move(config)) {
  if (config_.layer_widths.size() < 3) {
    throw ParameterError("Mlp: need at least one hidden layer");
  }
  for (std::size_t width : config_.layer_widths) {
    if (width < 1) throw ParameterError("Mlp: layer widths must be >= 1");
  }
  Rng rng(config_.seed);
  const std::size_t layers = config_.layer_widths.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<Eigen::Index>(config_.layer_widths[l]);
    const auto out = static_cast<Eigen::Index>(config_.layer_widths[l + 1]);
    Matrix w(out, in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) {
        w(r, c) = rng.uniform(-scale, scale);
      }
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Vector::Zero(out));
    bn_scales_.push_back(Vector::Ones(out));
    bn_shifts_.push_back(Vector::Zero(out));
    bn_running_mean_.push_back(Vector::Zero(out));
    bn_running_var_.push_back(Vector::Ones(out));
  }
}

// Layer l computes z = x W^T + b, y = norm(z) (hidden layers with batch norm
// only), a = activation(y).
Matrix Mlp::run_forward(const Matrix& batch, Mode mode,
                        std::vector<LayerCache>* cache) {
  if (batch.cols() != static_cast<Eigen::Index>(input_width())) {
    throw ParameterError("Mlp::forward: batch width != input width");
  }
  if (!batch.allFinite()) {
    throw NumericError("Mlp::forward: non-finite input");
  }
  if (cache) cache->clear();
  Matrix x = batch;
  const double rows = static_cast<double>(batch.rows());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    LayerCache layer;
    if (cache) layer.input = x;
    Matrix z = x * weights_[l].transpose();
    z.rowwise() += biases_[l].transpose();

    if (layer_has_norm(l)) {
      Vector mean;
      Vector inv_std;
      Matrix normalized;
      if (mode == Mode::kTrain) {
        mean = z.colwise().mean();
        Matrix centered = z.rowwise() - mean.transpose();
        Vector var = centered.array().square().colwise().sum() / rows;
        inv_std = (var.array() + kBnEpsilon).rsqrt();
        normalized = centered.array().rowwise() * inv_std.transpose().array();
        // Running moments track the biased batch statistics.
        bn_running_mean_[l] =
            kBnMomentum * bn_running_mean_[l] + (1.0 - kBnMomentum) * mean;
        bn_running_var_[l] =
            kBnMomentum * bn_running_var_[l] + (1.0 - kBnMomentum) * var;
      } else {
        mean = bn_running_mean_[l];
        inv_std = (bn_running_var_[l].array() + kBnEpsilon).rsqrt();
        normalized = (z.rowwise() - mean.transpose()).array().rowwise() *
                     inv_std.transpose().array();
      }
      z = normalized.array().rowwise() * bn_scales_[l].transpose().array();
      z.rowwise() += bn_shifts_[l].transpose();
      if (cache) {
        layer.normalized = std::move(normalized);
        layer.inv_std = std::move(inv_std);
      }
    }
    if (cache) layer.pre_activation = z;

    if (l + 1 < weights_.size()) {
      const double slope =
          config_.hidden_activation == HiddenActivation::kRelu
              ? 0.0
              : config_.leak_slope;
      x = z.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
    } else {
      switch (config_.output_activation) {
        case OutputActivation::kSigmoid:
          x = z.unaryExpr([](double v) { return sigmoid(v); });
          break;
        case OutputActivation::kScaledSigmoid:
          x = z.unaryExpr([](double v) { return sigmoid(v) - 0.5; });
          break;
        case OutputActivation::kIdentity:
          x = z;
          break;
      }
    }
    if (cache) {
      layer.activated = x;
      cache->push_back(std::move(layer));
    }
  }
  return x;
}

Matrix Mlp::forward(const Matrix& batch, Mode mode) {
  if (mode == Mode::kTrain) {
    Matrix out = run_forward(batch, mode, &cache_);
    cache_valid_ = true;
    return out;
  }
  return run_forward(batch, mode, nullptr);
}

Gradients Mlp::zero_gradients() const {
  Gradients grads;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    grads.weights.push_back(
        Matrix::Zero(weights_[l].rows(), weights_[l].cols()));
    grads.biases.push_back(Vector::Zero(biases_[l].size()));
    grads.bn_scales.push_back(Vector::Zero(bn_scales_[l].size()));
    grads.bn_shifts.push_back(Vector::Zero(bn_shifts_[l].size()));
  }
  return grads;
}

Gradients Mlp::backward(const Matrix& loss_grad) {
  if (!cache_valid_) {
    throw StateError("Mlp::backward: no matching train-mode forward");
  }
  if (loss_grad.rows() != cache_.back().activated.rows() ||
      loss_grad.cols() != cache_.back().activated.cols()) {
    throw StateError("Mlp::backward: loss gradient shape mismatch");
  }
  cache_valid_ = false;

  Gradients grads = zero_gradients();
  const double rows = static_cast<double>(cache_.front().input.rows());
  Matrix upstream = loss_grad;  // d(loss)/d(activated output of layer l)

  for (std::size_t li = weights_.size(); li-- > 0;) {
    const LayerCache& layer = cache_[li];

    // Through the activation: dy = upstream .* act'(y).
    Matrix dy;
    if (li + 1 == weights_.size()) {
      switch (config_.output_activation) {
        case OutputActivation::kSigmoid:
        case OutputActivation::kScaledSigmoid: {
          Matrix p = layer.activated;
          if (config_.output_activation == OutputActivation::kScaledSigmoid) {
            p.array() += 0.5;
          }
          dy = upstream.array() * p.array() * (1.0 - p.array());
          break;
        }
        case OutputActivation::kIdentity:
          dy = upstream;
          break;
      }
    } else {
      const double slope =
          config_.hidden_activation == HiddenActivation::kRelu
              ? 0.0
              : config_.leak_slope;
      dy = upstream.array() *
           layer.pre_activation
               .unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; })
               .array();
    }

    // Through batch normalization (batch statistics, biased variance):
    // dz = inv_std .* (dy*g - mean(dy*g) - n .* mean(dy*g .* n)).
    Matrix dz;
    if (layer_has_norm(li)) {
      grads.bn_scales[li] =
          (dy.array() * layer.normalized.array()).colwise().sum();
      grads.bn_shifts[li] = dy.colwise().sum();
      Matrix dn = dy.array().rowwise() * bn_scales_[li].transpose().array();
      Vector mean_dn = dn.colwise().sum() / rows;
      Vector mean_dn_n =
          (dn.array() * layer.normalized.array()).colwise().sum() / rows;
      dz = dn;
      dz.rowwise() -= mean_dn.transpose();
      dz -= (layer.normalized.array().rowwise() *
             mean_dn_n.transpose().array())
                .matrix();
      dz = dz.array().rowwise() * layer.inv_std.transpose().array();
    } else {
      dz = std::move(dy);
    }

    grads.weights[li] = dz.transpose() * layer.input;
    grads.biases[li] = dz.colwise().sum();
    if (li == 0) {
      grads.input = dz * weights_[0];
    } else {
      upstream = dz * weights_[li];
    }
  }
  return grads;
}

std::size_t Mlp::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    count += static_cast<std::size_t>(weights_[l].size());
    count += static_cast<std::size_t>(biases_[l].size());
    if (layer_has_norm(l)) {
      count += 2 * static_cast<std::size_t>(bn_scales_[l].size());
    }
  }
  return count;
}

std::vector<double*> Mlp::parameter_pointers() {
  std::vector<double*> pointers;
  pointers.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < weights_[l].size(); ++i) {
      pointers.push_back(weights_[l].data() + i);
    }
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) {
      pointers.push_back(biases_[l].data() + i);
    }
    if (layer_has_norm(l)) {
      for (Eigen::Index i = 0; i < bn_scales_[l].size(); ++i) {
        pointers.push_back(bn_scales_[l].data() + i);
      }
      for (Eigen::Index i = 0; i < bn_shifts_[l].size(); ++i) {
        pointers.push_back(bn_shifts_[l].data() + i);
      }
    }
  }
  return pointers;
}

namespace {

// Same traversal order as Mlp::parameter_pointers.
std::vector<double> flatten_gradients(const Gradients& grads,
                                      bool batch_norm) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < grads.weights[l].size(); ++i) {
      flat.push_back(grads.weights[l].data()[i]);
    }
    for (Eigen::Index i = 0; i < grads.biases[l].size(); ++i) {
      flat.push_back(grads.biases[l](i));
    }
    if (batch_norm && l + 1 < grads.weights.size()) {
      for (Eigen::Index i = 0; i < grads.bn_scales[l].size(); ++i) {
        flat.push_back(grads.bn_scales[l](i));
      }
      for (Eigen::Index i = 0; i < grads.bn_shifts[l].size(); ++i) {
        flat.push_back(grads.bn_shifts[l](i));
      }
    }
  }
  return flat;
}

}  // namespace

OptimizerState make_optimizer(const Mlp& net, double learning_rate,
                              double weight_decay, double decay_rate) {
  if (!(learning_rate > 0.0)) {
    throw ParameterError("make_optimizer: learning rate must be positive");
  }
  if (!(decay_rate > 0.0 && decay_rate <= 1.0)) {
    throw ParameterError("make_optimizer: decay rate must be in (0, 1]");
  }
  OptimizerState state;
  state.learning_rate = learning_rate;
  state.weight_decay = weight_decay;
  state.decay_rate = decay_rate;
  state.first_moment.assign(net.parameter_count(), 0.0);
  state.second_moment.assign(net.parameter_count(), 0.0);
  return state;
}

void adam_step(Mlp& net, const Gradients& grads, OptimizerState& state) {
  const std::vector<double*> params = net.parameter_pointers();
  const std::vector<double> flat =
      flatten_gradients(grads, net.config().batch_norm);
  if (flat.size() != params.size() ||
      state.first_moment.size() != params.size()) {
    throw StateError("adam_step: optimizer state does not match the network");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = flat[i];
    if (!std::isfinite(g)) {
      throw NumericError("adam_step: non-finite gradient at parameter " +
                         std::to_string(i));
    }
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double update = (m / bc1) / (std::sqrt(v / bc2) + state.epsilon);
    *params[i] -=
        state.learning_rate * (update + state.weight_decay * (*params[i]));
  }
}

double finite_difference_check(Mlp& net, const Matrix& batch,
                               const ScalarLoss& loss, double epsilon_fd) {
  if (!(epsilon_fd > 0.0)) {
    throw ParameterError("finite_difference_check: epsilon must be positive");
  }
  const Matrix out = net.forward(batch, Mode::kTrain);
  const Gradients grads = net.backward(loss.grad(out));
  const std::vector<double> analytic =
      flatten_gradients(grads, net.config().batch_norm);
  const std::vector<double*> params = net.parameter_pointers();

  double max_relative_error = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (std::abs(analytic[i]) <= 1e-8) continue;
    const double saved = *params[i];
    *params[i] = saved + epsilon_fd;
    const double plus = loss.value(net.forward(batch, Mode::kTrain));
    *params[i] = saved - epsilon_fd;
    const double minus = loss.value(net.forward(batch, Mode::kTrain));
    *params[i] = saved;
    const double fd = (plus - minus) / (2.0 * epsilon_fd);
    const double relative = std::abs(fd - analytic[i]) /
                            std::max(std::abs(fd), std::abs(analytic[i]));
    max_relative_error = std::max(max_relative_error, relative);
  }
  return max_relative_error;
}

std::string Mlp::checkpoint_string() const {
  std::ostringstream out;
  out.precision(17);
  out << "bngp-mlp 1\n";
  out << "widths";
  for (std::size_t w : config_.layer_widths) out << ' ' << w;
  out << '\n';
  out << "hidden "
      << (config_.hidden_activation == HiddenActivation::kRelu ? "relu"
                                                               : "leaky_relu")
      << ' ' << config_.leak_slope << '\n';
  const char* output = "identity";
  if (config_.output_activation == OutputActivation::kSigmoid) {
    output = "sigmoid";
  } else if (config_.output_activation == OutputActivation::kScaledSigmoid) {
    output = "scaled_sigmoid";
  }
  out << "output " << output << '\n';
  out << "batch_norm " << (config_.batch_norm ? 1 : 0) << '\n';
  out << "seed " << config_.seed << '\n';
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < weights_[l].size(); ++i) {
      out << weights_[l].data()[i] << '\n';
    }
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) {
      out << biases_[l](i) << '\n';
    }
    if (layer_has_norm(l)) {
      for (Eigen::Index i = 0; i < bn_scales_[l].size(); ++i) {
        out << bn_scales_[l](i) << '\n';
      }
      for (Eigen::Index i = 0; i < bn_shifts_[l].size(); ++i) {
        out << bn_shifts_[l](i) << '\n';
      }
      for (Eigen::Index i = 0; i < bn_running_mean_[l].size(); ++i) {
        out << bn_running_mean_[l](i) << '\n';
      }
      for (Eigen::Index i = 0; i < bn_running_var_[l].size(); ++i) {
        out << bn_running_var_[l](i) << '\n';
      }
    }
  }
  return out.str();
}

void Mlp::save_checkpoint(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("save_checkpoint: cannot open " + path);
  out << checkpoint_string();
}

Mlp Mlp::load_checkpoint(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParseError("load_checkpoint: cannot open " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return from_checkpoint_string(buffer.str());
}

Mlp Mlp::from_checkpoint_string(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "bngp-mlp" || version != 1) {
    throw ParseError("checkpoint: unknown format");
  }
  MlpConfig config;
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  {
    std::istringstream widths(line);
    std::string key;
    widths >> key;
    if (key != "widths") throw ParseError("load_checkpoint: expected widths");
    std::size_t w;
    while (widths >> w) config.layer_widths.push_back(w);
  }
  std::string key, value;
  in >> key >> value >> config.leak_slope;
  if (key != "hidden") throw ParseError("load_checkpoint: expected hidden");
  config.hidden_activation =
      value == "relu" ? HiddenActivation::kRelu : HiddenActivation::kLeakyRelu;
  in >> key >> value;
  if (key != "output") throw ParseError("load_checkpoint: expected output");
  if (value == "sigmoid") {
    config.output_activation = OutputActivation::kSigmoid;
  } else if (value == "scaled_sigmoid") {
    config.output_activation = OutputActivation::kScaledSigmoid;
  } else {
    config.output_activation = OutputActivation::kIdentity;
  }
  int batch_norm = 0;
  in >> key >> batch_norm;
  if (key != "batch_norm") {
    throw ParseError("load_checkpoint: expected batch_norm");
  }
  config.batch_norm = batch_norm != 0;
  in >> key >> config.seed;
  if (key != "seed") throw ParseError("load_checkpoint: expected seed");

  Mlp net(config);
  auto read = [&in](double& slot) {
    if (!(in >> slot)) {
      throw ParseError("checkpoint: truncated parameters");
    }
  };
  for (std::size_t l = 0; l < net.weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < net.weights_[l].size(); ++i) {
      read(net.weights_[l].data()[i]);
    }
    for (Eigen::Index i = 0; i < net.biases_[l].size(); ++i) {
      read(net.biases_[l](i));
    }
    if (net.layer_has_norm(l)) {
      for (Eigen::Index i = 0; i < net.bn_scales_[l].size(); ++i) {
        read(net.bn_scales_[l](i));
      }
      for (Eigen::Index i = 0; i < net.bn_shifts_[l].size(); ++i) {
        read(net.bn_shifts_[l](i));
      }
      for (Eigen::Index i = 0; i < net.bn_running_mean_[l].size(); ++i) {
        read(net.bn_running_mean_[l](i));
      }
      for (Eigen::Index i = 0; i < net.bn_running_var_[l].size(); ++i) {
        read(net.bn_running_var_[l](i));
      }
    }
  }
  return net;
}

}  // namespace bngp::nn
