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
#include "bngp/defense.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "bngp/metrics.hpp"

namespace bngp::defense {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double utility_loss(const SummaryStats& released, const SummaryStats& raw,
                    double kappa, double norm_order,
                    const std::function<double(double)>& ell_u) {
  if (released.size() != raw.size()) {
    throw ParameterError("utility_loss: dimension mismatch");
  }
  if (kappa < 0.0) throw ParameterError("utility_loss: kappa must be >= 0");
  if (!(norm_order >= 1.0)) {
    throw ParameterError("utility_loss: norm order must be >= 1");
  }
  double norm = 0.0;
  for (std::size_t j = 0; j < released.size(); ++j) {
    norm += std::pow(std::abs(released.values[j] - raw.values[j]), norm_order);
  }
  norm = std::pow(norm, 1.0 / norm_order);
  const double scaled = norm / static_cast<double>(released.size());
  return kappa * (ell_u ? ell_u(scaled) : scaled);
}

double utility_loss(const SummaryStats& released, const SummaryStats& raw,
                    const std::vector<double>& kappa) {
  if (released.size() != raw.size() || kappa.size() != raw.size()) {
    throw ParameterError("utility_loss: dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < released.size(); ++j) {
    if (kappa[j] < 0.0) {
      throw ParameterError("utility_loss: kappa must be >= 0");
    }
    total += kappa[j] * std::abs(released.values[j] - raw.values[j]);
  }
  return total / static_cast<double>(released.size());
}

double defender_loss(ObjectiveMode mode, double privacy_term,
                     double utility_term, double budget, double penalty) {
  switch (mode) {
    case ObjectiveMode::kPreference:
      return privacy_term + utility_term;
    case ObjectiveMode::kPrivacyBudget:
      if (!(penalty > 0.0)) {
        throw ParameterError("defender_loss: penalty must be positive");
      }
      return utility_term + penalty * std::max(0.0, privacy_term - budget);
    case ObjectiveMode::kUtilityBudget:
      if (!(penalty > 0.0)) {
        throw ParameterError("defender_loss: penalty must be positive");
      }
      return privacy_term + penalty * std::max(0.0, utility_term - budget);
  }
  throw ParameterError("defender_loss: unknown mode");
}

MembershipVector sample_nonempty(const MembershipPrior& prior, Rng& rng,
                                 std::size_t* rejections) {
  for (;;) {
    MembershipVector b = prior.sample(rng);
    if (b.count_ones() > 0) return b;
    if (rejections) ++*rejections;
  }
}

NoiseVector generator_forward(nn::Mlp& generator, const MembershipVector& b,
                              const std::vector<double>& aux) {
  const std::size_t width = b.size() + aux.size();
  if (generator.input_width() != width) {
    throw ParameterError("generator_forward: input width != K + q");
  }
  nn::Matrix input(1, static_cast<Eigen::Index>(width));
  for (std::size_t k = 0; k < b.size(); ++k) {
    input(0, static_cast<Eigen::Index>(k)) = b.bits[k];
  }
  for (std::size_t j = 0; j < aux.size(); ++j) {
    input(0, static_cast<Eigen::Index>(b.size() + j)) = aux[j];
  }
  const nn::Matrix out = generator.forward(input, nn::Mode::kEval);
  NoiseVector noise;
  noise.bound = 0.5;
  noise.values.resize(static_cast<std::size_t>(out.cols()));
  for (std::size_t j = 0; j < noise.values.size(); ++j) {
    noise.values[j] = out(0, static_cast<Eigen::Index>(j));
  }
  return noise;
}

attack::ReleaseSampler generator_release_sampler(
    const PopulationDataset& dataset, nn::Mlp generator, std::size_t aux_dim) {
  auto frozen = std::make_shared<nn::Mlp>(std::move(generator));
  auto data = std::make_shared<PopulationDataset>(dataset);
  return [frozen, data, aux_dim](const MembershipVector& b, Rng& rng) {
    std::vector<double> aux(aux_dim);
    for (double& v : aux) v = rng.uniform();
    const NoiseVector noise = generator_forward(*frozen, b, aux);
    const SummaryStats raw = summary_statistics(*data, b);
    return perturb_output(raw, noise).values;
  };
}

attack::ReleaseSampler identity_release_sampler(
    const PopulationDataset& dataset) {
  auto data = std::make_shared<PopulationDataset>(dataset);
  return [data](const MembershipVector& b, Rng&) {
    return summary_statistics(*data, b).values;
  };
}

attack::ReleaseSampler laplace_release_sampler(
    const PopulationDataset& dataset, DpParams params) {
  auto data = std::make_shared<PopulationDataset>(dataset);
  return [data, params](const MembershipVector& b, Rng& rng) {
    const SummaryStats raw = summary_statistics(*data, b);
    return laplace_mechanism(raw, params, rng).released.values;
  };
}

namespace {

// Dense copies used by the training loops.
struct TrainingData {
  nn::Matrix records;       // K x m
  std::vector<double> reference;
  double p_floor = kPFloor;
};

TrainingData make_training_data(const PopulationDataset& dataset) {
  TrainingData data;
  data.records.resize(
      static_cast<Eigen::Index>(dataset.population_size()),
      static_cast<Eigen::Index>(dataset.attribute_count()));
  for (std::size_t k = 0; k < dataset.population_size(); ++k) {
    for (std::size_t j = 0; j < dataset.attribute_count(); ++j) {
      data.records(static_cast<Eigen::Index>(k),
                   static_cast<Eigen::Index>(j)) = dataset.bit(k, j);
    }
  }
  data.reference = dataset.reference_frequencies();
  data.p_floor = dataset.p_floor();
  return data;
}

struct GeneratorBatch {
  nn::Matrix inputs;      // batch x (K + q)
  nn::Matrix memberships;  // batch x K
  nn::Matrix raw;         // batch x m, f(D_b) per row
};

GeneratorBatch sample_generator_batch(const MembershipPrior& prior,
                                      const TrainingData& data,
                                      std::size_t batch, std::size_t aux_dim,
                                      Rng& rng, std::size_t* rejections) {
  const std::size_t k = prior.population_size();
  GeneratorBatch out;
  out.inputs.resize(static_cast<Eigen::Index>(batch),
                    static_cast<Eigen::Index>(k + aux_dim));
  out.memberships.resize(static_cast<Eigen::Index>(batch),
                         static_cast<Eigen::Index>(k));
  for (std::size_t row = 0; row < batch; ++row) {
    const MembershipVector b = sample_nonempty(prior, rng, rejections);
    for (std::size_t i = 0; i < k; ++i) {
      out.inputs(row, static_cast<Eigen::Index>(i)) = b.bits[i];
      out.memberships(row, static_cast<Eigen::Index>(i)) = b.bits[i];
    }
    for (std::size_t j = 0; j < aux_dim; ++j) {
      out.inputs(row, static_cast<Eigen::Index>(k + j)) = rng.uniform();
    }
  }
  const nn::Matrix counts = out.memberships.rowwise().sum();
  out.raw = out.memberships * data.records;
  for (Eigen::Index r = 0; r < out.raw.rows(); ++r) {
    out.raw.row(r) /= counts(r, 0);
  }
  return out;
}

// Released batch x = clip(raw + noise) plus the clip subgradient mask.
struct ReleasedBatch {
  nn::Matrix released;
  nn::Matrix mask;  // 1 strictly inside [0,1], 0 at saturated coordinates
  double saturated_fraction = 0.0;
};

ReleasedBatch clip_batch(const nn::Matrix& raw, const nn::Matrix& noise) {
  ReleasedBatch out;
  const nn::Matrix sum = raw + noise;
  out.released = sum;
  out.mask.resize(sum.rows(), sum.cols());
  std::size_t saturated = 0;
  for (Eigen::Index r = 0; r < sum.rows(); ++r) {
    for (Eigen::Index c = 0; c < sum.cols(); ++c) {
      double v = sum(r, c);
      if (v <= 0.0) {
        out.released(r, c) = 0.0;
        out.mask(r, c) = 0.0;
        ++saturated;
      } else if (v >= 1.0) {
        out.released(r, c) = 1.0;
        out.mask(r, c) = 0.0;
        ++saturated;
      } else {
        out.mask(r, c) = 1.0;
      }
    }
  }
  out.saturated_fraction =
      static_cast<double>(saturated) / static_cast<double>(sum.size());
  return out;
}

// Utility value and gradient with respect to the released batch, averaged
// over rows.
struct UtilityTerm {
  double value = 0.0;
  nn::Matrix grad;
};

UtilityTerm utility_term_batch(const DefenderConfig& def,
                               const nn::Matrix& released,
                               const nn::Matrix& raw) {
  UtilityTerm term;
  term.grad = nn::Matrix::Zero(released.rows(), released.cols());
  const double rows = static_cast<double>(released.rows());
  const double m = static_cast<double>(released.cols());
  for (Eigen::Index r = 0; r < released.rows(); ++r) {
    if (def.kappa_is_vector()) {
      for (Eigen::Index j = 0; j < released.cols(); ++j) {
        const double delta = released(r, j) - raw(r, j);
        const double kappa = def.kappa_vector[static_cast<std::size_t>(j)];
        term.value += kappa * std::abs(delta) / m;
        term.grad(r, j) =
            kappa * (delta >= 0.0 ? 1.0 : -1.0) / m / rows;
      }
    } else {
      const double p = def.norm_order;
      double norm = 0.0;
      for (Eigen::Index j = 0; j < released.cols(); ++j) {
        norm += std::pow(std::abs(released(r, j) - raw(r, j)), p);
      }
      norm = std::pow(norm, 1.0 / p);
      term.value += def.kappa * norm / m;
      if (norm > 0.0) {
        for (Eigen::Index j = 0; j < released.cols(); ++j) {
          const double delta = released(r, j) - raw(r, j);
          term.grad(r, j) = def.kappa / m / rows *
                            std::pow(std::abs(delta), p - 1.0) *
                            (delta >= 0.0 ? 1.0 : -1.0) *
                            std::pow(norm, 1.0 - p);
        }
      }
    }
  }
  term.value /= rows;
  return term;
}

// Combines privacy/utility gradients per the objective mode, mirroring
// defender_loss with its hinge surrogate.
nn::Matrix combine_gradients(const DefenderConfig& def, double privacy_value,
                             double utility_value,
                             const nn::Matrix& privacy_grad,
                             const nn::Matrix& utility_grad) {
  switch (def.mode) {
    case ObjectiveMode::kPreference:
      return privacy_grad + utility_grad;
    case ObjectiveMode::kPrivacyBudget:
      if (privacy_value > def.budget) {
        return utility_grad + def.penalty * privacy_grad;
      }
      return utility_grad;
    case ObjectiveMode::kUtilityBudget:
      if (utility_value > def.budget) {
        return privacy_grad + def.penalty * utility_grad;
      }
      return privacy_grad;
  }
  throw ParameterError("combine_gradients: unknown mode");
}

nn::MlpConfig generator_config(const DefenderConfig& def, std::size_t k,
                               std::size_t m) {
  nn::MlpConfig config;
  config.layer_widths.push_back(k + def.aux_dim);
  for (std::size_t w : def.hidden_widths) config.layer_widths.push_back(w);
  config.layer_widths.push_back(m);
  config.hidden_activation = nn::HiddenActivation::kLeakyRelu;
  config.output_activation = nn::OutputActivation::kScaledSigmoid;
  config.batch_norm = def.batch_norm;
  config.seed = def.seed;
  return config;
}

}  // namespace

GameResult train_bngp(const PopulationDataset& dataset,
                      const MembershipPrior& prior, const DefenderConfig& def,
                      const attack::AttackConfig& att, Rng& rng) {
  if (prior.population_size() != dataset.population_size()) {
    throw ParameterError("train_bngp: prior/dataset K mismatch");
  }
  if (def.kappa_is_vector() &&
      def.kappa_vector.size() != dataset.attribute_count()) {
    throw ParameterError("train_bngp: kappa vector length != m");
  }
  if (def.attacker_steps < 1) {
    throw ParameterError("train_bngp: need at least one attacker step");
  }
  const std::size_t k = dataset.population_size();
  const std::size_t m = dataset.attribute_count();
  const TrainingData data = make_training_data(dataset);

  nn::Mlp generator(generator_config(def, k, m));

  nn::MlpConfig att_config;
  att_config.layer_widths.push_back(m);
  for (std::size_t w : att.hidden_widths) {
    att_config.layer_widths.push_back(w);
  }
  att_config.layer_widths.push_back(k);
  att_config.hidden_activation = nn::HiddenActivation::kRelu;
  att_config.output_activation = nn::OutputActivation::kSigmoid;
  att_config.batch_norm = att.batch_norm;
  att_config.seed = att.seed + 1;
  nn::Mlp discriminator(att_config);

  nn::OptimizerState gen_opt = nn::make_optimizer(
      generator, def.learning_rate, def.weight_decay, def.decay_rate);
  nn::OptimizerState att_opt = nn::make_optimizer(
      discriminator, att.learning_rate, att.weight_decay, att.decay_rate);

  GameResult result{std::move(generator), std::move(discriminator)};
  nn::Mlp& gen = result.generator;
  nn::Mlp& dis = result.discriminator;

  std::size_t rejections = 0;
  std::size_t samples = 0;
  double best_loss = 1e300;
  std::size_t rounds_since_best = 0;
  result.stop_reason = "round budget";

  for (std::size_t round = 0; round < def.rounds; ++round) {
    // Discriminator updates on fresh minibatches through the current G.
    double cel_value = 0.0;
    for (std::size_t it = 0; it < def.attacker_steps; ++it) {
      GeneratorBatch batch = sample_generator_batch(prior, data, def.batch,
                                                    def.aux_dim, rng,
                                                    &rejections);
      samples += def.batch;
      const nn::Matrix noise = gen.forward(batch.inputs, nn::Mode::kTrain);
      const ReleasedBatch release = clip_batch(batch.raw, noise);
      const nn::Matrix p = dis.forward(release.released, nn::Mode::kTrain);
      nn::Matrix grad(p.rows(), p.cols());
      cel_value = 0.0;
      for (Eigen::Index r = 0; r < p.rows(); ++r) {
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
          const double clamped = std::min(1.0 - kScoreClamp,
                                          std::max(kScoreClamp, p(r, c)));
          const double target = batch.memberships(r, c);
          cel_value -= target * std::log(clamped) +
                       (1.0 - target) * std::log(1.0 - clamped);
          grad(r, c) = (clamped - target) /
                       (clamped * (1.0 - clamped) *
                        static_cast<double>(p.rows()));
        }
      }
      cel_value /= static_cast<double>(p.rows());
      if (!std::isfinite(cel_value)) {
        throw TrainingError("train_bngp: non-finite attacker loss at round " +
                            std::to_string(round));
      }
      nn::adam_step(dis, dis.backward(grad), att_opt);
    }

    // One generator update: privacy term is the negated attacker CEL.
    GeneratorBatch batch = sample_generator_batch(prior, data, def.batch,
                                                  def.aux_dim, rng,
                                                  &rejections);
    samples += def.batch;
    const nn::Matrix noise = gen.forward(batch.inputs, nn::Mode::kTrain);
    const ReleasedBatch release = clip_batch(batch.raw, noise);
    const nn::Matrix p = dis.forward(release.released, nn::Mode::kTrain);
    double cel = 0.0;
    nn::Matrix dcel_dp(p.rows(), p.cols());
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        const double clamped = std::min(1.0 - kScoreClamp,
                                        std::max(kScoreClamp, p(r, c)));
        const double target = batch.memberships(r, c);
        cel -= target * std::log(clamped) +
               (1.0 - target) * std::log(1.0 - clamped);
        // Negated: the defender maximizes the attacker's CEL.
        dcel_dp(r, c) = -(clamped - target) /
                        (clamped * (1.0 - clamped) *
                         static_cast<double>(p.rows()));
      }
    }
    cel /= static_cast<double>(p.rows());
    const double privacy_value = -cel;
    const nn::Gradients dis_grads = dis.backward(dcel_dp);
    const nn::Matrix privacy_grad = dis_grads.input;  // d(-CEL)/d(released)

    const UtilityTerm utility = utility_term_batch(def, release.released,
                                                   batch.raw);
    nn::Matrix dx = combine_gradients(def, privacy_value, utility.value,
                                      privacy_grad, utility.grad);
    dx = dx.array() * release.mask.array();
    nn::adam_step(gen, gen.backward(dx), gen_opt);

    const double loss_value = defender_loss(def.mode, privacy_value,
                                            utility.value, def.budget,
                                            def.penalty);
    if (!std::isfinite(loss_value)) {
      throw TrainingError("train_bngp: non-finite defender loss at round " +
                          std::to_string(round));
    }
    result.defender_loss_trace.push_back(loss_value);
    result.attacker_cel_trace.push_back(cel_value);
    result.utility_trace.push_back(utility.value);
    result.saturation_trace.push_back(release.saturated_fraction);
    result.rounds_run = round + 1;

    if (def.epoch_rounds > 0 && (round + 1) % def.epoch_rounds == 0) {
      nn::decay_learning_rate(gen_opt);
      nn::decay_learning_rate(att_opt);
    }
    if (def.patience > 0) {
      if (loss_value < best_loss - 1e-6) {
        best_loss = loss_value;
        rounds_since_best = 0;
      } else if (++rounds_since_best >= def.patience) {
        result.stop_reason = "plateau";
        break;
      }
    }
  }
  result.empty_rejection_rate =
      samples > 0 ? static_cast<double>(rejections) /
                        static_cast<double>(samples + rejections)
                  : 0.0;

  // In-loop evaluation with the co-trained discriminator.
  std::vector<double> pooled_scores;
  std::vector<std::uint8_t> pooled_labels;
  double tp = 0.0, fp = 0.0, abs_noise = 0.0, util_total = 0.0;
  for (std::size_t draw = 0; draw < def.eval_draws; ++draw) {
    const MembershipVector b = sample_nonempty(prior, rng, nullptr);
    std::vector<double> aux(def.aux_dim);
    for (double& v : aux) v = rng.uniform();
    const NoiseVector noise = generator_forward(gen, b, aux);
    SummaryStats raw{std::vector<double>(m, 0.0)};
    {
      const std::size_t members = b.count_ones();
      for (std::size_t i = 0; i < k; ++i) {
        if (!b.bits[i]) continue;
        for (std::size_t j = 0; j < m; ++j) {
          raw.values[j] += data.records(static_cast<Eigen::Index>(i),
                                        static_cast<Eigen::Index>(j));
        }
      }
      for (double& v : raw.values) v /= static_cast<double>(members);
    }
    const SummaryStats released = perturb_output(raw, noise);
    for (double v : noise.values) abs_noise += std::abs(v);
    util_total += def.kappa_is_vector()
                      ? utility_loss(released, raw, def.kappa_vector)
                      : utility_loss(released, raw, def.kappa,
                                     def.norm_order);
    nn::Matrix input(1, static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      input(0, static_cast<Eigen::Index>(j)) = released.values[j];
    }
    const nn::Matrix scores = dis.forward(input, nn::Mode::kEval);
    for (std::size_t i = 0; i < k; ++i) {
      if (prior.marginal(i) <= 0.0) continue;  // held-out reference rows
      const double s = scores(0, static_cast<Eigen::Index>(i));
      pooled_scores.push_back(s);
      pooled_labels.push_back(b.bits[i]);
      if (s >= 0.5) {
        if (b.bits[i]) {
          tp += 1.0;
        } else {
          fp += 1.0;
        }
      }
    }
  }
  if (def.eval_draws > 0) {
    result.mean_abs_noise = abs_noise / (static_cast<double>(def.eval_draws) *
                                         static_cast<double>(m));
    result.mean_utility_loss =
        util_total / static_cast<double>(def.eval_draws);
    result.final_auc = roc_auc(pooled_scores, pooled_labels).auc;
    const double draws = static_cast<double>(def.eval_draws);
    for (int g = 1; g <= 10; ++g) {
      const double gamma = 0.1 * g;
      result.bwma_by_gamma.emplace_back(
          gamma, (1.0 - gamma) * tp / draws - gamma * fp / draws);
    }
  }
  result.seed = def.seed;
  return result;
}

namespace {

// Per-row LRT surrogate privacy term and its gradient w.r.t. the release.
struct LrtTerm {
  double value = 0.0;
  nn::Matrix grad;
};

LrtTerm lrt_privacy_term(const TrainingData& data, const LrtConfig& lrt,
                         const nn::Matrix& released,
                         const nn::Matrix& memberships) {
  const Eigen::Index rows = released.rows();
  const Eigen::Index m = released.cols();
  const Eigen::Index k = memberships.cols();
  LrtTerm term;
  term.grad = nn::Matrix::Zero(rows, m);

  for (Eigen::Index r = 0; r < rows; ++r) {
    // Clamped frequencies and per-attribute lrs derivative pieces.
    std::vector<double> xc(m), dmask(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double x = released(r, j);
      xc[j] = clamp_unit_interval(x, data.p_floor);
      dmask[j] = (x > data.p_floor && x < 1.0 - data.p_floor) ? 1.0 : 0.0;
    }
    auto lrs_of = [&](Eigen::Index row_id, std::vector<double>* grad_out) {
      double value = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        const double d = data.records(row_id, j);
        const double pbar = clamp_unit_interval(
            data.reference[static_cast<std::size_t>(j)], data.p_floor);
        value += d * std::log(pbar / xc[j]) +
                 (1.0 - d) * std::log((1.0 - pbar) / (1.0 - xc[j]));
        if (grad_out) {
          (*grad_out)[static_cast<std::size_t>(j)] =
              (-d / xc[j] + (1.0 - d) / (1.0 - xc[j])) * dmask[j];
        }
      }
      return value;
    };

    double tau = lrt.tau;
    std::vector<double> dtau(m, 0.0);
    if (lrt.variant == LrtConfig::Variant::kAdaptive) {
      // tau(x) = mean of the N smallest reference LRS values; the gradient
      // flows through the selected reference rows.
      std::vector<std::pair<double, std::size_t>> reference;
      reference.reserve(lrt.reference_ids.size());
      for (std::size_t id : lrt.reference_ids) {
        reference.emplace_back(
            lrs_of(static_cast<Eigen::Index>(id), nullptr), id);
      }
      std::partial_sort(reference.begin(), reference.begin() + lrt.n,
                        reference.end());
      tau = 0.0;
      std::vector<double> grad_i(m);
      for (std::size_t i = 0; i < lrt.n; ++i) {
        tau += reference[i].first;
        lrs_of(static_cast<Eigen::Index>(reference[i].second), &grad_i);
        for (Eigen::Index j = 0; j < m; ++j) {
          dtau[j] += grad_i[static_cast<std::size_t>(j)] /
                     static_cast<double>(lrt.n);
        }
      }
      tau /= static_cast<double>(lrt.n);
    }

    std::vector<double> grad_k(m);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (memberships(r, i) <= 0.0) continue;
      const double l = lrs_of(i, &grad_k);
      const double s = sigmoid(tau - l);
      term.value += s;
      const double slope = s * (1.0 - s);
      for (Eigen::Index j = 0; j < m; ++j) {
        term.grad(r, j) += slope * (dtau[j] - grad_k[static_cast<std::size_t>(j)]);
      }
    }
  }
  term.value /= static_cast<double>(rows);
  term.grad /= static_cast<double>(rows);
  return term;
}

}  // namespace

LrtDefenderResult train_lrt_best_response_defender(
    const PopulationDataset& dataset, const MembershipPrior& prior,
    const DefenderConfig& def, const LrtConfig& lrt, Rng& rng) {
  if (lrt.variant == LrtConfig::Variant::kAdaptive) {
    if (lrt.reference_ids.empty() || lrt.n == 0 ||
        lrt.n > lrt.reference_ids.size()) {
      throw ParameterError(
          "train_lrt_best_response_defender: bad adaptive reference set");
    }
  }
  const std::size_t k = dataset.population_size();
  const std::size_t m = dataset.attribute_count();
  const TrainingData data = make_training_data(dataset);

  LrtDefenderResult result{nn::Mlp(generator_config(def, k, m)), {}, {}};
  nn::Mlp& gen = result.generator;
  nn::OptimizerState gen_opt = nn::make_optimizer(
      gen, def.learning_rate, def.weight_decay, def.decay_rate);

  for (std::size_t round = 0; round < def.rounds; ++round) {
    GeneratorBatch batch = sample_generator_batch(prior, data, def.batch,
                                                  def.aux_dim, rng, nullptr);
    const nn::Matrix noise = gen.forward(batch.inputs, nn::Mode::kTrain);
    const ReleasedBatch release = clip_batch(batch.raw, noise);
    const LrtTerm privacy = lrt_privacy_term(data, lrt, release.released,
                                             batch.memberships);
    const UtilityTerm utility = utility_term_batch(def, release.released,
                                                   batch.raw);
    nn::Matrix dx = combine_gradients(def, privacy.value, utility.value,
                                      privacy.grad, utility.grad);
    dx = dx.array() * release.mask.array();
    nn::adam_step(gen, gen.backward(dx), gen_opt);

    const double loss_value = defender_loss(def.mode, privacy.value,
                                            utility.value, def.budget,
                                            def.penalty);
    if (!std::isfinite(loss_value)) {
      throw TrainingError(
          "train_lrt_best_response_defender: non-finite loss at round " +
          std::to_string(round));
    }
    result.loss_trace.push_back(loss_value);
    result.utility_trace.push_back(utility.value);
    if (def.epoch_rounds > 0 && (round + 1) % def.epoch_rounds == 0) {
      nn::decay_learning_rate(gen_opt);
    }
  }
  return result;
}

DpParams calibrate_dp_epsilon(double target_mean_abs_noise, std::size_t m,
                              std::size_t k_dagger) {
  if (!(target_mean_abs_noise > 0.0)) {
    throw ParameterError("calibrate_dp_epsilon: target must be positive");
  }
  DpParams params;
  params.sensitivity = sensitivity_frequency(m, k_dagger);
  params.epsilon = params.sensitivity / target_mean_abs_noise;
  params.delta = 0.0;
  return params;
}

}  // namespace bngp::defense
