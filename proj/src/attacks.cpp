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
#include "bngp/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bngp::attack {

double cel_loss(const std::vector<double>& scores, const MembershipVector& b,
                double score_clamp) {
  if (scores.size() != b.size()) {
    throw ParameterError("cel_loss: scores/membership length mismatch");
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const double p = std::min(1.0 - score_clamp,
                              std::max(score_clamp, scores[k]));
    loss -= b.bits[k] ? std::log(p) : std::log(1.0 - p);
  }
  return loss;
}

double attacker_loss(const std::vector<std::uint8_t>& decisions,
                     const MembershipVector& b, double gamma) {
  if (decisions.size() != b.size()) {
    throw ParameterError("attacker_loss: decisions/membership mismatch");
  }
  double true_positives = 0.0;
  double claims = 0.0;
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    if (!decisions[k]) continue;
    claims += 1.0;
    if (b.bits[k]) true_positives += 1.0;
  }
  return -true_positives + gamma * claims;
}

BwmaEstimate bwma(const ScoringFunction& attacker,
                  const ReleaseSampler& sampler, const MembershipPrior& prior,
                  double gamma, std::size_t mc_trials, Rng& rng,
                  double threshold) {
  if (mc_trials == 0) throw ParameterError("bwma: mc_trials must be >= 1");
  const std::size_t k = prior.population_size();
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t t = 0; t < mc_trials; ++t) {
    const MembershipVector b = prior.sample(rng);
    const std::vector<double> release = sampler(b, rng);
    const std::vector<double> scores = attacker(release);
    if (scores.size() != k) {
      throw ContractError("bwma: attacker emitted wrong score count");
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
        throw ContractError("bwma: attacker emitted out-of-range score");
      }
      if (scores[i] >= threshold) {  // ties claim
        if (b.bits[i]) {
          tp += 1.0;
        } else {
          fp += 1.0;
        }
      }
    }
  }
  BwmaEstimate estimate;
  estimate.tpr = tp / static_cast<double>(mc_trials);
  estimate.fpr = fp / static_cast<double>(mc_trials);
  estimate.advantage = (1.0 - gamma) * estimate.tpr - gamma * estimate.fpr;
  return estimate;
}

std::vector<double> BgpResponse::scores(const std::vector<double>& release) {
  nn::Matrix batch(1, static_cast<Eigen::Index>(release.size()));
  for (std::size_t j = 0; j < release.size(); ++j) {
    batch(0, static_cast<Eigen::Index>(j)) = release[j];
  }
  const nn::Matrix out = discriminator.forward(batch, nn::Mode::kEval);
  std::vector<double> result(static_cast<std::size_t>(out.cols()));
  for (std::size_t i = 0; i < result.size(); ++i) {
    result[i] = out(0, static_cast<Eigen::Index>(i));
  }
  return result;
}

ScoringFunction BgpResponse::scoring_function() {
  return [this](const std::vector<double>& release) { return scores(release); };
}

BgpResponse train_bgp_response(const ReleaseSampler& sampler,
                               const MembershipPrior& prior,
                               const AttackConfig& config, Rng& rng) {
  const std::size_t k = prior.population_size();
  // Probe one release to size the input layer.
  MembershipVector probe_b = prior.sample(rng);
  const std::size_t input_width = sampler(probe_b, rng).size();

  nn::MlpConfig net_config;
  net_config.layer_widths.push_back(input_width);
  for (std::size_t w : config.hidden_widths) {
    net_config.layer_widths.push_back(w);
  }
  net_config.layer_widths.push_back(k);
  net_config.hidden_activation = nn::HiddenActivation::kRelu;
  net_config.output_activation = nn::OutputActivation::kSigmoid;
  net_config.batch_norm = config.batch_norm;
  net_config.seed = config.seed;

  BgpResponse response{nn::Mlp(net_config), {}};
  nn::Mlp& net = response.discriminator;
  nn::OptimizerState optimizer = nn::make_optimizer(
      net, config.learning_rate, config.weight_decay, config.decay_rate);

  const std::size_t batch = std::max<std::size_t>(1, config.batch);
  nn::Matrix inputs(batch, static_cast<Eigen::Index>(input_width));
  nn::Matrix targets(batch, static_cast<Eigen::Index>(k));
  for (std::size_t step = 0; step < config.steps; ++step) {
    for (std::size_t row = 0; row < batch; ++row) {
      const MembershipVector b = prior.sample(rng);
      const std::vector<double> release = sampler(b, rng);
      if (release.size() != input_width) {
        throw ContractError("train_bgp_response: release width changed");
      }
      for (std::size_t j = 0; j < input_width; ++j) {
        inputs(row, static_cast<Eigen::Index>(j)) = release[j];
      }
      for (std::size_t i = 0; i < k; ++i) {
        targets(row, static_cast<Eigen::Index>(i)) = b.bits[i];
      }
    }
    const nn::Matrix p = net.forward(inputs, nn::Mode::kTrain);
    // Mean-over-batch CEL; gradient (p - b) / (p (1 - p)) with clamped p.
    double loss = 0.0;
    nn::Matrix grad(p.rows(), p.cols());
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        const double clamped = std::min(1.0 - kScoreClamp,
                                        std::max(kScoreClamp, p(r, c)));
        const double target = targets(r, c);
        loss -= target * std::log(clamped) +
                (1.0 - target) * std::log(1.0 - clamped);
        grad(r, c) = (clamped - target) /
                     (clamped * (1.0 - clamped) * static_cast<double>(batch));
      }
    }
    loss /= static_cast<double>(batch);
    if (!std::isfinite(loss)) {
      throw TrainingError("train_bgp_response: non-finite loss at step " +
                          std::to_string(step));
    }
    response.loss_trace.push_back(loss);
    nn::adam_step(net, net.backward(grad), optimizer);
    if (config.steps_per_epoch > 0 &&
        (step + 1) % config.steps_per_epoch == 0) {
      nn::decay_learning_rate(optimizer);
    }
  }
  return response;
}

double lrs(const std::uint8_t* genotype, std::size_t attribute_count,
           const std::vector<double>& released,
           const std::vector<double>& reference, double p_floor) {
  if (released.size() != attribute_count ||
      reference.size() != attribute_count) {
    throw ParameterError("lrs: dimension mismatch");
  }
  double statistic = 0.0;
  for (std::size_t j = 0; j < attribute_count; ++j) {
    const double x = clamp_unit_interval(released[j], p_floor);
    const double p = clamp_unit_interval(reference[j], p_floor);
    statistic += genotype[j] ? std::log(p / x)
                             : std::log((1.0 - p) / (1.0 - x));
  }
  return statistic;
}

std::vector<double> lrs_all(const PopulationDataset& dataset,
                            const SummaryStats& released) {
  const std::size_t m = dataset.attribute_count();
  std::vector<double> values(dataset.population_size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = lrs(dataset.record(k), m, released.values,
                    dataset.reference_frequencies(), dataset.p_floor());
  }
  return values;
}

namespace {

AttackScores scores_from_rankings(std::vector<double> rankings,
                                  std::vector<std::uint8_t> hard) {
  AttackScores scores;
  const auto [lo, hi] = std::minmax_element(rankings.begin(), rankings.end());
  const double span = *hi - *lo;
  scores.soft.resize(rankings.size());
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    scores.soft[i] = span > 0.0 ? (rankings[i] - *lo) / span : 0.5;
  }
  scores.ranking = std::move(rankings);
  scores.hard = std::move(hard);
  return scores;
}

}  // namespace

AttackScores fixed_lrt_attack(const PopulationDataset& dataset,
                              const SummaryStats& released, double tau) {
  const std::vector<double> statistics = lrs_all(dataset, released);
  std::vector<double> rankings(statistics.size());
  std::vector<std::uint8_t> hard(statistics.size());
  for (std::size_t k = 0; k < statistics.size(); ++k) {
    rankings[k] = -statistics[k];
    hard[k] = statistics[k] <= tau ? 1 : 0;
  }
  return scores_from_rankings(std::move(rankings), std::move(hard));
}

AdaptiveLrtResult adaptive_lrt_attack(const PopulationDataset& dataset,
                                      const SummaryStats& released,
                                      const std::vector<std::size_t>&
                                          reference_ids,
                                      std::size_t n) {
  if (reference_ids.empty()) {
    throw ParameterError("adaptive_lrt_attack: empty reference set");
  }
  if (n == 0 || n > reference_ids.size()) {
    throw ParameterError("adaptive_lrt_attack: need 1 <= N <= |reference|");
  }
  const std::vector<double> statistics = lrs_all(dataset, released);
  std::vector<double> reference_lrs;
  reference_lrs.reserve(reference_ids.size());
  for (std::size_t id : reference_ids) {
    if (id >= statistics.size()) {
      throw ParameterError("adaptive_lrt_attack: reference id out of range");
    }
    reference_lrs.push_back(statistics[id]);
  }
  std::partial_sort(reference_lrs.begin(), reference_lrs.begin() + n,
                    reference_lrs.end());
  double tau = 0.0;
  for (std::size_t i = 0; i < n; ++i) tau += reference_lrs[i];
  tau /= static_cast<double>(n);

  AdaptiveLrtResult result;
  result.tau = tau;
  result.scores = fixed_lrt_attack(dataset, released, tau);
  return result;
}

std::vector<double> optimal_lrt_scores(const DiscreteMechanism& mechanism,
                                       const MembershipPrior& prior,
                                       std::size_t symbol) {
  const std::size_t k = mechanism.membership_size();
  if (k > 12) {
    throw CapabilityError(
        "optimal_lrt_scores: K exceeds the enumeration guard; use the Monte "
        "Carlo attack evaluators");
  }
  if (prior.population_size() != k) {
    throw ParameterError("optimal_lrt_scores: prior/mechanism K mismatch");
  }
  const std::size_t members = std::size_t{1} << k;
  // P[x, b_k = v] accumulated over all memberships.
  std::vector<double> mass_one(k, 0.0);
  std::vector<double> mass_zero(k, 0.0);
  for (std::size_t index = 0; index < members; ++index) {
    const MembershipVector b = membership_from_index(index, k);
    const double pb = prior.pmf(b);
    if (pb <= 0.0) continue;
    const double w = pb * mechanism.pmf(symbol, b);
    for (std::size_t i = 0; i < k; ++i) {
      if ((index >> i) & 1) {
        mass_one[i] += w;
      } else {
        mass_zero[i] += w;
      }
    }
  }
  std::vector<double> ratios(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double p1 = prior.marginal(i);
    const double p0 = 1.0 - p1;
    const double like1 = p1 > 0.0 ? mass_one[i] / p1 : 0.0;
    const double like0 = p0 > 0.0 ? mass_zero[i] / p0 : 0.0;
    if (like1 <= 0.0) {
      ratios[i] = std::numeric_limits<double>::infinity();
    } else {
      ratios[i] = like0 / like1;
    }
  }
  return ratios;
}

double score_attack(const std::uint8_t* genotype, std::size_t attribute_count,
                    const std::vector<double>& released,
                    const std::vector<double>& reference, double p_floor) {
  if (released.size() != attribute_count ||
      reference.size() != attribute_count) {
    throw ParameterError("score_attack: dimension mismatch");
  }
  double score = 0.0;
  for (std::size_t j = 0; j < attribute_count; ++j) {
    const double x = clamp_unit_interval(released[j], p_floor);
    const double p = clamp_unit_interval(reference[j], p_floor);
    score += (static_cast<double>(genotype[j]) - p) * (x - p);
  }
  return score;
}

AttackScores score_attack_all(const PopulationDataset& dataset,
                              const SummaryStats& released, double threshold) {
  const std::size_t m = dataset.attribute_count();
  std::vector<double> rankings(dataset.population_size());
  std::vector<std::uint8_t> hard(dataset.population_size());
  for (std::size_t k = 0; k < rankings.size(); ++k) {
    rankings[k] = score_attack(dataset.record(k), m, released.values,
                               dataset.reference_frequencies(),
                               dataset.p_floor());
    hard[k] = rankings[k] >= threshold ? 1 : 0;
  }
  return scores_from_rankings(std::move(rankings), std::move(hard));
}

std::vector<double> bit_features(std::size_t symbol, std::size_t k) {
  std::vector<double> features(k);
  for (std::size_t i = 0; i < k; ++i) {
    features[i] = static_cast<double>((symbol >> i) & 1);
  }
  return features;
}

}  // namespace bngp::attack
