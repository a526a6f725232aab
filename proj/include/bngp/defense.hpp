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
#ifndef BNGP_DEFENSE_HPP_
#define BNGP_DEFENSE_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bngp/attacks.hpp"
#include "bngp/mechanisms.hpp"
#include "bngp/neural.hpp"

namespace bngp::defense {

enum class ObjectiveMode { kPreference, kPrivacyBudget, kUtilityBudget };

// Scalar mode: kappa * ell_u(||x - xhat||_p / m). Vector mode:
// sum_j kappa_j |x_j - xhat_j| / m. Per-attribute normalization keeps the
// scalar comparable to a per-coordinate Laplace scale.
double utility_loss(const SummaryStats& released, const SummaryStats& raw,
                    double kappa, double norm_order,
                    const std::function<double(double)>& ell_u = nullptr);
double utility_loss(const SummaryStats& released, const SummaryStats& raw,
                    const std::vector<double>& kappa);

// Preference mode adds the terms; budget modes use a hinge surrogate
// penalty * max(0, violation) for the infeasible region.
double defender_loss(ObjectiveMode mode, double privacy_term,
                     double utility_term, double budget, double penalty);

struct DefenderConfig {
  ObjectiveMode mode = ObjectiveMode::kPreference;
  double budget = 0.0;
  double penalty = 100.0;
  double kappa = 1.0;
  std::vector<double> kappa_vector;  // per-attribute weights; empty = scalar
  double norm_order = 1.0;
  std::vector<std::size_t> hidden_widths = {64, 64};
  bool batch_norm = true;
  std::uint64_t seed = 0;
  std::size_t aux_dim = 8;
  std::size_t rounds = 400;
  std::size_t attacker_steps = 5;  // discriminator updates per generator step
  std::size_t batch = 64;
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  double decay_rate = 0.988;
  std::size_t epoch_rounds = 50;
  std::size_t patience = 0;      // rounds without improvement; 0 disables
  std::size_t eval_draws = 200;  // draws for the in-loop final metrics

  bool kappa_is_vector() const { return !kappa_vector.empty(); }
};

struct LrtConfig {
  enum class Variant { kFixed, kAdaptive };
  Variant variant = Variant::kFixed;
  double tau = 0.0;
  std::vector<std::size_t> reference_ids;
  std::size_t n = 0;
};

// Resamples until the membership is nonempty (summary statistics are
// undefined on the empty set); counts rejections when asked.
MembershipVector sample_nonempty(const MembershipPrior& prior, Rng& rng,
                                 std::size_t* rejections = nullptr);

// Noise from the generator for one (b, r) pair; eval mode, so deterministic
// given parameters. The scaled-sigmoid output keeps it inside (-0.5, 0.5)^m.
NoiseVector generator_forward(nn::Mlp& generator, const MembershipVector& b,
                              const std::vector<double>& aux);

// Release sampler x = clip(f(D_b) + G(b, r)) for a frozen generator.
attack::ReleaseSampler generator_release_sampler(
    const PopulationDataset& dataset, nn::Mlp generator, std::size_t aux_dim);

// Release sampler for the unprotected mechanism (x = f(D_b)).
attack::ReleaseSampler identity_release_sampler(
    const PopulationDataset& dataset);

// Release sampler for the Laplace baseline.
attack::ReleaseSampler laplace_release_sampler(
    const PopulationDataset& dataset, DpParams params);

struct GameResult {
  nn::Mlp generator;
  nn::Mlp discriminator;
  std::vector<double> defender_loss_trace;
  std::vector<double> attacker_cel_trace;
  std::vector<double> utility_trace;
  std::vector<double> saturation_trace;  // clipped-coordinate fraction
  std::size_t rounds_run = 0;
  std::string stop_reason;
  double empty_rejection_rate = 0.0;
  // In-loop metrics of the co-trained discriminator against the final
  // generator; experiment-level evaluations train a fresh attacker instead.
  double final_auc = 0.0;
  std::vector<std::pair<double, double>> bwma_by_gamma;
  double mean_abs_noise = 0.0;
  double mean_utility_loss = 0.0;
  std::uint64_t seed = 0;
};

// Alternating general-sum GAN: attacker_steps discriminator CEL updates per
// generator update; the generator minimizes
// defender_loss(mode, -CEL, utility, ...) with gradients through the clip
// subgradient (1 inside [0,1], 0 at saturated coordinates).
GameResult train_bngp(const PopulationDataset& dataset,
                      const MembershipPrior& prior, const DefenderConfig& def,
                      const attack::AttackConfig& att, Rng& rng);

struct LrtDefenderResult {
  nn::Mlp generator;
  std::vector<double> loss_trace;
  std::vector<double> utility_trace;
};

// Best-response defender against a (fixed or adaptive) LRT attacker; the
// threshold rule 1{lrs <= tau} is smoothed by sigmoid(tau - lrs).
LrtDefenderResult train_lrt_best_response_defender(
    const PopulationDataset& dataset, const MembershipPrior& prior,
    const DefenderConfig& def, const LrtConfig& lrt, Rng& rng);

// epsilon = sensitivity / scale with sensitivity = m / k_dagger and
// scale = target mean absolute noise.
DpParams calibrate_dp_epsilon(double target_mean_abs_noise, std::size_t m,
                              std::size_t k_dagger);

}  // namespace bngp::defense

#endif  // BNGP_DEFENSE_HPP_
