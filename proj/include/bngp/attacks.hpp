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
#ifndef BNGP_ATTACKS_HPP_
#define BNGP_ATTACKS_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "bngp/mechanisms.hpp"
#include "bngp/neural.hpp"

namespace bngp::attack {

// Per-individual attack output. soft scores live in [0,1]; ranking carries
// the raw monotone statistic (useful for ROC pooling across releases, where
// per-release rescaling would distort the ordering); hard decisions are
// 1[soft >= threshold] when a threshold was applied (ties claim).
struct AttackScores {
  std::vector<double> soft;
  std::vector<double> ranking;
  std::vector<std::uint8_t> hard;
};

// -sum_k [b_k log p_k + (1-b_k) log(1-p_k)], scores clamped before logs.
double cel_loss(const std::vector<double>& scores, const MembershipVector& b,
                double score_clamp = kScoreClamp);

// -sum_k s_k b_k + gamma sum_k s_k.
double attacker_loss(const std::vector<std::uint8_t>& decisions,
                     const MembershipVector& b, double gamma);

// A release sampler draws one released feature vector given a membership.
using ReleaseSampler =
    std::function<std::vector<double>(const MembershipVector&, Rng&)>;
// A scoring function maps a release to per-individual soft scores in [0,1].
using ScoringFunction =
    std::function<std::vector<double>(const std::vector<double>&)>;

struct BwmaEstimate {
  double advantage = 0.0;
  double tpr = 0.0;  // prior-weighted expected true-positive count
  double fpr = 0.0;  // prior-weighted expected false-positive count
};

// Monte Carlo estimate of the Bayes-weighted membership advantage
// (1-gamma) TPR - gamma FPR; decisions are soft >= threshold.
BwmaEstimate bwma(const ScoringFunction& attacker,
                  const ReleaseSampler& sampler, const MembershipPrior& prior,
                  double gamma, std::size_t mc_trials, Rng& rng,
                  double threshold = 0.5);

struct AttackConfig {
  double gamma = 0.5;
  std::vector<std::size_t> hidden_widths = {64, 64};
  bool batch_norm = true;
  std::uint64_t seed = 0;
  std::size_t steps = 2000;
  std::size_t batch = 64;
  double learning_rate = 1e-4;
  double weight_decay = 1e-5;
  double decay_rate = 0.988;
  std::size_t steps_per_epoch = 200;
};

struct BgpResponse {
  nn::Mlp discriminator;
  std::vector<double> loss_trace;  // batch CEL per step

  std::vector<double> scores(const std::vector<double>& release);
  ScoringFunction scoring_function();
};

// Trains a discriminator minimizing empirical CEL over (b, x) pairs drawn
// from the prior and the frozen release sampler.
BgpResponse train_bgp_response(const ReleaseSampler& sampler,
                               const MembershipPrior& prior,
                               const AttackConfig& config, Rng& rng);

// Log-likelihood ratio statistic of one genotype row against released
// frequencies: sum_j [d_j log(pbar_j/x_j) + (1-d_j) log((1-pbar_j)/(1-x_j))];
// x and pbar are clamped to [p_floor, 1-p_floor].
double lrs(const std::uint8_t* genotype, std::size_t attribute_count,
           const std::vector<double>& released,
           const std::vector<double>& reference, double p_floor = kPFloor);

std::vector<double> lrs_all(const PopulationDataset& dataset,
                            const SummaryStats& released);

// Claim membership iff lrs <= tau; ranking is -lrs; soft scores are the
// rankings min-max rescaled into [0,1] within this call.
AttackScores fixed_lrt_attack(const PopulationDataset& dataset,
                              const SummaryStats& released, double tau);

struct AdaptiveLrtResult {
  AttackScores scores;
  double tau = 0.0;  // realized data-dependent threshold
};

// tau is the mean of the N smallest reference LRS values.
AdaptiveLrtResult adaptive_lrt_attack(const PopulationDataset& dataset,
                                      const SummaryStats& released,
                                      const std::vector<std::size_t>&
                                          reference_ids,
                                      std::size_t n);

// Exact per-individual likelihood ratios P[x|b_k=0]/P[x|b_k=1] with the
// other coordinates marginalized under the prior (enumeration guard K <= 12).
// Smaller ratio means more likely member.
std::vector<double> optimal_lrt_scores(const DiscreteMechanism& mechanism,
                                       const MembershipPrior& prior,
                                       std::size_t symbol);

// Centered inner product <d_k - pbar, x - pbar>; higher means more likely
// member.
double score_attack(const std::uint8_t* genotype, std::size_t attribute_count,
                    const std::vector<double>& released,
                    const std::vector<double>& reference,
                    double p_floor = kPFloor);

AttackScores score_attack_all(const PopulationDataset& dataset,
                              const SummaryStats& released,
                              double threshold = 0.0);

// Bit decoding of a symbol from a {0,1}^k output space into NN features.
std::vector<double> bit_features(std::size_t symbol, std::size_t k);

}  // namespace bngp::attack

#endif  // BNGP_ATTACKS_HPP_
