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
#include "bngp/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bngp/attacks.hpp"
#include "bngp/metrics.hpp"

namespace bngp::verification {

namespace {

constexpr double kTol = 1e-9;

std::string format_value(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

DiscreteMechanism constant_mechanism(std::size_t membership_size,
                                     std::vector<double> output_probs) {
  auto apply = [](const MembershipVector&, std::size_t noise_index) {
    return noise_index;
  };
  const std::size_t outputs = output_probs.size();
  return DiscreteMechanism(membership_size, outputs, std::move(output_probs),
                           apply);
}

DiscreteMechanism random_mechanism_with_noise(std::size_t membership_size,
                                              std::size_t max_outputs,
                                              std::vector<double> noise_probs,
                                              Rng& rng) {
  const std::size_t outputs = 2 + rng.uniform_index(max_outputs - 1);
  const std::size_t members = std::size_t{1} << membership_size;
  auto table =
      std::make_shared<std::vector<std::size_t>>(members * noise_probs.size());
  for (std::size_t& symbol : *table) symbol = rng.uniform_index(outputs);
  const std::size_t noise_count = noise_probs.size();
  auto apply = [table, noise_count](const MembershipVector& b,
                                    std::size_t noise_index) {
    return (*table)[membership_to_index(b) * noise_count + noise_index];
  };
  return DiscreteMechanism(membership_size, outputs, std::move(noise_probs),
                           std::move(apply));
}

double kl_between_priors(const MembershipPrior& theta,
                         const MembershipPrior& sigma) {
  const std::size_t k = theta.population_size();
  const std::size_t members = std::size_t{1} << k;
  double kl = 0.0;
  for (std::size_t i = 0; i < members; ++i) {
    const MembershipVector b = membership_from_index(i, k);
    const double t = theta.pmf(b);
    if (t <= 0.0) continue;
    kl += t * std::log(t / sigma.pmf(b));
  }
  return kl;
}

}  // namespace

std::vector<CheckResult> check_proposition1(std::size_t instances, Rng& rng) {
  std::vector<CheckResult> results;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t k = 2 + i % 4;  // K in 2..5
    const DiscreteMechanism mech = oracle::random_discrete_mechanism(k, 8, rng);
    const MembershipPrior prior =
        i % 5 == 4 ? MembershipPrior::fixed_size_uniform(
                         k, 1 + rng.uniform_index(k))
                   : oracle::random_bernoulli_prior(k, rng);
    std::vector<std::vector<double>> claim_probs(mech.output_count());
    for (std::vector<double>& row : claim_probs) {
      row.resize(k);
      for (double& p : row) p = rng.uniform();
    }
    double max_gap = 0.0;
    for (int g = 1; g <= 10; ++g) {
      max_gap = std::max(
          max_gap, oracle::proposition1_gap(mech, prior, claim_probs,
                                            0.1 * g));
    }
    results.push_back({"proposition1", "instance-" + std::to_string(i),
                       max_gap, "|L_att + Adv| < 1e-9", max_gap < kTol});
  }
  return results;
}

std::vector<CheckResult> check_lemma1(std::size_t instances,
                                      std::size_t trials, Rng& rng) {
  std::vector<CheckResult> results;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t k = 1 + i % 6;
    const DiscreteMechanism mech =
        oracle::random_discrete_mechanism(k, 8, rng);
    const MembershipPrior prior = oracle::random_bernoulli_prior(k, rng);
    const double margin = oracle::verify_lemma1(mech, prior, trials, 0.3, rng);
    results.push_back({"lemma1", "instance-" + std::to_string(i), margin,
                       "jittered CEL margin >= -1e-9", margin >= -kTol});
  }
  return results;
}

std::vector<CheckResult> check_post_processing(std::size_t instances,
                                               Rng& rng) {
  std::vector<CheckResult> results;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t k = 1 + i % 6;
    const DiscreteMechanism mech =
        oracle::random_discrete_mechanism(k, 8, rng);
    const std::vector<std::size_t> partition = oracle::random_partition(
        mech.output_count(), 1 + rng.uniform_index(mech.output_count()), rng);
    const auto [before, after] = oracle::verify_post_processing(
        mech, partition, oracle::random_bernoulli_prior(k, rng));
    results.push_back({"post-processing", "instance-" + std::to_string(i),
                       after - before, "risk_after >= risk_before - 1e-9",
                       after >= before - kTol});
  }
  return results;
}

std::vector<CheckResult> check_prior_mismatch(std::size_t instances,
                                              Rng& rng) {
  std::vector<CheckResult> results;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t k = 1 + i % 5;
    const MembershipPrior theta = oracle::random_bernoulli_prior(k, rng);
    const MembershipPrior sigma = oracle::random_bernoulli_prior(k, rng);
    if (i % 10 == 9) {
      // Uninformative mechanism: the gap equals KL(theta || sigma) exactly.
      std::vector<double> probs = {0.25, 0.25, 0.5};
      const DiscreteMechanism mech = constant_mechanism(k, probs);
      const auto [matched, mismatched] =
          oracle::verify_prior_mismatch(mech, theta, sigma);
      const double gap = mismatched - matched - kl_between_priors(theta, sigma);
      results.push_back({"prior-mismatch-kl", "instance-" + std::to_string(i),
                         gap, "gap equals KL(theta||sigma) within 1e-9",
                         std::abs(gap) < kTol});
      continue;
    }
    const DiscreteMechanism mech =
        oracle::random_discrete_mechanism(k, 8, rng);
    const auto [matched, mismatched] =
        oracle::verify_prior_mismatch(mech, theta, sigma);
    results.push_back({"prior-mismatch", "instance-" + std::to_string(i),
                       mismatched - matched,
                       "matched <= mismatched + 1e-9",
                       matched <= mismatched + kTol});
  }
  return results;
}

std::vector<CheckResult> check_signal_refinement(std::size_t instances,
                                                 Rng& rng) {
  std::vector<CheckResult> results;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t k = 1 + i % 5;
    const std::size_t members = std::size_t{1} << k;
    const std::size_t signals = 2 + rng.uniform_index(3);
    std::vector<std::vector<double>> kernel(members,
                                            std::vector<double>(signals));
    for (std::vector<double>& row : kernel) {
      double total = 0.0;
      for (double& p : row) {
        p = 0.05 + rng.uniform();
        total += p;
      }
      double partial = 0.0;
      for (std::size_t q = 0; q + 1 < signals; ++q) {
        row[q] /= total;
        partial += row[q];
      }
      row.back() = 1.0 - partial;
    }
    const DiscreteMechanism mech =
        oracle::random_discrete_mechanism(k, 8, rng);
    const MembershipPrior theta = oracle::random_bernoulli_prior(k, rng);
    const auto [base, refined] =
        oracle::verify_signal_refinement(mech, theta, kernel);
    results.push_back({"signal-refinement", "instance-" + std::to_string(i),
                       base - refined,
                       "expected refined CEL <= base CEL + 1e-9",
                       refined <= base + kTol});
  }
  return results;
}

std::vector<CheckResult> check_composition(std::size_t instances, Rng& rng) {
  std::vector<CheckResult> results;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t k = 2 + i % 3;  // K in 2..4
    const std::size_t n = 2 + i % 2;  // 2 or 3 mechanisms
    const Coupling coupling =
        i % 2 == 0 ? Coupling::kIndependent : Coupling::kSharedNoise;
    std::vector<DiscreteMechanism> mechs;
    if (coupling == Coupling::kIndependent) {
      for (std::size_t j = 0; j < n; ++j) {
        mechs.push_back(oracle::random_discrete_mechanism(k, 4, rng));
      }
    } else {
      const DiscreteMechanism first =
          oracle::random_discrete_mechanism(k, 4, rng);
      mechs.push_back(first);
      for (std::size_t j = 1; j < n; ++j) {
        mechs.push_back(random_mechanism_with_noise(
            k, 4, std::vector<double>(first.noise_probs()), rng));
      }
    }
    const MembershipPrior prior = oracle::random_bernoulli_prior(k, rng);
    const oracle::CompositionReport report =
        oracle::composition_decomposition(mechs, coupling, prior);
    const double min_per =
        *std::min_element(report.per_mech_cels.begin(),
                          report.per_mech_cels.end());
    results.push_back({"composition-monotone", "instance-" + std::to_string(i),
                       report.joint_cel - min_per,
                       "joint CEL <= min per-mechanism CEL + 1e-9",
                       report.joint_cel <= min_per + kTol});

    // Appending a mechanism never increases the joint CEL.
    std::vector<DiscreteMechanism> prefix(mechs.begin(), mechs.end() - 1);
    const double prefix_cel =
        prefix.size() == 1
            ? oracle::exact_conditional_entropy(prefix.front(), prior)
            : oracle::composition_decomposition(prefix, coupling, prior)
                  .joint_cel;
    results.push_back({"composition-append", "instance-" + std::to_string(i),
                       report.joint_cel - prefix_cel,
                       "appending never increases joint CEL (1e-9)",
                       report.joint_cel <= prefix_cel + kTol});

    const oracle::CompositionReport recheck =
        oracle::composition_decomposition_recheck(mechs, coupling, prior);
    double max_diff = std::abs(report.joint_cel - recheck.joint_cel);
    for (std::size_t j = 0; j < report.per_mech_cels.size(); ++j) {
      max_diff = std::max(max_diff, std::abs(report.per_mech_cels[j] -
                                             recheck.per_mech_cels[j]));
    }
    max_diff = std::max(max_diff, std::abs(report.residual -
                                           recheck.residual));
    max_diff = std::max(max_diff, std::abs(report.candidate_lambda_entropy -
                                           recheck.candidate_lambda_entropy));
    max_diff = std::max(max_diff, std::abs(report.candidate_lambda_kl -
                                           recheck.candidate_lambda_kl));
    results.push_back({"composition-dual", "instance-" + std::to_string(i),
                       max_diff, "dual implementations agree within 1e-10",
                       max_diff < 1e-10});
  }

  // Documented open question: for two noiseless copies the residual is 0
  // while H(Q) is K ln 2, so the stated independent-case identity
  // residual == H(Q) does not hold; reported, not asserted.
  {
    std::vector<DiscreteMechanism> copies = {bitflip_mechanism(2, 0.0),
                                             bitflip_mechanism(2, 0.0)};
    const MembershipPrior uniform = MembershipPrior::independent_bernoulli(2,
                                                                           0.5);
    const oracle::CompositionReport report = oracle::composition_decomposition(
        copies, Coupling::kIndependent, uniform);
    results.push_back({"composition-lambda-note", "noiseless-copies",
                       report.residual - report.candidate_lambda_entropy,
                       "informational: residual minus H(Q)", true});
  }
  return results;
}

std::vector<CheckResult> check_theorem3(std::size_t prior_samples, Rng& rng) {
  std::vector<CheckResult> results;
  std::vector<double> gamma_grid;
  for (int g = 1; g <= 10; ++g) gamma_grid.push_back(0.1 * g);
  std::vector<double> epsilon_grid;
  for (int e = 0; e < 50; ++e) epsilon_grid.push_back(3.0 * e / 49.0);

  const oracle::Theorem3Report report = oracle::verify_theorem3_ordering(
      0.4, 0.2, 4, prior_samples, gamma_grid, epsilon_grid, rng);
  results.push_back({"theorem3-cel", "bitflip-0.4-vs-0.2", report.min_cel_gap,
                     "noisier CEL >= less-noisy CEL for every prior",
                     report.cel_ordering_holds});
  results.push_back({"theorem3-profile", "bitflip-0.4-vs-0.2",
                     report.min_profile_gap,
                     "delta_noisier(eps) >= delta_less(eps) on the grid",
                     report.profile_ordering_holds});
  results.push_back({"theorem3-bwma", "bitflip-0.4-vs-0.2",
                     report.min_bwma_gap,
                     "max BWMA of noisier <= max BWMA of less noisy",
                     report.bwma_ordering_holds});

  double max_profile_error = 0.0;
  for (int qi = 1; qi <= 10; ++qi) {
    const double q = 0.05 * qi;
    for (double epsilon : epsilon_grid) {
      max_profile_error = std::max(
          max_profile_error,
          std::abs(oracle::privacy_profile_bitflip(q, epsilon) -
                   oracle::privacy_profile_bitflip_bruteforce(q, epsilon)));
    }
  }
  results.push_back({"theorem3-profile-closed-form", "bitflip-grid",
                     max_profile_error,
                     "closed form matches exhaustive event search (1e-12)",
                     max_profile_error < 1e-12});
  return results;
}

std::vector<CheckResult> check_dp_advantage_bound(std::size_t mc_trials,
                                                  Rng& rng) {
  std::vector<CheckResult> results;
  const std::size_t k = 4;
  const MembershipPrior prior = MembershipPrior::independent_bernoulli(k, 0.5);
  for (double flip : {0.1, 0.2, 0.3, 0.4}) {
    const DiscreteMechanism mech = bitflip_mechanism(k, flip);
    // Optimal attacker decisions per output symbol: claim when the exact
    // likelihood ratio favors membership.
    std::vector<std::vector<std::uint8_t>> decide(mech.output_count());
    for (std::size_t x = 0; x < mech.output_count(); ++x) {
      const std::vector<double> ratios =
          attack::optimal_lrt_scores(mech, prior, x);
      decide[x].resize(k);
      for (std::size_t i = 0; i < k; ++i) decide[x][i] = ratios[i] <= 1.0;
    }
    std::vector<std::uint8_t> decisions;
    std::vector<std::uint8_t> labels;
    for (std::size_t t = 0; t < mc_trials; ++t) {
      const MembershipVector b = prior.sample(rng);
      const std::size_t y = mech.sample(b, rng);
      for (std::size_t i = 0; i < k; ++i) {
        decisions.push_back(decide[y][i]);
        labels.push_back(b.bits[i]);
      }
    }
    const double advantage = membership_advantage(decisions, labels);
    double tp = 0.0, fp = 0.0, pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i]) {
        pos += 1.0;
        tp += decisions[i];
      } else {
        neg += 1.0;
        fp += decisions[i];
      }
    }
    const double tpr = tp / pos;
    const double fpr = fp / neg;
    const double se = std::sqrt(tpr * (1.0 - tpr) / pos +
                                fpr * (1.0 - fpr) / neg);
    double worst = -1e300;
    for (int e = 0; e <= 30; ++e) {
      const double epsilon = 0.1 * e;
      const double bound = oracle::dp_membership_advantage_bound(
          epsilon, oracle::privacy_profile_bitflip(flip, epsilon));
      worst = std::max(worst, advantage - bound);
    }
    results.push_back({"dp-advantage-bound", "flip-" + format_value(flip),
                       worst, "advantage <= bound + 3 MC standard errors",
                       worst <= 3.0 * se});
  }
  return results;
}

std::vector<CheckResult> check_assumption2() {
  std::vector<CheckResult> results;
  const std::size_t k = 4;
  const MembershipPrior prior = MembershipPrior::independent_bernoulli(k, 0.5);
  std::vector<oracle::FamilyPoint> family;
  for (int i = 0; i < 50; ++i) {
    const double q = 0.49 * i / 49.0;
    family.push_back({bitflip_mechanism(k, q), q, q});
  }
  std::vector<oracle::AttackerModel> baselines;
  baselines.push_back(
      {"fixed-lrt", [](const DiscreteMechanism& mech, std::size_t symbol) {
         // Per-bit likelihood ratio test fixed at the least-noise member:
         // claim exactly the reported ones.
         std::vector<std::uint8_t> s(mech.membership_size());
         for (std::size_t i = 0; i < s.size(); ++i) {
           s[i] = (symbol >> i) & 1;
         }
         return s;
       }});
  baselines.push_back(
      {"score", [](const DiscreteMechanism& mech, std::size_t symbol) {
         // Centered score: claim reported ones when they beat the mean bit.
         const std::size_t k = mech.membership_size();
         double mean = 0.0;
         for (std::size_t i = 0; i < k; ++i) mean += (symbol >> i) & 1;
         mean /= static_cast<double>(k);
         std::vector<std::uint8_t> s(k);
         for (std::size_t i = 0; i < k; ++i) {
           const double bit = (symbol >> i) & 1;
           s[i] = bit - mean > 0.0 ? 1 : 0;
         }
         return s;
       }});

  {
    const oracle::Assumption2Report report =
        oracle::verify_assumption2_comparison(
            family, prior, oracle::BudgetMode::kUtilityBudget, 0.25,
            baselines);
    double worst = 0.0;
    for (const oracle::Assumption2Choice& choice : report.baseline_choices) {
      worst = std::max(worst, report.exact_choice.cel - choice.cel);
    }
    results.push_back({"assumption2-utility-budget", "bitflip-grid-50", worst,
                       "exact-posterior CEL <= baseline CEL + one grid cell",
                       report.ordering_holds});
  }
  {
    const oracle::Assumption2Report report =
        oracle::verify_assumption2_comparison(
            family, prior, oracle::BudgetMode::kPrivacyBudget, 1e9, baselines);
    std::size_t max_index = report.exact_choice.grid_index;
    for (const oracle::Assumption2Choice& choice : report.baseline_choices) {
      max_index = std::max(max_index, choice.grid_index);
    }
    results.push_back({"assumption2-slack-budget", "bitflip-grid-50",
                       static_cast<double>(max_index),
                       "all optima coincide at the zero-noise end",
                       max_index == 0});
  }
  return results;
}

std::vector<CheckResult> run_verification_suite(const SuiteOptions& options) {
  std::vector<CheckResult> all;
  auto append = [&all](std::vector<CheckResult> results) {
    all.insert(all.end(), results.begin(), results.end());
  };
  Rng rng1(options.seed + 101), rng2(options.seed + 202),
      rng3(options.seed + 303), rng4(options.seed + 404),
      rng5(options.seed + 505), rng6(options.seed + 606),
      rng7(options.seed + 707), rng8(options.seed + 808);
  append(check_proposition1(options.prop1_instances, rng1));
  append(check_lemma1(options.lemma1_instances, options.lemma1_trials, rng2));
  append(check_post_processing(options.postprocessing_instances, rng3));
  append(check_prior_mismatch(options.prior_mismatch_instances, rng4));
  append(check_signal_refinement(options.signal_instances, rng5));
  append(check_composition(options.composition_instances, rng6));
  append(check_theorem3(options.theorem3_priors, rng7));
  append(check_dp_advantage_bound(options.dp_bound_trials, rng8));
  append(check_assumption2());
  return all;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& result : results) {
    if (!result.pass) return false;
  }
  return true;
}

std::string to_csv(const std::vector<CheckResult>& results) {
  std::string csv = "check,instance,value,contract,pass\n";
  for (const CheckResult& result : results) {
    csv += result.check + ',' + result.instance + ',' +
           format_value(result.value) + ',' + result.contract + ',' +
           (result.pass ? "1" : "0") + '\n';
  }
  return csv;
}

}  // namespace bngp::verification
