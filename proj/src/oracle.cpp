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
#include "bngp/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace bngp::oracle {

namespace {

void check_guards(const DiscreteMechanism& mechanism) {
  if (mechanism.membership_size() > kMaxMembershipBits) {
    throw CapabilityError(
        "oracle: membership space exceeds the K <= 12 enumeration guard; "
        "use the Monte Carlo evaluators instead");
  }
  if (mechanism.output_count() > kMaxOutputSymbols) {
    throw CapabilityError("oracle: output space exceeds the 2^16 guard");
  }
  const std::size_t members = std::size_t{1} << mechanism.membership_size();
  if (members > kMaxJointCells / mechanism.output_count()) {
    throw CapabilityError("oracle: joint (b, x) table exceeds the guard");
  }
}

// Prior as a dense vector over membership indices.
std::vector<double> dense_prior(const MembershipPrior& prior) {
  const std::size_t k = prior.population_size();
  if (k > kMaxMembershipBits) {
    throw CapabilityError("oracle: prior enumeration exceeds the K guard");
  }
  const std::size_t count = std::size_t{1} << k;
  std::vector<double> mass(count);
  for (std::size_t i = 0; i < count; ++i) {
    mass[i] = prior.pmf(membership_from_index(i, k));
  }
  return mass;
}

double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

double binary_entropy(double p) { return -xlogx(p) - xlogx(1.0 - p); }

// Joint table joint[x][b] = prior(b) * rho(x|b) for a dense prior vector.
std::vector<std::vector<double>> joint_table(
    const DiscreteMechanism& mechanism, const std::vector<double>& prior) {
  const std::size_t k = mechanism.membership_size();
  const std::size_t members = std::size_t{1} << k;
  std::vector<std::vector<double>> joint(
      mechanism.output_count(), std::vector<double>(members, 0.0));
  for (std::size_t b = 0; b < members; ++b) {
    if (prior[b] <= 0.0) continue;
    const MembershipVector bv = membership_from_index(b, k);
    const std::vector<double> row = mechanism.pmf_row(bv);
    for (std::size_t x = 0; x < row.size(); ++x) {
      joint[x][b] = prior[b] * row[x];
    }
  }
  return joint;
}

PosteriorTable posterior_from_joint(
    const std::vector<std::vector<double>>& joint, std::size_t k) {
  PosteriorTable table;
  table.membership_size = k;
  table.output_count = joint.size();
  const std::size_t members = std::size_t{1} << k;
  for (std::size_t x = 0; x < joint.size(); ++x) {
    double mass = 0.0;
    for (double v : joint[x]) mass += v;
    if (mass <= 0.0) continue;
    PosteriorOutput out;
    out.symbol = x;
    out.output_mass = mass;
    out.posterior.resize(members);
    out.marginals.assign(k, 0.0);
    for (std::size_t b = 0; b < members; ++b) {
      const double mu = joint[x][b] / mass;
      out.posterior[b] = mu;
      for (std::size_t i = 0; i < k; ++i) {
        if ((b >> i) & 1) out.marginals[i] += mu;
      }
    }
    table.outputs.push_back(std::move(out));
  }
  return table;
}

double conditional_entropy_dense(const DiscreteMechanism& mechanism,
                                 const std::vector<double>& prior) {
  const std::vector<std::vector<double>> joint = joint_table(mechanism, prior);
  double entropy = 0.0;
  for (const std::vector<double>& row : joint) {
    double mass = 0.0;
    for (double v : row) mass += v;
    if (mass <= 0.0) continue;
    for (double v : row) {
      if (v > 0.0) entropy -= v * std::log(v / mass);
    }
  }
  return entropy;
}

double marginal_cel_dense(const DiscreteMechanism& mechanism,
                          const std::vector<double>& prior) {
  const std::size_t k = mechanism.membership_size();
  const std::vector<std::vector<double>> joint = joint_table(mechanism, prior);
  double cel = 0.0;
  for (const std::vector<double>& row : joint) {
    double mass = 0.0;
    for (double v : row) mass += v;
    if (mass <= 0.0) continue;
    for (std::size_t i = 0; i < k; ++i) {
      double one = 0.0;
      for (std::size_t b = 0; b < row.size(); ++b) {
        if ((b >> i) & 1) one += row[b];
      }
      cel += mass * binary_entropy(one / mass);
    }
  }
  return cel;
}

}  // namespace

PosteriorTable enumerate_posterior(const DiscreteMechanism& mechanism,
                                   const MembershipPrior& prior) {
  check_guards(mechanism);
  if (prior.population_size() != mechanism.membership_size()) {
    throw ParameterError("enumerate_posterior: prior/mechanism K mismatch");
  }
  return posterior_from_joint(joint_table(mechanism, dense_prior(prior)),
                              mechanism.membership_size());
}

double exact_conditional_entropy(const DiscreteMechanism& mechanism,
                                 const MembershipPrior& prior) {
  check_guards(mechanism);
  return conditional_entropy_dense(mechanism, dense_prior(prior));
}

double exact_marginal_cel(const DiscreteMechanism& mechanism,
                          const MembershipPrior& prior) {
  check_guards(mechanism);
  return marginal_cel_dense(mechanism, dense_prior(prior));
}

double predictor_cel(const DiscreteMechanism& mechanism,
                     const MembershipPrior& prior,
                     const std::function<std::vector<double>(std::size_t)>&
                         predictor) {
  const PosteriorTable table = enumerate_posterior(mechanism, prior);
  const std::size_t k = table.membership_size;
  double cel = 0.0;
  for (const PosteriorOutput& out : table.outputs) {
    const std::vector<double> p = predictor(out.symbol);
    if (p.size() != k) {
      throw ContractError("predictor_cel: predictor emitted wrong length");
    }
    for (std::size_t i = 0; i < k; ++i) {
      const double pi = std::min(1.0 - kScoreClamp, std::max(kScoreClamp, p[i]));
      cel -= out.output_mass * (out.marginals[i] * std::log(pi) +
                                (1.0 - out.marginals[i]) * std::log(1.0 - pi));
    }
  }
  return cel;
}

double prior_entropy(const MembershipPrior& prior) {
  const std::vector<double> mass = dense_prior(prior);
  double entropy = 0.0;
  for (double v : mass) entropy -= xlogx(v);
  return entropy;
}

double verify_lemma1(const DiscreteMechanism& mechanism,
                     const MembershipPrior& prior, std::size_t trials,
                     double jitter, Rng& rng) {
  const PosteriorTable table = enumerate_posterior(mechanism, prior);
  const std::size_t k = table.membership_size;

  // Exact CEL of the posterior-marginal predictor (0 log 0 = 0).
  double posterior_cel = 0.0;
  for (const PosteriorOutput& out : table.outputs) {
    for (double mu : out.marginals) {
      posterior_cel += out.output_mass * binary_entropy(mu);
    }
  }

  double min_margin = jitter == 0.0 && trials > 0 ? 0.0 : 1e300;
  for (std::size_t t = 0; t < trials; ++t) {
    double cel = 0.0;
    for (const PosteriorOutput& out : table.outputs) {
      for (std::size_t i = 0; i < k; ++i) {
        double p = out.marginals[i] + rng.uniform(-jitter, jitter);
        p = std::min(1.0 - kScoreClamp, std::max(kScoreClamp, p));
        cel -= out.output_mass *
               (out.marginals[i] * std::log(p) +
                (1.0 - out.marginals[i]) * std::log(1.0 - p));
      }
    }
    min_margin = std::min(min_margin, cel - posterior_cel);
  }
  return min_margin;
}

CompositionReport composition_decomposition(
    const std::vector<DiscreteMechanism>& mechanisms, Coupling coupling,
    const MembershipPrior& prior) {
  const DiscreteMechanism joint = compose_mechanisms(mechanisms, coupling);
  check_guards(joint);
  const std::vector<double> prior_mass = dense_prior(prior);

  CompositionReport report;
  report.joint_cel = conditional_entropy_dense(joint, prior_mass);
  for (const DiscreteMechanism& mech : mechanisms) {
    report.per_mech_cels.push_back(
        conditional_entropy_dense(mech, prior_mass));
  }
  double per_sum = 0.0;
  for (double cel : report.per_mech_cels) per_sum += cel;
  report.residual = report.joint_cel - per_sum;

  // Output distribution Q over joint symbols and component marginals.
  const std::vector<std::vector<double>> table =
      joint_table(joint, prior_mass);
  std::vector<double> q(joint.output_count(), 0.0);
  for (std::size_t x = 0; x < table.size(); ++x) {
    for (double v : table[x]) q[x] += v;
  }
  std::vector<std::size_t> output_counts;
  output_counts.reserve(mechanisms.size());
  for (const DiscreteMechanism& mech : mechanisms) {
    output_counts.push_back(mech.output_count());
  }
  std::vector<std::vector<double>> marginals;
  for (std::size_t j = 0; j < mechanisms.size(); ++j) {
    marginals.emplace_back(output_counts[j], 0.0);
  }
  for (std::size_t x = 0; x < q.size(); ++x) {
    if (q[x] <= 0.0) continue;
    const std::vector<std::size_t> parts =
        split_composed_symbol(x, output_counts);
    for (std::size_t j = 0; j < parts.size(); ++j) {
      marginals[j][parts[j]] += q[x];
    }
  }
  double entropy = 0.0;
  double kl = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) {
    if (q[x] <= 0.0) continue;
    entropy -= xlogx(q[x]);
    const std::vector<std::size_t> parts =
        split_composed_symbol(x, output_counts);
    double log_product = 0.0;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      log_product += std::log(marginals[j][parts[j]]);
    }
    kl += q[x] * (std::log(q[x]) - log_product);
  }
  report.candidate_lambda_entropy = entropy;
  report.candidate_lambda_kl = kl;
  return report;
}

namespace {

// Compensated (Kahan) accumulator for the recheck path.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - compensation_;
    const double t = total_ + y;
    compensation_ = (t - total_) - y;
    total_ = t;
  }
  double value() const { return total_; }

 private:
  double total_ = 0.0;
  double compensation_ = 0.0;
};

// Conditional entropy with membership-major loops and explicit Bayes
// denominators; shares no code with conditional_entropy_dense.
double conditional_entropy_recheck(const DiscreteMechanism& mechanism,
                                   const MembershipPrior& prior) {
  const std::size_t k = mechanism.membership_size();
  const std::size_t members = std::size_t{1} << k;
  std::vector<KahanSum> q(mechanism.output_count());
  for (std::size_t b = 0; b < members; ++b) {
    const MembershipVector bv = membership_from_index(b, k);
    const double pb = prior.pmf(bv);
    if (pb <= 0.0) continue;
    for (std::size_t x = 0; x < mechanism.output_count(); ++x) {
      q[x].add(pb * mechanism.pmf(x, bv));
    }
  }
  KahanSum entropy;
  for (std::size_t b = 0; b < members; ++b) {
    const MembershipVector bv = membership_from_index(b, k);
    const double pb = prior.pmf(bv);
    if (pb <= 0.0) continue;
    for (std::size_t x = 0; x < mechanism.output_count(); ++x) {
      const double rho = mechanism.pmf(x, bv);
      if (rho <= 0.0) continue;
      entropy.add(-pb * rho * std::log(pb * rho / q[x].value()));
    }
  }
  return entropy.value();
}

}  // namespace

CompositionReport composition_decomposition_recheck(
    const std::vector<DiscreteMechanism>& mechanisms, Coupling coupling,
    const MembershipPrior& prior) {
  const DiscreteMechanism joint = compose_mechanisms(mechanisms, coupling);
  check_guards(joint);

  CompositionReport report;
  report.joint_cel = conditional_entropy_recheck(joint, prior);
  KahanSum per_sum;
  for (const DiscreteMechanism& mech : mechanisms) {
    const double cel = conditional_entropy_recheck(mech, prior);
    report.per_mech_cels.push_back(cel);
    per_sum.add(cel);
  }
  report.residual = report.joint_cel - per_sum.value();

  const std::size_t k = joint.membership_size();
  const std::size_t members = std::size_t{1} << k;
  std::vector<std::size_t> output_counts;
  for (const DiscreteMechanism& mech : mechanisms) {
    output_counts.push_back(mech.output_count());
  }
  std::vector<KahanSum> q(joint.output_count());
  for (std::size_t b = 0; b < members; ++b) {
    const MembershipVector bv = membership_from_index(b, k);
    const double pb = prior.pmf(bv);
    if (pb <= 0.0) continue;
    for (std::size_t x = 0; x < joint.output_count(); ++x) {
      q[x].add(pb * joint.pmf(x, bv));
    }
  }
  std::vector<std::vector<KahanSum>> marginals;
  for (std::size_t j = 0; j < mechanisms.size(); ++j) {
    marginals.emplace_back(output_counts[j]);
  }
  for (std::size_t x = 0; x < q.size(); ++x) {
    const std::vector<std::size_t> parts =
        split_composed_symbol(x, output_counts);
    for (std::size_t j = 0; j < parts.size(); ++j) {
      marginals[j][parts[j]].add(q[x].value());
    }
  }
  KahanSum entropy;
  KahanSum kl;
  for (std::size_t x = 0; x < q.size(); ++x) {
    const double qx = q[x].value();
    if (qx <= 0.0) continue;
    entropy.add(-qx * std::log(qx));
    const std::vector<std::size_t> parts =
        split_composed_symbol(x, output_counts);
    double log_product = 0.0;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      log_product += std::log(marginals[j][parts[j]].value());
    }
    kl.add(qx * (std::log(qx) - log_product));
  }
  report.candidate_lambda_entropy = entropy.value();
  report.candidate_lambda_kl = kl.value();
  return report;
}

std::pair<double, double> verify_post_processing(
    const DiscreteMechanism& mechanism,
    const std::vector<std::size_t>& partition, const MembershipPrior& prior) {
  const double before = exact_conditional_entropy(mechanism, prior);
  const double after =
      exact_conditional_entropy(quantize_postprocess(mechanism, partition),
                                prior);
  return {before, after};
}

std::pair<double, double> verify_prior_mismatch(
    const DiscreteMechanism& mechanism, const MembershipPrior& true_prior,
    const MembershipPrior& subjective_prior) {
  check_guards(mechanism);
  const std::vector<double> theta = dense_prior(true_prior);
  const std::vector<double> sigma = dense_prior(subjective_prior);
  const double matched = conditional_entropy_dense(mechanism, theta);

  // sigma-posterior predictor scored under theta; zero sigma mass where
  // theta has mass is evaluated with clamped logs.
  const std::vector<std::vector<double>> joint_theta =
      joint_table(mechanism, theta);
  const std::vector<std::vector<double>> joint_sigma =
      joint_table(mechanism, sigma);
  double mismatched = 0.0;
  for (std::size_t x = 0; x < joint_theta.size(); ++x) {
    double sigma_mass = 0.0;
    for (double v : joint_sigma[x]) sigma_mass += v;
    for (std::size_t b = 0; b < joint_theta[x].size(); ++b) {
      const double weight = joint_theta[x][b];
      if (weight <= 0.0) continue;
      const double mu_sigma =
          sigma_mass > 0.0 ? joint_sigma[x][b] / sigma_mass : 0.0;
      mismatched -= weight * std::log(std::max(mu_sigma, 1e-300));
    }
  }
  return {matched, mismatched};
}

std::pair<double, double> verify_signal_refinement(
    const DiscreteMechanism& mechanism, const MembershipPrior& prior,
    const std::vector<std::vector<double>>& signal_kernel) {
  check_guards(mechanism);
  const std::size_t k = mechanism.membership_size();
  const std::size_t members = std::size_t{1} << k;
  if (signal_kernel.size() != members) {
    throw ParameterError(
        "verify_signal_refinement: kernel must cover every membership");
  }
  const std::size_t signals = signal_kernel.front().size();
  for (const std::vector<double>& row : signal_kernel) {
    if (row.size() != signals) {
      throw ParameterError("verify_signal_refinement: ragged kernel");
    }
  }
  const std::vector<double> theta = dense_prior(prior);
  const double base = conditional_entropy_dense(mechanism, theta);

  double refined = 0.0;
  for (std::size_t qi = 0; qi < signals; ++qi) {
    double q_mass = 0.0;
    std::vector<double> refined_prior(members, 0.0);
    for (std::size_t b = 0; b < members; ++b) {
      refined_prior[b] = theta[b] * signal_kernel[b][qi];
      q_mass += refined_prior[b];
    }
    if (q_mass <= 0.0) continue;
    for (double& v : refined_prior) v /= q_mass;
    refined += q_mass * conditional_entropy_dense(mechanism, refined_prior);
  }
  return {base, refined};
}

double privacy_profile_bitflip(double flip_prob, double epsilon) {
  if (!(flip_prob >= 0.0 && flip_prob <= 0.5)) {
    throw ParameterError("privacy_profile_bitflip: flip_prob in [0, 0.5]");
  }
  if (!(epsilon >= 0.0)) {
    throw ParameterError("privacy_profile_bitflip: epsilon >= 0");
  }
  if (flip_prob == 0.0) return 1.0;  // noiseless: no finite epsilon helps
  return std::max(0.0, (1.0 - flip_prob) - std::exp(epsilon) * flip_prob);
}

double privacy_profile_bitflip_bruteforce(double flip_prob, double epsilon) {
  if (flip_prob == 0.0) return 1.0;
  // Reported-bit distributions for the two adjacent memberships of one
  // individual. delta = max over direction of sum_y max(0, Pa(y)-e^eps Pb(y)).
  const double e = std::exp(epsilon);
  const double p1[2] = {flip_prob, 1.0 - flip_prob};  // b = 1
  const double p0[2] = {1.0 - flip_prob, flip_prob};  // b = 0
  double d10 = 0.0, d01 = 0.0;
  for (int y = 0; y < 2; ++y) {
    d10 += std::max(0.0, p1[y] - e * p0[y]);
    d01 += std::max(0.0, p0[y] - e * p1[y]);
  }
  return std::max(d10, d01);
}

double dp_membership_advantage_bound(double epsilon, double delta) {
  if (!(epsilon >= 0.0) || !(delta >= 0.0 && delta <= 1.0)) {
    throw ParameterError("dp_membership_advantage_bound: bad parameters");
  }
  const double e = std::exp(epsilon);
  return (e - 1.0 + 2.0 * delta) / (e + 1.0);
}

BwmaValue exhaustive_bwma(
    const DiscreteMechanism& mechanism, const MembershipPrior& prior,
    double gamma,
    const std::function<std::vector<std::uint8_t>(std::size_t)>& decide) {
  check_guards(mechanism);
  const std::size_t k = mechanism.membership_size();
  const std::size_t members = std::size_t{1} << k;
  const std::vector<double> mass = dense_prior(prior);
  std::vector<std::vector<std::uint8_t>> decisions(mechanism.output_count());
  for (std::size_t x = 0; x < mechanism.output_count(); ++x) {
    decisions[x] = decide(x);
    if (decisions[x].size() != k) {
      throw ContractError("exhaustive_bwma: decision length mismatch");
    }
  }
  BwmaValue value;
  for (std::size_t b = 0; b < members; ++b) {
    if (mass[b] <= 0.0) continue;
    const MembershipVector bv = membership_from_index(b, k);
    const std::vector<double> row = mechanism.pmf_row(bv);
    for (std::size_t x = 0; x < row.size(); ++x) {
      if (row[x] <= 0.0) continue;
      const double w = mass[b] * row[x];
      for (std::size_t i = 0; i < k; ++i) {
        if (!decisions[x][i]) continue;
        if ((b >> i) & 1) {
          value.tpr += w;
        } else {
          value.fpr += w;
        }
      }
    }
  }
  value.advantage = (1.0 - gamma) * value.tpr - gamma * value.fpr;
  return value;
}

double max_bwma_exhaustive(const DiscreteMechanism& mechanism,
                           const MembershipPrior& prior, double gamma) {
  check_guards(mechanism);
  const std::size_t k = mechanism.membership_size();
  const std::size_t members = std::size_t{1} << k;
  const std::vector<double> mass = dense_prior(prior);
  // w1[x][k] = Pr[x, b_k = 1]; the optimal attacker claims k at x whenever
  // (1-gamma) w1 >= gamma w0, so the maximum is a sum of positive parts.
  std::vector<std::vector<double>> w1(mechanism.output_count(),
                                      std::vector<double>(k, 0.0));
  std::vector<std::vector<double>> w0 = w1;
  for (std::size_t b = 0; b < members; ++b) {
    if (mass[b] <= 0.0) continue;
    const MembershipVector bv = membership_from_index(b, k);
    const std::vector<double> row = mechanism.pmf_row(bv);
    for (std::size_t x = 0; x < row.size(); ++x) {
      const double w = mass[b] * row[x];
      if (w <= 0.0) continue;
      for (std::size_t i = 0; i < k; ++i) {
        if ((b >> i) & 1) {
          w1[x][i] += w;
        } else {
          w0[x][i] += w;
        }
      }
    }
  }
  double advantage = 0.0;
  for (std::size_t x = 0; x < w1.size(); ++x) {
    for (std::size_t i = 0; i < k; ++i) {
      advantage += std::max(0.0, (1.0 - gamma) * w1[x][i] - gamma * w0[x][i]);
    }
  }
  return advantage;
}

double proposition1_gap(const DiscreteMechanism& mechanism,
                        const MembershipPrior& prior,
                        const std::vector<std::vector<double>>& claim_probs,
                        double gamma) {
  check_guards(mechanism);
  const std::size_t k = mechanism.membership_size();
  const std::size_t members = std::size_t{1} << k;
  if (claim_probs.size() != mechanism.output_count()) {
    throw ParameterError("proposition1_gap: claim_probs shape mismatch");
  }
  const std::vector<double> mass = dense_prior(prior);

  // Attacker expected loss via the literal triple sum over (s, b, x), with
  // h(s|x) the product of per-individual claim probabilities.
  double loss = 0.0;
  for (std::size_t b = 0; b < members; ++b) {
    if (mass[b] <= 0.0) continue;
    const MembershipVector bv = membership_from_index(b, k);
    const std::vector<double> row = mechanism.pmf_row(bv);
    for (std::size_t x = 0; x < row.size(); ++x) {
      if (row[x] <= 0.0) continue;
      for (std::size_t s = 0; s < members; ++s) {
        double h = 1.0;
        double true_positives = 0.0;
        double claims = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          const bool claim = (s >> i) & 1;
          h *= claim ? claim_probs[x][i] : 1.0 - claim_probs[x][i];
          if (claim) {
            claims += 1.0;
            if ((b >> i) & 1) true_positives += 1.0;
          }
        }
        loss += (-true_positives + gamma * claims) * h * row[x] * mass[b];
      }
    }
  }

  // BWMA from its own definition (prior-weighted TPR/FPR sums).
  double tpr = 0.0;
  double fpr = 0.0;
  for (std::size_t b = 0; b < members; ++b) {
    if (mass[b] <= 0.0) continue;
    const MembershipVector bv = membership_from_index(b, k);
    const std::vector<double> row = mechanism.pmf_row(bv);
    for (std::size_t x = 0; x < row.size(); ++x) {
      if (row[x] <= 0.0) continue;
      for (std::size_t i = 0; i < k; ++i) {
        const double w = mass[b] * row[x] * claim_probs[x][i];
        if ((b >> i) & 1) {
          tpr += w;
        } else {
          fpr += w;
        }
      }
    }
  }
  const double advantage = (1.0 - gamma) * tpr - gamma * fpr;
  return std::abs(loss + advantage);
}

Theorem3Report verify_theorem3_ordering(double flip_noisier, double flip_less,
                                        std::size_t membership_size,
                                        std::size_t prior_samples,
                                        const std::vector<double>& gamma_grid,
                                        const std::vector<double>& epsilon_grid,
                                        Rng& rng) {
  const DiscreteMechanism noisier =
      bitflip_mechanism(membership_size, flip_noisier);
  const DiscreteMechanism less = bitflip_mechanism(membership_size, flip_less);

  Theorem3Report report;
  report.min_cel_gap = 1e300;
  report.min_profile_gap = 1e300;
  report.min_bwma_gap = 1e300;
  constexpr double kTol = 1e-9;

  std::vector<MembershipPrior> priors;
  priors.reserve(prior_samples);
  for (std::size_t i = 0; i < prior_samples; ++i) {
    priors.push_back(random_bernoulli_prior(membership_size, rng));
  }

  for (const MembershipPrior& prior : priors) {
    const double gap = exact_conditional_entropy(noisier, prior) -
                       exact_conditional_entropy(less, prior);
    report.min_cel_gap = std::min(report.min_cel_gap, gap);
    if (gap < -kTol) ++report.violations;
    for (double gamma : gamma_grid) {
      const double bwma_gap = max_bwma_exhaustive(less, prior, gamma) -
                              max_bwma_exhaustive(noisier, prior, gamma);
      report.min_bwma_gap = std::min(report.min_bwma_gap, bwma_gap);
      if (bwma_gap < -kTol) ++report.violations;
    }
  }
  for (double epsilon : epsilon_grid) {
    const double gap = privacy_profile_bitflip(flip_noisier, epsilon) -
                       privacy_profile_bitflip(flip_less, epsilon);
    report.min_profile_gap = std::min(report.min_profile_gap, gap);
    if (gap < -kTol) ++report.violations;
  }

  report.cel_ordering_holds = report.min_cel_gap >= -kTol;
  report.profile_ordering_holds = report.min_profile_gap >= -kTol;
  report.bwma_ordering_holds = report.min_bwma_gap >= -kTol;
  return report;
}

namespace {

double expected_true_positives(const DiscreteMechanism& mechanism,
                               const MembershipPrior& prior,
                               const AttackerModel& model) {
  const std::size_t k = mechanism.membership_size();
  const std::size_t members = std::size_t{1} << k;
  std::vector<std::vector<std::uint8_t>> decisions(mechanism.output_count());
  for (std::size_t x = 0; x < mechanism.output_count(); ++x) {
    decisions[x] = model.decide(mechanism, x);
  }
  double total = 0.0;
  for (std::size_t b = 0; b < members; ++b) {
    const MembershipVector bv = membership_from_index(b, k);
    const double pb = prior.pmf(bv);
    if (pb <= 0.0) continue;
    const std::vector<double> row = mechanism.pmf_row(bv);
    for (std::size_t x = 0; x < row.size(); ++x) {
      if (row[x] <= 0.0) continue;
      for (std::size_t i = 0; i < k; ++i) {
        if (decisions[x][i] && ((b >> i) & 1)) total += pb * row[x];
      }
    }
  }
  return total;
}

std::size_t constrained_argmin(const std::vector<double>& objective,
                               const std::vector<double>& constrained,
                               double budget) {
  // Minimizes objective over {i : constrained[i] <= budget}; if the budget is
  // infeasible everywhere, falls back to the least-violating point.
  std::size_t best = 0;
  bool found = false;
  for (std::size_t i = 0; i < objective.size(); ++i) {
    if (constrained[i] <= budget) {
      if (!found || objective[i] < objective[best]) {
        best = i;
        found = true;
      }
    }
  }
  if (found) return best;
  for (std::size_t i = 1; i < constrained.size(); ++i) {
    if (constrained[i] < constrained[best]) best = i;
  }
  return best;
}

}  // namespace

Assumption2Report verify_assumption2_comparison(
    const std::vector<FamilyPoint>& family, const MembershipPrior& prior,
    BudgetMode mode, double budget,
    const std::vector<AttackerModel>& baselines) {
  if (family.size() < 2) {
    throw ParameterError("verify_assumption2_comparison: need a grid");
  }
  const std::size_t n = family.size();
  std::vector<double> cels(n);
  std::vector<double> utilities(n);
  for (std::size_t i = 0; i < n; ++i) {
    cels[i] = exact_conditional_entropy(family[i].mechanism, prior);
    utilities[i] = family[i].utility_loss;
  }
  // Assumption-2 precondition: CEL and utility move together along the grid.
  for (std::size_t i = 1; i < n; ++i) {
    if (cels[i] < cels[i - 1] - 1e-9 || utilities[i] < utilities[i - 1]) {
      throw ParameterError(
          "verify_assumption2_comparison: family not monotone at grid points " +
          std::to_string(i - 1) + "," + std::to_string(i));
    }
  }
  double slack = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    slack = std::max(slack, cels[i] - cels[i - 1]);
  }

  Assumption2Report report;
  report.slack = slack;

  // Exact-posterior defender: privacy loss is -CEL.
  std::vector<double> exact_loss(n);
  for (std::size_t i = 0; i < n; ++i) exact_loss[i] = -cels[i];
  std::size_t exact_index;
  if (mode == BudgetMode::kPrivacyBudget) {
    exact_index = constrained_argmin(utilities, exact_loss, budget);
  } else {
    exact_index = constrained_argmin(exact_loss, utilities, budget);
  }
  report.exact_choice = {"exact-posterior", exact_index, cels[exact_index],
                         utilities[exact_index]};

  report.ordering_holds = true;
  for (const AttackerModel& model : baselines) {
    std::vector<double> loss(n);
    for (std::size_t i = 0; i < n; ++i) {
      loss[i] = expected_true_positives(family[i].mechanism, prior, model);
    }
    std::size_t index;
    if (mode == BudgetMode::kPrivacyBudget) {
      index = constrained_argmin(utilities, loss, budget);
    } else {
      index = constrained_argmin(loss, utilities, budget);
    }
    report.baseline_choices.push_back(
        {model.name, index, cels[index], utilities[index]});
    if (report.exact_choice.cel > cels[index] + slack + 1e-12) {
      report.ordering_holds = false;
    }
  }
  return report;
}

DiscreteMechanism random_discrete_mechanism(std::size_t membership_size,
                                            std::size_t max_outputs,
                                            Rng& rng) {
  if (membership_size > kMaxMembershipBits) {
    throw CapabilityError("random_discrete_mechanism: K guard exceeded");
  }
  const std::size_t outputs = 2 + rng.uniform_index(max_outputs - 1);
  const std::size_t noise_count = 2 + rng.uniform_index(5);
  std::vector<double> noise_probs(noise_count);
  double total = 0.0;
  for (double& p : noise_probs) {
    p = 0.05 + rng.uniform();
    total += p;
  }
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < noise_count; ++i) {
    noise_probs[i] /= total;
    partial += noise_probs[i];
  }
  noise_probs.back() = 1.0 - partial;

  const std::size_t members = std::size_t{1} << membership_size;
  auto table = std::make_shared<std::vector<std::size_t>>(members *
                                                          noise_count);
  for (std::size_t& symbol : *table) symbol = rng.uniform_index(outputs);
  auto apply = [table, noise_count](const MembershipVector& b,
                                    std::size_t noise_index) {
    return (*table)[membership_to_index(b) * noise_count + noise_index];
  };
  return DiscreteMechanism(membership_size, outputs, std::move(noise_probs),
                           std::move(apply));
}

std::vector<std::size_t> random_partition(std::size_t output_count,
                                          std::size_t coarse_count, Rng& rng) {
  if (coarse_count == 0 || coarse_count > output_count) {
    throw ParameterError("random_partition: need 1 <= coarse <= outputs");
  }
  std::vector<std::size_t> partition(output_count);
  for (std::size_t& c : partition) c = rng.uniform_index(coarse_count);
  return partition;
}

MembershipPrior random_bernoulli_prior(std::size_t membership_size, Rng& rng) {
  std::vector<double> pi(membership_size);
  for (double& p : pi) p = rng.uniform(0.05, 0.95);
  return MembershipPrior::independent_bernoulli(std::move(pi));
}

}  // namespace bngp::oracle
