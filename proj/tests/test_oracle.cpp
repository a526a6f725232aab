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
#include <doctest.h>

#include <cmath>

#include "bngp/oracle.hpp"
#include "bngp/verification.hpp"

using namespace bngp;
using namespace bngp::oracle;

namespace {

DiscreteMechanism constant_mechanism(std::size_t k,
                                     std::vector<double> output_probs) {
  auto apply = [](const MembershipVector&, std::size_t noise_index) {
    return noise_index;
  };
  const std::size_t outputs = output_probs.size();
  return DiscreteMechanism(k, outputs, std::move(output_probs), apply);
}

}  // namespace

TEST_CASE("posterior enumeration") {
  SUBCASE("constant mechanism returns the prior") {
    Rng rng(2);
    const DiscreteMechanism mech = constant_mechanism(3, {0.2, 0.3, 0.5});
    const MembershipPrior prior = random_bernoulli_prior(3, rng);
    const PosteriorTable table = enumerate_posterior(mech, prior);
    REQUIRE(table.outputs.size() == 3);
    for (const PosteriorOutput& out : table.outputs) {
      for (std::size_t b = 0; b < 8; ++b) {
        CHECK(out.posterior[b] ==
              doctest::Approx(prior.pmf(membership_from_index(b, 3)))
                  .epsilon(1e-12));
      }
    }
  }

  SUBCASE("noiseless bitflip is a point mass") {
    const DiscreteMechanism mech = bitflip_mechanism(3, 0.0);
    const MembershipPrior prior = MembershipPrior::independent_bernoulli(3,
                                                                         0.5);
    const PosteriorTable table = enumerate_posterior(mech, prior);
    for (const PosteriorOutput& out : table.outputs) {
      CHECK(out.posterior[out.symbol] == doctest::Approx(1.0));
    }
  }

  SUBCASE("hand Bayes at K = 1") {
    const DiscreteMechanism mech = bitflip_mechanism(1, 0.25);
    const MembershipPrior prior = MembershipPrior::independent_bernoulli(1,
                                                                         0.5);
    const PosteriorTable table = enumerate_posterior(mech, prior);
    REQUIRE(table.outputs.size() == 2);
    CHECK(table.outputs[1].marginals[0] == doctest::Approx(0.75));
    CHECK(table.outputs[0].marginals[0] == doctest::Approx(0.25));
  }

  SUBCASE("posteriors normalize and marginals are consistent") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t k = 1 + rng.uniform_index(5);
      const DiscreteMechanism mech = random_discrete_mechanism(k, 6, rng);
      const MembershipPrior prior = random_bernoulli_prior(k, rng);
      const PosteriorTable table = enumerate_posterior(mech, prior);
      for (const PosteriorOutput& out : table.outputs) {
        double total = 0.0;
        for (double mu : out.posterior) total += mu;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t i = 0; i < k; ++i) {
          double marginal = 0.0;
          for (std::size_t b = 0; b < out.posterior.size(); ++b) {
            if ((b >> i) & 1) marginal += out.posterior[b];
          }
          CHECK(out.marginals[i] == doctest::Approx(marginal).epsilon(1e-12));
        }
      }
    }
  }

  SUBCASE("enumeration guard fails loudly") {
    const DiscreteMechanism mech = bitflip_mechanism(13, 0.25);
    const MembershipPrior prior =
        MembershipPrior::independent_bernoulli(13, 0.5);
    CHECK_THROWS_AS(enumerate_posterior(mech, prior), CapabilityError);
  }
}

TEST_CASE("exact conditional entropy") {
  SUBCASE("constant mechanism: entropy of the prior") {
    const DiscreteMechanism mech = constant_mechanism(4, {0.5, 0.5});
    const MembershipPrior prior = MembershipPrior::independent_bernoulli(4,
                                                                         0.5);
    CHECK(exact_conditional_entropy(mech, prior) ==
          doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
  }

  SUBCASE("noiseless bitflip reveals everything") {
    const DiscreteMechanism mech = bitflip_mechanism(4, 0.0);
    const MembershipPrior prior = MembershipPrior::independent_bernoulli(4,
                                                                         0.5);
    CHECK(exact_conditional_entropy(mech, prior) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("hand value at K = 1, flip 0.25") {
    const DiscreteMechanism mech = bitflip_mechanism(1, 0.25);
    const MembershipPrior prior = MembershipPrior::independent_bernoulli(1,
                                                                         0.5);
    const double h = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
    CHECK(exact_conditional_entropy(mech, prior) ==
          doctest::Approx(h).epsilon(1e-12));
    CHECK(h == doctest::Approx(0.5623).epsilon(1e-3));
  }

  SUBCASE("bounded by the prior entropy; marginal CEL matches on products") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t k = 1 + rng.uniform_index(5);
      const DiscreteMechanism mech = random_discrete_mechanism(k, 6, rng);
      const MembershipPrior prior = random_bernoulli_prior(k, rng);
      const double h = exact_conditional_entropy(mech, prior);
      CHECK(h >= -1e-12);
      CHECK(h <= prior_entropy(prior) + 1e-9);
      // Per-individual scorers can never beat the joint posterior.
      CHECK(exact_marginal_cel(mech, prior) >= h - 1e-9);
    }
    // Bit-flip channels factorize, so the two risks coincide.
    const DiscreteMechanism mech = bitflip_mechanism(5, 0.25);
    const MembershipPrior prior = MembershipPrior::independent_bernoulli(5,
                                                                         0.5);
    CHECK(exact_marginal_cel(mech, prior) ==
          doctest::Approx(exact_conditional_entropy(mech, prior))
              .epsilon(1e-12));
  }
}

TEST_CASE("lemma 1: posterior minimizes the CEL") {
  Rng rng(23);
  const DiscreteMechanism mech = bitflip_mechanism(3, 0.25);
  const MembershipPrior prior = MembershipPrior::independent_bernoulli(3, 0.5);

  SUBCASE("zero jitter has zero margin") {
    CHECK(verify_lemma1(mech, prior, 5, 0.0, rng) == doctest::Approx(0.0));
  }

  SUBCASE("nonzero jitter has strictly positive margin") {
    CHECK(verify_lemma1(mech, prior, 50, 0.2, rng) > 0.0);
  }

  SUBCASE("randomized sweep keeps the margin nonnegative") {
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t k = 1 + rng.uniform_index(6);
      const DiscreteMechanism random_mech =
          random_discrete_mechanism(k, 8, rng);
      const MembershipPrior random_prior = random_bernoulli_prior(k, rng);
      CHECK(verify_lemma1(random_mech, random_prior, 20, 0.3, rng) >= -1e-9);
    }
  }
}

TEST_CASE("composition reports") {
  const MembershipPrior uniform = MembershipPrior::independent_bernoulli(2,
                                                                         0.5);
  SUBCASE("single mechanism: zero residual") {
    const CompositionReport report = composition_decomposition(
        {bitflip_mechanism(2, 0.25)}, Coupling::kIndependent, uniform);
    CHECK(report.per_mech_cels.size() == 1);
    CHECK(report.residual == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.joint_cel == doctest::Approx(report.per_mech_cels[0]));
  }

  SUBCASE("two constant mechanisms") {
    const std::vector<DiscreteMechanism> mechs = {
        constant_mechanism(2, {0.5, 0.5}), constant_mechanism(2, {0.5, 0.5})};
    const CompositionReport report =
        composition_decomposition(mechs, Coupling::kIndependent, uniform);
    const double k_ln2 = 2.0 * std::log(2.0);
    CHECK(report.joint_cel == doctest::Approx(k_ln2).epsilon(1e-12));
    CHECK(report.per_mech_cels[0] == doctest::Approx(k_ln2).epsilon(1e-12));
    CHECK(report.per_mech_cels[1] == doctest::Approx(k_ln2).epsilon(1e-12));
    CHECK(report.residual == doctest::Approx(-k_ln2).epsilon(1e-12));
  }

  SUBCASE("dual implementation agrees") {
    Rng rng(31);
    const std::vector<DiscreteMechanism> mechs = {
        bitflip_mechanism(2, 0.25), bitflip_mechanism(2, 0.25)};
    const CompositionReport a =
        composition_decomposition(mechs, Coupling::kIndependent, uniform);
    const CompositionReport b = composition_decomposition_recheck(
        mechs, Coupling::kIndependent, uniform);
    CHECK(std::abs(a.joint_cel - b.joint_cel) < 1e-10);
    CHECK(std::abs(a.residual - b.residual) < 1e-10);
    CHECK(std::abs(a.candidate_lambda_entropy - b.candidate_lambda_entropy) <
          1e-10);
    CHECK(std::abs(a.candidate_lambda_kl - b.candidate_lambda_kl) < 1e-10);
  }

  SUBCASE("noiseless copies: residual differs from H(Q)") {
    const std::vector<DiscreteMechanism> mechs = {bitflip_mechanism(2, 0.0),
                                                  bitflip_mechanism(2, 0.0)};
    const CompositionReport report =
        composition_decomposition(mechs, Coupling::kIndependent, uniform);
    CHECK(report.joint_cel == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.residual == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.candidate_lambda_entropy ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("post-processing never reveals more") {
  const DiscreteMechanism mech = bitflip_mechanism(3, 0.2);
  const MembershipPrior prior = MembershipPrior::independent_bernoulli(3, 0.5);

  SUBCASE("identity partition: equal risks") {
    std::vector<std::size_t> identity(mech.output_count());
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
    const auto [before, after] = verify_post_processing(mech, identity, prior);
    CHECK(after == doctest::Approx(before).epsilon(1e-12));
  }

  SUBCASE("collapse: risk equals the prior entropy") {
    const std::vector<std::size_t> collapse(mech.output_count(), 0);
    const auto [before, after] = verify_post_processing(mech, collapse, prior);
    CHECK(after == doctest::Approx(prior_entropy(prior)).epsilon(1e-9));
    CHECK(after >= before - 1e-9);
  }
}

TEST_CASE("prior mismatch") {
  Rng rng(44);
  const DiscreteMechanism mech = bitflip_mechanism(3, 0.25);
  const MembershipPrior theta = random_bernoulli_prior(3, rng);

  SUBCASE("matched priors are equal") {
    const auto [matched, mismatched] = verify_prior_mismatch(mech, theta,
                                                             theta);
    CHECK(mismatched == doctest::Approx(matched).epsilon(1e-12));
  }

  SUBCASE("uninformative mechanism: gap is exactly the KL divergence") {
    const DiscreteMechanism constant = constant_mechanism(3, {0.4, 0.6});
    const MembershipPrior sigma = random_bernoulli_prior(3, rng);
    const auto [matched, mismatched] =
        verify_prior_mismatch(constant, theta, sigma);
    double kl = 0.0;
    for (std::size_t b = 0; b < 8; ++b) {
      const MembershipVector bv = membership_from_index(b, 3);
      const double t = theta.pmf(bv);
      if (t > 0.0) kl += t * std::log(t / sigma.pmf(bv));
    }
    CHECK(mismatched - matched == doctest::Approx(kl).epsilon(1e-9));
  }
}

TEST_CASE("signal refinement") {
  const DiscreteMechanism mech = bitflip_mechanism(2, 0.25);
  const MembershipPrior theta = MembershipPrior::independent_bernoulli(2, 0.5);

  SUBCASE("uninformative signal: equality") {
    const std::vector<std::vector<double>> kernel(4, {0.5, 0.5});
    const auto [base, refined] = verify_signal_refinement(mech, theta, kernel);
    CHECK(refined == doctest::Approx(base).epsilon(1e-12));
  }

  SUBCASE("fully revealing signal: refined CEL is zero") {
    std::vector<std::vector<double>> kernel(4, std::vector<double>(4, 0.0));
    for (std::size_t b = 0; b < 4; ++b) kernel[b][b] = 1.0;
    const auto [base, refined] = verify_signal_refinement(mech, theta, kernel);
    CHECK(refined == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(base > 0.0);
  }
}

TEST_CASE("bit-flip privacy profile") {
  CHECK(privacy_profile_bitflip(0.5, 0.0) == 0.0);
  CHECK(privacy_profile_bitflip(0.5, 1.7) == 0.0);
  CHECK(privacy_profile_bitflip(0.25, 0.0) == doctest::Approx(0.5));
  CHECK(privacy_profile_bitflip(0.0, 3.0) == 1.0);
  CHECK(privacy_profile_bitflip_bruteforce(0.0, 3.0) == 1.0);

  for (int qi = 1; qi <= 10; ++qi) {
    for (int ei = 0; ei <= 20; ++ei) {
      const double q = 0.05 * qi;
      const double eps = 0.15 * ei;
      CHECK(std::abs(privacy_profile_bitflip(q, eps) -
                     privacy_profile_bitflip_bruteforce(q, eps)) < 1e-12);
    }
  }
}

TEST_CASE("dp membership advantage bound") {
  CHECK(dp_membership_advantage_bound(0.0, 0.0) == 0.0);
  CHECK(dp_membership_advantage_bound(std::log(3.0), 0.0) ==
        doctest::Approx(0.5));
  CHECK(dp_membership_advantage_bound(50.0, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("theorem 3 ordering") {
  Rng rng(55);
  std::vector<double> gammas = {0.25, 0.5, 0.75, 1.0};
  std::vector<double> epsilons = {0.0, 0.5, 1.0, 2.0};

  SUBCASE("equal flip probabilities: everything ties") {
    const Theorem3Report report =
        verify_theorem3_ordering(0.3, 0.3, 3, 10, gammas, epsilons, rng);
    CHECK(report.cel_ordering_holds);
    CHECK(report.profile_ordering_holds);
    CHECK(report.bwma_ordering_holds);
    CHECK(report.min_cel_gap == doctest::Approx(0.0).epsilon(1e-9));
  }

  SUBCASE("noisier mechanism dominates") {
    const Theorem3Report report =
        verify_theorem3_ordering(0.4, 0.2, 3, 25, gammas, epsilons, rng);
    CHECK(report.cel_ordering_holds);
    CHECK(report.profile_ordering_holds);
    CHECK(report.bwma_ordering_holds);
    CHECK(report.violations == 0);
    CHECK(report.min_cel_gap > 0.0);
  }

  SUBCASE("swapped roles hold with the orderings reversed") {
    const Theorem3Report report =
        verify_theorem3_ordering(0.2, 0.4, 3, 10, gammas, epsilons, rng);
    CHECK_FALSE(report.cel_ordering_holds);
  }
}

TEST_CASE("assumption 2 comparison on the bit-flip family") {
  const std::vector<bngp::verification::CheckResult> results =
      bngp::verification::check_assumption2();
  for (const auto& result : results) {
    INFO(result.check, " ", result.instance, " value ", result.value);
    CHECK(result.pass);
  }
}

TEST_CASE("assumption 2: non-monotone family is rejected") {
  const MembershipPrior prior = MembershipPrior::independent_bernoulli(2, 0.5);
  std::vector<FamilyPoint> family;
  family.push_back({bitflip_mechanism(2, 0.3), 0.3, 0.3});
  family.push_back({bitflip_mechanism(2, 0.1), 0.1, 0.1});
  CHECK_THROWS_AS(
      verify_assumption2_comparison(family, prior,
                                    BudgetMode::kUtilityBudget, 0.2, {}),
      ParameterError);
}
