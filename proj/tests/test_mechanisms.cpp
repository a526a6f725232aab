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

#include "bngp/mechanisms.hpp"
#include "bngp/oracle.hpp"

using namespace bngp;

namespace {

MembershipVector bits(std::initializer_list<int> values) {
  MembershipVector b;
  for (int v : values) b.bits.push_back(static_cast<std::uint8_t>(v));
  return b;
}

PopulationDataset tiny_dataset() {
  // records: (1,0) and (1,1)
  return PopulationDataset({1, 0, 1, 1}, 2, 2, {0.5, 0.5});
}

}  // namespace

TEST_CASE("summary statistics: direct counts and errors") {
  const PopulationDataset data = tiny_dataset();
  const SummaryStats both = summary_statistics(data, bits({1, 1}));
  CHECK(both.values[0] == doctest::Approx(1.0));
  CHECK(both.values[1] == doctest::Approx(0.5));

  const SummaryStats single = summary_statistics(data, bits({0, 1}));
  CHECK(single.values[0] == 1.0);
  CHECK(single.values[1] == 1.0);

  CHECK_THROWS_AS(summary_statistics(data, bits({0, 0})), DomainError);
}

TEST_CASE("summary statistics: exhaustive recount over all memberships") {
  const PopulationDataset data =
      generate_synthetic_population(6, 4, 0.2, 0.8, 9);
  for (std::uint64_t index = 1; index < (1ULL << 6); ++index) {
    const MembershipVector b = membership_from_index(index, 6);
    const SummaryStats stats = summary_statistics(data, b);
    for (std::size_t j = 0; j < 4; ++j) {
      // Independent recount, attribute-major.
      double count = 0.0;
      double members = 0.0;
      for (std::size_t k = 0; k < 6; ++k) {
        if (b.bits[k]) {
          members += 1.0;
          count += data.bit(k, j);
        }
      }
      CHECK(stats.values[j] == doctest::Approx(count / members).epsilon(1e-15));
    }
  }
}

TEST_CASE("clip and perturb") {
  const SummaryStats clipped = clip_unit({1.2, -0.3});
  CHECK(clipped.values[0] == 1.0);
  CHECK(clipped.values[1] == 0.0);

  const SummaryStats inside = clip_unit({0.25, 0.75});
  CHECK(inside.values[0] == 0.25);
  CHECK(inside.values[1] == 0.75);

  const SummaryStats zero_noise =
      perturb_output(SummaryStats{{0.5, 0.5}}, NoiseVector{{0.0, 0.0}, 0.5});
  CHECK(zero_noise.values[0] == 0.5);

  const SummaryStats saturated =
      perturb_output(SummaryStats{{0.9, 0.1}}, NoiseVector{{0.5, -0.5}, 0.5});
  CHECK(saturated.values[0] == 1.0);
  CHECK(saturated.values[1] == 0.0);

  CHECK_THROWS_AS(
      perturb_output(SummaryStats{{0.5}}, NoiseVector{{0.0, 0.0}, {}}),
      ParameterError);

  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> raw(7), noise(7);
    for (std::size_t j = 0; j < 7; ++j) {
      raw[j] = rng.uniform(-2.0, 2.0);
      noise[j] = rng.uniform(-2.0, 2.0);
    }
    const SummaryStats out =
        perturb_output(clip_unit(raw), NoiseVector{noise, {}});
    for (std::size_t j = 0; j < 7; ++j) {
      const double clipped_raw = std::min(1.0, std::max(0.0, raw[j]));
      const double expected =
          std::min(1.0, std::max(0.0, clipped_raw + noise[j]));
      CHECK(out.values[j] == doctest::Approx(expected).epsilon(1e-15));
    }
  }
}

TEST_CASE("laplace mechanism: scale behavior") {
  Rng rng(21);
  const SummaryStats stats{{0.3, 0.7, 0.5}};

  SUBCASE("enormous epsilon leaves the statistics untouched") {
    const LaplaceRelease release =
        laplace_mechanism(stats, {1e12, 0.0, 1.0}, rng);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(release.released.values[j] - stats.values[j]) < 1e-6);
    }
  }

  SUBCASE("epsilon zero is rejected") {
    CHECK_THROWS_AS(laplace_mechanism(stats, {0.0, 0.0, 1.0}, rng),
                    ParameterError);
  }

  SUBCASE("mean absolute noise matches the scale") {
    // scale = sensitivity/epsilon = 0.1
    const DpParams params{10.0, 0.0, 1.0};
    double total = 0.0;
    std::size_t count = 0;
    const SummaryStats wide{std::vector<double>(100, 0.5)};
    for (int i = 0; i < 10000; ++i) {
      const LaplaceRelease release = laplace_mechanism(wide, params, rng);
      for (double noise : release.noise) total += std::abs(noise);
      count += release.noise.size();
    }
    CHECK(total / static_cast<double>(count) ==
          doctest::Approx(0.1).epsilon(0.01));
  }

  SUBCASE("appendix calibration: sensitivity 12.5 at epsilon 1.25e5") {
    const DpParams params{1.25e5, 0.0, 12.5};
    double total = 0.0;
    std::size_t count = 0;
    const SummaryStats wide{std::vector<double>(1000, 0.5)};
    for (int i = 0; i < 1000; ++i) {
      const LaplaceRelease release = laplace_mechanism(wide, params, rng);
      for (double noise : release.noise) total += std::abs(noise);
      count += release.noise.size();
    }
    CHECK(total / static_cast<double>(count) ==
          doctest::Approx(1e-4).epsilon(0.01));
  }
}

TEST_CASE("sensitivity of the frequency vector") {
  CHECK(sensitivity_frequency(5000, 400) == doctest::Approx(12.5));
  CHECK(sensitivity_frequency(7, 7) == 1.0);
  CHECK(sensitivity_frequency(1, 2) == 0.5);
  CHECK_THROWS_AS(sensitivity_frequency(10, 0), ParameterError);
}

TEST_CASE("bitflip mechanism: closed-form pmf") {
  SUBCASE("flip 0 is the identity") {
    const DiscreteMechanism mech = bitflip_mechanism(3, 0.0);
    const MembershipVector b = bits({1, 0, 1});
    CHECK(mech.pmf(membership_to_index(b), b) == 1.0);
  }

  SUBCASE("flip 0.5 is uniform") {
    const DiscreteMechanism mech = bitflip_mechanism(3, 0.5);
    const MembershipVector b = bits({1, 1, 0});
    for (std::size_t y = 0; y < 8; ++y) {
      CHECK(mech.pmf(y, b) == doctest::Approx(0.125));
    }
  }

  SUBCASE("hand product at flip 0.25") {
    const DiscreteMechanism mech = bitflip_mechanism(2, 0.25);
    const MembershipVector b = bits({0, 0});
    CHECK(mech.pmf(0, b) == doctest::Approx(0.5625));
    CHECK(mech.pmf(1, b) == doctest::Approx(0.1875));
    CHECK(mech.pmf(2, b) == doctest::Approx(0.1875));
    CHECK(mech.pmf(3, b) == doctest::Approx(0.0625));
  }

  SUBCASE("out-of-range flip probability") {
    CHECK_THROWS_AS(bitflip_mechanism(2, 0.6), ParameterError);
    CHECK_THROWS_AS(bitflip_mechanism(2, -0.1), ParameterError);
  }
}

TEST_CASE("discrete mechanisms: pmf normalization and sampler fidelity") {
  Rng rng(33);
  SUBCASE("pmf rows sum to one for every membership") {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t k = 1 + rng.uniform_index(6);
      const DiscreteMechanism mech =
          oracle::random_discrete_mechanism(k, 8, rng);
      for (std::uint64_t index = 0; index < (1ULL << k); ++index) {
        const MembershipVector b = membership_from_index(index, k);
        const std::vector<double> row = mech.pmf_row(b);
        double total = 0.0;
        for (double p : row) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
    const DiscreteMechanism big = bitflip_mechanism(10, 0.3);
    const MembershipVector b = membership_from_index(777, 10);
    double total = 0.0;
    for (double p : big.pmf_row(b)) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("empirical frequencies match the exact pmf") {
    const DiscreteMechanism mech = bitflip_mechanism(4, 0.25);
    const MembershipVector b = bits({1, 0, 0, 1});
    const std::vector<double> pmf = mech.pmf_row(b);
    std::vector<std::size_t> counts(mech.output_count(), 0);
    const std::size_t draws = 100000;
    for (std::size_t i = 0; i < draws; ++i) ++counts[mech.sample(b, rng)];
    double chi2 = 0.0;
    for (std::size_t y = 0; y < counts.size(); ++y) {
      const double expected = pmf[y] * draws;
      chi2 += (counts[y] - expected) * (counts[y] - expected) / expected;
    }
    // 1 - 1e-3 quantile of chi-square with 15 dof is about 37.7.
    CHECK(chi2 < 37.7);
  }
}

TEST_CASE("discretized summary mechanism") {
  SUBCASE("point-mass noise lands on the rounded statistic") {
    const PopulationDataset data({1, 0}, 2, 1, {0.5});
    const DiscreteMechanism mech =
        discretized_summary_mechanism(data, 3, {1.0});
    const MembershipVector b = bits({1, 1});  // x-hat = 0.5 -> grid index 1
    CHECK(mech.pmf(1, b) == doctest::Approx(1.0));
    CHECK(mech.pmf(0, b) == 0.0);
  }

  SUBCASE("uniform shifts from the middle cell") {
    const PopulationDataset data({1, 0}, 2, 1, {0.5});
    const DiscreteMechanism mech = discretized_summary_mechanism(
        data, 3, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    const MembershipVector b = bits({1, 1});
    CHECK(mech.pmf(0, b) == doctest::Approx(1.0 / 3));
    CHECK(mech.pmf(1, b) == doctest::Approx(1.0 / 3));
    CHECK(mech.pmf(2, b) == doctest::Approx(1.0 / 3));
  }

  SUBCASE("clipping aggregates boundary mass") {
    const PopulationDataset data({1}, 1, 1, {0.5});
    const DiscreteMechanism mech =
        discretized_summary_mechanism(data, 3, {0.5, 0.5});  // shifts {0,+1}
    const MembershipVector b = bits({1});  // x-hat = 1.0 -> top cell
    CHECK(mech.pmf(2, b) == doctest::Approx(1.0));
  }

  SUBCASE("invalid pmf is rejected") {
    const PopulationDataset data({1}, 1, 1, {0.5});
    CHECK_THROWS_AS(discretized_summary_mechanism(data, 3, {0.5, 0.4}),
                    ParameterError);
  }
}

TEST_CASE("mechanism composition") {
  SUBCASE("n = 1 is the mechanism itself") {
    const DiscreteMechanism inner = bitflip_mechanism(2, 0.25);
    const DiscreteMechanism composed = compose_mechanisms({inner});
    const MembershipVector b = bits({1, 0});
    for (std::size_t y = 0; y < 4; ++y) {
      CHECK(composed.pmf(y, b) == doctest::Approx(inner.pmf(y, b)));
    }
  }

  SUBCASE("independent bitflips multiply marginals") {
    const DiscreteMechanism composed = compose_mechanisms(
        {bitflip_mechanism(1, 0.25), bitflip_mechanism(1, 0.25)});
    const MembershipVector b = bits({0});
    CHECK(composed.pmf(0, b) == doctest::Approx(0.5625));  // (y1,y2)=(0,0)
    CHECK(composed.pmf(1, b) == doctest::Approx(0.1875));
    CHECK(composed.pmf(2, b) == doctest::Approx(0.1875));
    CHECK(composed.pmf(3, b) == doctest::Approx(0.0625));
  }

  SUBCASE("shared noise duplicates are perfectly correlated") {
    const DiscreteMechanism mech = bitflip_mechanism(2, 0.25);
    const DiscreteMechanism coupled =
        compose_mechanisms({mech, mech}, Coupling::kSharedNoise);
    const MembershipVector b = bits({1, 0});
    for (std::size_t y1 = 0; y1 < 4; ++y1) {
      for (std::size_t y2 = 0; y2 < 4; ++y2) {
        const double p = coupled.pmf(y1 + 4 * y2, b);
        if (y1 == y2) {
          CHECK(p == doctest::Approx(mech.pmf(y1, b)));
        } else {
          CHECK(p == 0.0);
        }
      }
    }
  }
}

TEST_CASE("quantize post-processing") {
  const DiscreteMechanism mech = bitflip_mechanism(2, 0.25);
  const MembershipVector b = bits({0, 0});

  SUBCASE("identity partition keeps the pmf") {
    const DiscreteMechanism same = quantize_postprocess(mech, {0, 1, 2, 3});
    for (std::size_t y = 0; y < 4; ++y) {
      CHECK(same.pmf(y, b) == doctest::Approx(mech.pmf(y, b)));
    }
  }

  SUBCASE("collapse to a single symbol") {
    const DiscreteMechanism constant = quantize_postprocess(mech, {0, 0, 0, 0});
    CHECK(constant.output_count() == 1);
    CHECK(constant.pmf(0, b) == doctest::Approx(1.0));
  }

  SUBCASE("parity partition sums the right masses") {
    const DiscreteMechanism parity = quantize_postprocess(mech, {0, 1, 1, 0});
    CHECK(parity.pmf(0, b) == doctest::Approx(0.5625 + 0.0625));
    CHECK(parity.pmf(1, b) == doctest::Approx(0.1875 + 0.1875));
  }

  SUBCASE("partial partition is rejected") {
    CHECK_THROWS_AS(quantize_postprocess(mech, {0, 1}), ParameterError);
  }
}
