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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "bngp/dataset.hpp"

using namespace bngp;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("synthetic population: degenerate single cell pins p_bar") {
  const double ceiling = 1.0 - kPFloor;
  const PopulationDataset data =
      generate_synthetic_population(1, 1, ceiling, ceiling, 42);
  CHECK(data.population_size() == 1);
  CHECK(data.attribute_count() == 1);
  CHECK(data.reference_frequencies()[0] == doctest::Approx(ceiling));
  CHECK((data.bit(0, 0) == 0 || data.bit(0, 0) == 1));
}

TEST_CASE("synthetic population: fixed seed is bit-identical") {
  const PopulationDataset a = generate_synthetic_population(4, 8, 0.2, 0.8, 7);
  const PopulationDataset b = generate_synthetic_population(4, 8, 0.2, 0.8, 7);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t j = 0; j < 8; ++j) {
      CHECK(a.bit(k, j) == b.bit(k, j));
    }
  }
  CHECK(a.reference_frequencies() == b.reference_frequencies());
}

TEST_CASE("synthetic population: column means concentrate around q_j") {
  const std::size_t population = 800;
  const std::size_t attributes = 5000;
  const PopulationDataset data =
      generate_synthetic_population(population, attributes, 0.05, 0.95, 1);
  std::size_t within = 0;
  for (std::size_t j = 0; j < attributes; ++j) {
    double mean = 0.0;
    for (std::size_t k = 0; k < population; ++k) mean += data.bit(k, j);
    mean /= static_cast<double>(population);
    const double q = data.reference_frequencies()[j];
    const double sigma =
        std::sqrt(q * (1.0 - q) / static_cast<double>(population));
    if (std::abs(mean - q) <= 3.0 * sigma) ++within;
  }
  CHECK(within >= static_cast<std::size_t>(0.99 * attributes));
}

TEST_CASE("synthetic population: invalid ranges are rejected") {
  CHECK_THROWS_AS(generate_synthetic_population(4, 4, 0.8, 0.2, 1),
                  ParameterError);
  CHECK_THROWS_AS(generate_synthetic_population(4, 4, 0.0, 0.5, 1),
                  ParameterError);
  CHECK_THROWS_AS(generate_synthetic_population(0, 4, 0.2, 0.5, 1),
                  ParameterError);
}

TEST_CASE("membership priors: trivial samples") {
  Rng rng(3);
  const MembershipPrior zeros = MembershipPrior::independent_bernoulli(6, 0.0);
  CHECK(zeros.sample(rng).count_ones() == 0);
  const MembershipPrior all = MembershipPrior::fixed_size_uniform(6, 6);
  CHECK(all.sample(rng).count_ones() == 6);
}

TEST_CASE("membership priors: pmf sums to one over the hypercube") {
  Rng rng(11);
  std::vector<double> pi(10);
  for (double& p : pi) p = rng.uniform();
  const MembershipPrior bernoulli =
      MembershipPrior::independent_bernoulli(pi);
  const MembershipPrior fixed = MembershipPrior::fixed_size_uniform(10, 4);
  double bernoulli_total = 0.0;
  double fixed_total = 0.0;
  for (std::uint64_t i = 0; i < (1ULL << 10); ++i) {
    const MembershipVector b = membership_from_index(i, 10);
    bernoulli_total += bernoulli.pmf(b);
    fixed_total += fixed.pmf(b);
  }
  CHECK(bernoulli_total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fixed_total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("membership priors: sampler matches the pmf") {
  const std::size_t k = 8;
  const std::size_t draws = 100000;
  Rng rng(17);

  // Wilson-Hilferty approximation of the 1 - 1e-3 chi-square quantile.
  auto chi2_threshold = [](double dof) {
    const double z = 3.0902;  // Phi^{-1}(0.999)
    const double t = 1.0 - 2.0 / (9.0 * dof) + z * std::sqrt(2.0 / (9.0 * dof));
    return dof * t * t * t;
  };

  SUBCASE("independent bernoulli 0.5: every cell within 5 sigma") {
    const MembershipPrior prior = MembershipPrior::independent_bernoulli(k,
                                                                         0.5);
    std::vector<std::size_t> counts(1 << k, 0);
    for (std::size_t i = 0; i < draws; ++i) {
      ++counts[membership_to_index(prior.sample(rng))];
    }
    const double expected = 1.0 / 256.0;
    const double sigma =
        std::sqrt(expected * (1.0 - expected) / static_cast<double>(draws));
    double chi2 = 0.0;
    for (std::size_t cell = 0; cell < counts.size(); ++cell) {
      const double frequency =
          static_cast<double>(counts[cell]) / static_cast<double>(draws);
      CHECK(std::abs(frequency - expected) <= 5.0 * sigma);
      const double e = expected * draws;
      chi2 += (counts[cell] - e) * (counts[cell] - e) / e;
    }
    CHECK(chi2 < chi2_threshold(255.0));
  }

  SUBCASE("fixed size uniform: chi-square over supported vectors") {
    const MembershipPrior prior = MembershipPrior::fixed_size_uniform(k, 3);
    std::map<std::uint64_t, std::size_t> counts;
    for (std::size_t i = 0; i < draws; ++i) {
      ++counts[membership_to_index(prior.sample(rng))];
    }
    const double support = 56.0;  // C(8,3)
    CHECK(counts.size() == 56);
    double chi2 = 0.0;
    for (const auto& [vector_index, count] : counts) {
      CHECK(membership_from_index(vector_index, k).count_ones() == 3);
      const double e = draws / support;
      chi2 += (count - e) * (count - e) / e;
    }
    CHECK(chi2 < chi2_threshold(55.0));
  }
}

TEST_CASE("population csv: parse, reject, round-trip") {
  SUBCASE("reference row plus bit rows") {
    const std::string path = temp_path("bngp_test_basic.csv");
    std::ofstream(path) << "#ref,0.5,0.5\n1,0\n1,1\n";
    const PopulationDataset data = load_population_csv(path);
    CHECK(data.population_size() == 2);
    CHECK(data.attribute_count() == 2);
    CHECK(data.reference_frequencies()[0] == doctest::Approx(0.5));
    CHECK(data.bit(0, 0) == 1);
    CHECK(data.bit(0, 1) == 0);
    CHECK(data.bit(1, 1) == 1);
    std::filesystem::remove(path);
  }

  SUBCASE("non-binary cell names row and column") {
    const std::string path = temp_path("bngp_test_bad.csv");
    std::ofstream(path) << "1,0\n1,2\n";
    try {
      load_population_csv(path);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      const std::string what = e.what();
      CHECK(what.find("line 2") != std::string::npos);
      CHECK(what.find("column 2") != std::string::npos);
    }
    std::filesystem::remove(path);
  }

  SUBCASE("ragged row is rejected") {
    const std::string path = temp_path("bngp_test_ragged.csv");
    std::ofstream(path) << "1,0\n1\n";
    CHECK_THROWS_AS(load_population_csv(path), ParseError);
    std::filesystem::remove(path);
  }

  SUBCASE("write then load reproduces the dataset") {
    const PopulationDataset data =
        generate_synthetic_population(12, 9, 0.1, 0.9, 5);
    const std::string path = temp_path("bngp_test_roundtrip.csv");
    save_population_csv(data, path);
    const PopulationDataset loaded = load_population_csv(path);
    REQUIRE(loaded.population_size() == data.population_size());
    REQUIRE(loaded.attribute_count() == data.attribute_count());
    for (std::size_t k = 0; k < data.population_size(); ++k) {
      for (std::size_t j = 0; j < data.attribute_count(); ++j) {
        CHECK(loaded.bit(k, j) == data.bit(k, j));
      }
    }
    for (std::size_t j = 0; j < data.attribute_count(); ++j) {
      CHECK(loaded.reference_frequencies()[j] ==
            data.reference_frequencies()[j]);
    }
    std::filesystem::remove(path);
  }
}

TEST_CASE("dataset invariants: records are binary and p_bar is clamped") {
  CHECK_THROWS_AS(
      PopulationDataset({0, 2}, 1, 2, {0.5, 0.5}), ParameterError);
  const PopulationDataset data({1, 0}, 1, 2, {0.0, 1.0});
  CHECK(data.reference_frequencies()[0] == doctest::Approx(kPFloor));
  CHECK(data.reference_frequencies()[1] == doctest::Approx(1.0 - kPFloor));
}
