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
#ifndef BNGP_DATASET_HPP_
#define BNGP_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "bngp/common.hpp"
#include "bngp/rng.hpp"

namespace bngp {

// Length-K bit vector; bits[k] == 1 iff individual k is in the dataset.
struct MembershipVector {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  std::size_t count_ones() const;
};

// K x m binary attribute matrix together with per-attribute reference
// frequencies (the attacker's external knowledge about the population).
// Immutable after construction; safe to share across concurrent readers.
class PopulationDataset {
 public:
  PopulationDataset(std::vector<std::uint8_t> records, std::size_t population,
                    std::size_t attributes,
                    std::vector<double> reference_frequencies,
                    double p_floor = kPFloor);

  std::size_t population_size() const { return population_; }
  std::size_t attribute_count() const { return attributes_; }
  double p_floor() const { return p_floor_; }

  std::uint8_t bit(std::size_t individual, std::size_t attribute) const {
    return records_[individual * attributes_ + attribute];
  }
  // Row view of one individual's attribute bits.
  const std::uint8_t* record(std::size_t individual) const {
    return records_.data() + individual * attributes_;
  }
  const std::vector<double>& reference_frequencies() const {
    return reference_frequencies_;
  }

 private:
  std::vector<std::uint8_t> records_;  // row-major, population_ x attributes_
  std::size_t population_ = 0;
  std::size_t attributes_ = 0;
  std::vector<double> reference_frequencies_;
  double p_floor_ = kPFloor;
};

// Distribution over membership vectors. Two kinds:
//   - IndependentBernoulli: each b_k ~ Bernoulli(pi_k) independently;
//   - FixedSizeUniform: uniform over vectors with exactly n ones.
class MembershipPrior {
 public:
  enum class Kind { kIndependentBernoulli, kFixedSizeUniform };

  static MembershipPrior independent_bernoulli(std::vector<double> pi);
  // All individuals share the same inclusion probability p.
  static MembershipPrior independent_bernoulli(std::size_t population,
                                               double p);
  static MembershipPrior fixed_size_uniform(std::size_t population,
                                            std::size_t n);

  Kind kind() const { return kind_; }
  std::size_t population_size() const { return population_; }
  std::size_t fixed_size() const { return n_; }
  const std::vector<double>& inclusion_probabilities() const { return pi_; }

  double pmf(const MembershipVector& b) const;
  double log_pmf(const MembershipVector& b) const;
  // Marginal Pr[b_k = 1].
  double marginal(std::size_t k) const;

  MembershipVector sample(Rng& rng) const;

 private:
  MembershipPrior() = default;

  Kind kind_ = Kind::kIndependentBernoulli;
  std::size_t population_ = 0;
  std::vector<double> pi_;      // IndependentBernoulli
  std::size_t n_ = 0;           // FixedSizeUniform
  double log_choose_ = 0.0;     // log C(K, n)
};

// Enumeration helpers over {0,1}^K, shared by the oracle module.
MembershipVector membership_from_index(std::uint64_t index, std::size_t k);
std::uint64_t membership_to_index(const MembershipVector& b);

// Synthetic population: attribute j gets a frequency q_j drawn uniformly from
// [aaf_low, aaf_high]; bits are i.i.d. Bernoulli(q_j); the reference
// frequencies are the generating q_j clamped to [p_floor, 1 - p_floor].
PopulationDataset generate_synthetic_population(std::size_t population,
                                                std::size_t attributes,
                                                double aaf_low,
                                                double aaf_high,
                                                std::uint64_t seed,
                                                double p_floor = kPFloor);

// CSV schema: optional first line "#ref," followed by m comma-separated
// reference frequencies; then K lines of m comma-separated bits. If the
// reference line is absent, reference frequencies are the column means.
PopulationDataset load_population_csv(const std::string& path,
                                      double p_floor = kPFloor);
void save_population_csv(const PopulationDataset& dataset,
                         const std::string& path);

}  // namespace bngp

#endif  // BNGP_DATASET_HPP_
