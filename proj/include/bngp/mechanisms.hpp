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
#ifndef BNGP_MECHANISMS_HPP_
#define BNGP_MECHANISMS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bngp/dataset.hpp"

namespace bngp {

// Released (or raw) per-attribute frequencies; every coordinate in [0,1].
struct SummaryStats {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

// Additive noise; bound, when set, is a symmetric box constraint
// (0.5 for generator noise, unset for Laplace).
struct NoiseVector {
  std::vector<double> values;
  std::optional<double> bound;
};

struct DpParams {
  double epsilon = 0.0;
  double delta = 0.0;
  double sensitivity = 1.0;
};

// Per-attribute member frequency x_j = sum_k b_k d_kj / sum_k b_k.
SummaryStats summary_statistics(const PopulationDataset& dataset,
                                const MembershipVector& b);

// Coordinate-wise min(1, max(0, v_j)).
SummaryStats clip_unit(const std::vector<double>& v);

// clip_unit(stats + noise).
SummaryStats perturb_output(const SummaryStats& stats,
                            const NoiseVector& noise);

struct LaplaceRelease {
  SummaryStats released;
  std::vector<double> noise;  // pre-clip, retained for utility accounting
};

// Adds i.i.d. Laplace(0, sensitivity/epsilon) noise per coordinate, then
// clips to [0,1].
LaplaceRelease laplace_mechanism(const SummaryStats& stats,
                                 const DpParams& params, Rng& rng);

// Sensitivity of the frequency vector across adjacent datasets: m / k_dagger.
double sensitivity_frequency(std::size_t m, std::size_t k_dagger);

// Finite mechanism with an exactly computable conditional pmf rho(x|b).
// Internally every mechanism is a deterministic map (b, noise index) ->
// output symbol plus a distribution over noise indices; that representation
// makes shared-noise coupling and exact pmfs well defined for every wrapper.
class DiscreteMechanism {
 public:
  using ApplyFn =
      std::function<std::size_t(const MembershipVector&, std::size_t)>;
  // Optional closed-form pmf; when absent the pmf sums noise mass over the
  // preimage of the symbol.
  using PmfFn = std::function<double(std::size_t, const MembershipVector&)>;

  DiscreteMechanism(std::size_t membership_size, std::size_t output_count,
                    std::vector<double> noise_probs, ApplyFn apply,
                    PmfFn closed_form_pmf = nullptr);

  std::size_t membership_size() const { return membership_size_; }
  std::size_t output_count() const { return output_count_; }
  std::size_t noise_count() const { return noise_probs_.size(); }
  const std::vector<double>& noise_probs() const { return noise_probs_; }

  std::size_t apply(const MembershipVector& b, std::size_t noise_index) const {
    return apply_(b, noise_index);
  }
  std::size_t sample(const MembershipVector& b, Rng& rng) const;
  double pmf(std::size_t symbol, const MembershipVector& b) const;
  // Full conditional distribution over output symbols.
  std::vector<double> pmf_row(const MembershipVector& b) const;

 private:
  std::size_t membership_size_ = 0;
  std::size_t output_count_ = 0;
  std::vector<double> noise_probs_;
  ApplyFn apply_;
  PmfFn closed_form_pmf_;
};

// Output space {0,1}^K encoded as indices (bit k of the symbol is individual
// k's reported bit); each bit of b is flipped independently with probability
// flip_prob.
DiscreteMechanism bitflip_mechanism(std::size_t membership_size,
                                    double flip_prob);

// Summary statistics rounded to the grid {0, 1/(grid_size-1), ..., 1}, then
// shifted per attribute by a grid offset drawn from noise_pmf and clipped to
// the grid ends. noise_pmf[i] is the probability of offset i - (L-1)/2 for
// L = noise_pmf.size(). Output symbols enumerate grid points in row-major
// attribute order (grid_size^m symbols).
DiscreteMechanism discretized_summary_mechanism(
    const PopulationDataset& dataset, std::size_t grid_size,
    const std::vector<double>& noise_pmf);

enum class Coupling {
  kIndependent,  // each component draws its own noise
  kSharedNoise,  // one noise draw reused by every component
};

// Composition M(D) = (M_1(D), ..., M_n(D)); the joint output symbol encodes
// component symbols in mixed radix (component 0 least significant).
DiscreteMechanism compose_mechanisms(
    const std::vector<DiscreteMechanism>& mechanisms,
    Coupling coupling = Coupling::kIndependent);

std::vector<std::size_t> split_composed_symbol(
    std::size_t symbol, const std::vector<std::size_t>& output_counts);

// Post-processing by a total partition of the output space:
// pmf'(c|b) = sum over {x : partition[x] = c} of pmf(x|b).
DiscreteMechanism quantize_postprocess(const DiscreteMechanism& mechanism,
                                       const std::vector<std::size_t>& partition);

}  // namespace bngp

#endif  // BNGP_MECHANISMS_HPP_
