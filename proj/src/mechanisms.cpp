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
#include "bngp/mechanisms.hpp"

#include <algorithm>
#include <cmath>

namespace bngp {

SummaryStats summary_statistics(const PopulationDataset& dataset,
                                const MembershipVector& b) {
  if (b.size() != dataset.population_size()) {
    throw ParameterError("summary_statistics: membership length != K");
  }
  const std::size_t members = b.count_ones();
  if (members == 0) {
    throw DomainError(
        "summary_statistics: empty membership; frequencies undefined");
  }
  const std::size_t m = dataset.attribute_count();
  std::vector<double> counts(m, 0.0);
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (!b.bits[k]) continue;
    const std::uint8_t* row = dataset.record(k);
    for (std::size_t j = 0; j < m; ++j) counts[j] += row[j];
  }
  for (double& c : counts) c /= static_cast<double>(members);
  return SummaryStats{std::move(counts)};
}

SummaryStats clip_unit(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    out[j] = std::min(1.0, std::max(0.0, v[j]));
  }
  return SummaryStats{std::move(out)};
}

SummaryStats perturb_output(const SummaryStats& stats,
                            const NoiseVector& noise) {
  if (stats.size() != noise.values.size()) {
    throw ParameterError("perturb_output: dimension mismatch");
  }
  std::vector<double> sum(stats.size());
  for (std::size_t j = 0; j < sum.size(); ++j) {
    sum[j] = stats.values[j] + noise.values[j];
  }
  return clip_unit(sum);
}

LaplaceRelease laplace_mechanism(const SummaryStats& stats,
                                 const DpParams& params, Rng& rng) {
  if (!(params.epsilon > 0.0)) {
    throw ParameterError("laplace_mechanism: epsilon must be positive");
  }
  if (!(params.sensitivity > 0.0)) {
    throw ParameterError("laplace_mechanism: sensitivity must be positive");
  }
  const double scale = params.sensitivity / params.epsilon;
  NoiseVector noise;
  noise.values.resize(stats.size());
  for (double& v : noise.values) v = rng.laplace(scale);
  LaplaceRelease release;
  release.released = perturb_output(stats, noise);
  release.noise = std::move(noise.values);
  return release;
}

double sensitivity_frequency(std::size_t m, std::size_t k_dagger) {
  if (k_dagger == 0) {
    throw ParameterError("sensitivity_frequency: k_dagger must be >= 1");
  }
  return static_cast<double>(m) / static_cast<double>(k_dagger);
}

DiscreteMechanism::DiscreteMechanism(std::size_t membership_size,
                                     std::size_t output_count,
                                     std::vector<double> noise_probs,
                                     ApplyFn apply, PmfFn closed_form_pmf)
    : membership_size_(membership_size),
      output_count_(output_count),
      noise_probs_(std::move(noise_probs)),
      apply_(std::move(apply)),
      closed_form_pmf_(std::move(closed_form_pmf)) {
  if (output_count_ == 0 || noise_probs_.empty() || !apply_) {
    throw ParameterError("DiscreteMechanism: empty output or noise space");
  }
  double total = 0.0;
  for (double p : noise_probs_) {
    if (!(p >= 0.0)) {
      throw ParameterError("DiscreteMechanism: negative noise probability");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ParameterError("DiscreteMechanism: noise pmf does not sum to 1");
  }
}

std::size_t DiscreteMechanism::sample(const MembershipVector& b,
                                      Rng& rng) const {
  return apply_(b, rng.categorical(noise_probs_));
}

double DiscreteMechanism::pmf(std::size_t symbol,
                              const MembershipVector& b) const {
  if (symbol >= output_count_) {
    throw ParameterError("DiscreteMechanism::pmf: symbol out of range");
  }
  if (closed_form_pmf_) return closed_form_pmf_(symbol, b);
  double mass = 0.0;
  for (std::size_t i = 0; i < noise_probs_.size(); ++i) {
    if (apply_(b, i) == symbol) mass += noise_probs_[i];
  }
  return mass;
}

std::vector<double> DiscreteMechanism::pmf_row(
    const MembershipVector& b) const {
  std::vector<double> row(output_count_, 0.0);
  if (closed_form_pmf_) {
    for (std::size_t x = 0; x < output_count_; ++x) {
      row[x] = closed_form_pmf_(x, b);
    }
  } else {
    for (std::size_t i = 0; i < noise_probs_.size(); ++i) {
      row[apply_(b, i)] += noise_probs_[i];
    }
  }
  return row;
}

DiscreteMechanism bitflip_mechanism(std::size_t membership_size,
                                    double flip_prob) {
  if (!(flip_prob >= 0.0 && flip_prob <= 0.5)) {
    throw ParameterError("bitflip_mechanism: flip_prob must be in [0, 0.5]");
  }
  if (membership_size == 0 || membership_size > 20) {
    throw ParameterError("bitflip_mechanism: membership size out of range");
  }
  const std::size_t space = std::size_t{1} << membership_size;
  // Noise index is the flip pattern; its probability factorizes per bit.
  std::vector<double> noise_probs(space);
  for (std::size_t pattern = 0; pattern < space; ++pattern) {
    double p = 1.0;
    for (std::size_t k = 0; k < membership_size; ++k) {
      p *= (pattern >> k) & 1 ? flip_prob : 1.0 - flip_prob;
    }
    noise_probs[pattern] = p;
  }
  auto apply = [membership_size](const MembershipVector& b,
                                 std::size_t pattern) {
    std::uint64_t y = membership_to_index(b);
    return static_cast<std::size_t>(y ^ pattern);
  };
  auto pmf = [membership_size, flip_prob](std::size_t symbol,
                                          const MembershipVector& b) {
    double p = 1.0;
    for (std::size_t k = 0; k < membership_size; ++k) {
      const bool flipped = ((symbol >> k) & 1) != (b.bits[k] != 0);
      p *= flipped ? flip_prob : 1.0 - flip_prob;
    }
    return p;
  };
  return DiscreteMechanism(membership_size, space, std::move(noise_probs),
                           std::move(apply), std::move(pmf));
}

namespace {

std::size_t rounded_grid_index(double value, std::size_t grid_size) {
  const double scaled = value * static_cast<double>(grid_size - 1);
  const auto index = static_cast<long long>(std::llround(scaled));
  const long long hi = static_cast<long long>(grid_size) - 1;
  return static_cast<std::size_t>(std::min(hi, std::max(0LL, index)));
}

}  // namespace

DiscreteMechanism discretized_summary_mechanism(
    const PopulationDataset& dataset, std::size_t grid_size,
    const std::vector<double>& noise_pmf) {
  if (grid_size < 2) {
    throw ParameterError("discretized_summary_mechanism: grid_size >= 2");
  }
  if (noise_pmf.empty()) {
    throw ParameterError("discretized_summary_mechanism: empty noise pmf");
  }
  double total = 0.0;
  for (double p : noise_pmf) {
    if (!(p >= 0.0)) {
      throw ParameterError("discretized_summary_mechanism: negative mass");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ParameterError(
        "discretized_summary_mechanism: noise pmf does not sum to 1");
  }

  const std::size_t m = dataset.attribute_count();
  const std::size_t shifts = noise_pmf.size();
  const long long offset0 = -static_cast<long long>((shifts - 1) / 2);

  std::size_t output_count = 1;
  std::size_t noise_count = 1;
  for (std::size_t j = 0; j < m; ++j) {
    if (output_count > (std::size_t{1} << 48) / grid_size ||
        noise_count > (std::size_t{1} << 48) / shifts) {
      throw ParameterError(
          "discretized_summary_mechanism: output space too large");
    }
    output_count *= grid_size;
    noise_count *= shifts;
  }
  std::vector<double> noise_probs(noise_count);
  for (std::size_t i = 0; i < noise_count; ++i) {
    double p = 1.0;
    std::size_t rest = i;
    for (std::size_t j = 0; j < m; ++j) {
      p *= noise_pmf[rest % shifts];
      rest /= shifts;
    }
    noise_probs[i] = p;
  }

  // The dataset is shared by the apply/pmf closures; datasets are immutable.
  auto base = std::make_shared<PopulationDataset>(dataset);

  auto grid_of = [base, grid_size, m](const MembershipVector& b) {
    SummaryStats stats = summary_statistics(*base, b);
    std::vector<std::size_t> grid(m);
    for (std::size_t j = 0; j < m; ++j) {
      grid[j] = rounded_grid_index(stats.values[j], grid_size);
    }
    return grid;
  };

  auto apply = [grid_of, grid_size, shifts, offset0,
                m](const MembershipVector& b, std::size_t noise_index) {
    const std::vector<std::size_t> grid = grid_of(b);
    std::size_t symbol = 0;
    std::size_t radix = 1;
    std::size_t rest = noise_index;
    for (std::size_t j = 0; j < m; ++j) {
      const long long offset = offset0 + static_cast<long long>(rest % shifts);
      rest /= shifts;
      long long cell = static_cast<long long>(grid[j]) + offset;
      cell = std::min<long long>(static_cast<long long>(grid_size) - 1,
                                 std::max<long long>(0, cell));
      symbol += static_cast<std::size_t>(cell) * radix;
      radix *= grid_size;
    }
    return symbol;
  };

  auto pmf = [grid_of, grid_size, noise_pmf, offset0,
              m](std::size_t symbol, const MembershipVector& b) {
    const std::vector<std::size_t> grid = grid_of(b);
    double p = 1.0;
    std::size_t rest = symbol;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t target = rest % grid_size;
      rest /= grid_size;
      // Clipping aggregates all mass that lands beyond a grid end.
      double mass = 0.0;
      for (std::size_t i = 0; i < noise_pmf.size(); ++i) {
        const long long offset = offset0 + static_cast<long long>(i);
        long long cell = static_cast<long long>(grid[j]) + offset;
        cell = std::min<long long>(static_cast<long long>(grid_size) - 1,
                                   std::max<long long>(0, cell));
        if (static_cast<std::size_t>(cell) == target) mass += noise_pmf[i];
      }
      p *= mass;
    }
    return p;
  };

  return DiscreteMechanism(dataset.population_size(), output_count,
                           std::move(noise_probs), std::move(apply),
                           std::move(pmf));
}

std::vector<std::size_t> split_composed_symbol(
    std::size_t symbol, const std::vector<std::size_t>& output_counts) {
  std::vector<std::size_t> parts(output_counts.size());
  for (std::size_t j = 0; j < output_counts.size(); ++j) {
    parts[j] = symbol % output_counts[j];
    symbol /= output_counts[j];
  }
  return parts;
}

DiscreteMechanism compose_mechanisms(
    const std::vector<DiscreteMechanism>& mechanisms, Coupling coupling) {
  if (mechanisms.empty()) {
    throw ParameterError("compose_mechanisms: empty mechanism list");
  }
  const std::size_t membership_size = mechanisms.front().membership_size();
  for (const DiscreteMechanism& mech : mechanisms) {
    if (mech.membership_size() != membership_size) {
      throw ParameterError(
          "compose_mechanisms: mechanisms disagree on membership space");
    }
  }
  std::vector<std::size_t> output_counts;
  output_counts.reserve(mechanisms.size());
  std::size_t output_count = 1;
  for (const DiscreteMechanism& mech : mechanisms) {
    output_counts.push_back(mech.output_count());
    if (output_count > (std::size_t{1} << 48) / mech.output_count()) {
      throw ParameterError("compose_mechanisms: joint output space too large");
    }
    output_count *= mech.output_count();
  }
  auto parts = std::make_shared<std::vector<DiscreteMechanism>>(mechanisms);

  if (coupling == Coupling::kSharedNoise) {
    const std::vector<double>& shared = mechanisms.front().noise_probs();
    for (const DiscreteMechanism& mech : mechanisms) {
      if (mech.noise_count() != shared.size()) {
        throw ParameterError(
            "compose_mechanisms: shared noise requires identical noise "
            "spaces");
      }
      for (std::size_t i = 0; i < shared.size(); ++i) {
        if (std::abs(mech.noise_probs()[i] - shared[i]) > 1e-15) {
          throw ParameterError(
              "compose_mechanisms: shared noise requires identical noise "
              "distributions");
        }
      }
    }
    auto apply = [parts, output_counts](const MembershipVector& b,
                                        std::size_t noise_index) {
      std::size_t symbol = 0;
      std::size_t radix = 1;
      for (std::size_t j = 0; j < parts->size(); ++j) {
        symbol += (*parts)[j].apply(b, noise_index) * radix;
        radix *= output_counts[j];
      }
      return symbol;
    };
    // No closed form: the pmf sums shared-noise mass over the joint preimage.
    return DiscreteMechanism(membership_size, output_count,
                             std::vector<double>(shared), std::move(apply));
  }

  std::vector<std::size_t> noise_counts;
  std::size_t noise_count = 1;
  for (const DiscreteMechanism& mech : mechanisms) {
    noise_counts.push_back(mech.noise_count());
    if (noise_count > (std::size_t{1} << 48) / mech.noise_count()) {
      throw ParameterError("compose_mechanisms: joint noise space too large");
    }
    noise_count *= mech.noise_count();
  }
  std::vector<double> noise_probs(noise_count);
  for (std::size_t i = 0; i < noise_count; ++i) {
    double p = 1.0;
    std::size_t rest = i;
    for (std::size_t j = 0; j < mechanisms.size(); ++j) {
      p *= mechanisms[j].noise_probs()[rest % noise_counts[j]];
      rest /= noise_counts[j];
    }
    noise_probs[i] = p;
  }
  auto apply = [parts, output_counts, noise_counts](const MembershipVector& b,
                                                    std::size_t noise_index) {
    std::size_t symbol = 0;
    std::size_t radix = 1;
    std::size_t rest = noise_index;
    for (std::size_t j = 0; j < parts->size(); ++j) {
      symbol += (*parts)[j].apply(b, rest % noise_counts[j]) * radix;
      radix *= output_counts[j];
      rest /= noise_counts[j];
    }
    return symbol;
  };
  auto pmf = [parts, output_counts](std::size_t symbol,
                                    const MembershipVector& b) {
    double p = 1.0;
    for (std::size_t j = 0; j < parts->size(); ++j) {
      p *= (*parts)[j].pmf(symbol % output_counts[j], b);
      symbol /= output_counts[j];
    }
    return p;
  };
  return DiscreteMechanism(membership_size, output_count,
                           std::move(noise_probs), std::move(apply),
                           std::move(pmf));
}

DiscreteMechanism quantize_postprocess(
    const DiscreteMechanism& mechanism,
    const std::vector<std::size_t>& partition) {
  if (partition.size() != mechanism.output_count()) {
    throw ParameterError(
        "quantize_postprocess: partition must cover the whole output space");
  }
  std::size_t coarse_count = 0;
  for (std::size_t c : partition) coarse_count = std::max(coarse_count, c + 1);
  auto inner = std::make_shared<DiscreteMechanism>(mechanism);
  auto part = std::make_shared<std::vector<std::size_t>>(partition);
  auto apply = [inner, part](const MembershipVector& b,
                             std::size_t noise_index) {
    return (*part)[inner->apply(b, noise_index)];
  };
  auto pmf = [inner, part, coarse_count](std::size_t symbol,
                                         const MembershipVector& b) {
    if (symbol >= coarse_count) return 0.0;
    double mass = 0.0;
    const std::vector<double> row = inner->pmf_row(b);
    for (std::size_t x = 0; x < row.size(); ++x) {
      if ((*part)[x] == symbol) mass += row[x];
    }
    return mass;
  };
  return DiscreteMechanism(mechanism.membership_size(), coarse_count,
                           std::vector<double>(mechanism.noise_probs()),
                           std::move(apply), std::move(pmf));
}

}  // namespace bngp
