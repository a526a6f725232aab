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
#include "bngp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bngp {

std::size_t MembershipVector::count_ones() const {
  std::size_t n = 0;
  for (std::uint8_t bit : bits) n += bit;
  return n;
}

PopulationDataset::PopulationDataset(std::vector<std::uint8_t> records,
                                     std::size_t population,
                                     std::size_t attributes,
                                     std::vector<double> reference_frequencies,
                                     double p_floor)
    : records_(std::move(records)),
      population_(population),
      attributes_(attributes),
      reference_frequencies_(std::move(reference_frequencies)),
      p_floor_(p_floor) {
  if (population_ < 1 || attributes_ < 1) {
    throw ParameterError("PopulationDataset: need K >= 1 and m >= 1");
  }
  if (records_.size() != population_ * attributes_) {
    throw ParameterError("PopulationDataset: records size != K*m");
  }
  if (reference_frequencies_.size() != attributes_) {
    throw ParameterError("PopulationDataset: reference frequencies size != m");
  }
  if (!(p_floor_ > 0.0 && p_floor_ < 0.5)) {
    throw ParameterError("PopulationDataset: p_floor must be in (0, 0.5)");
  }
  for (std::uint8_t bit : records_) {
    if (bit > 1) throw ParameterError("PopulationDataset: non-binary record");
  }
  for (double& p : reference_frequencies_) {
    p = clamp_unit_interval(p, p_floor_);
  }
}

MembershipPrior MembershipPrior::independent_bernoulli(
    std::vector<double> pi) {
  if (pi.empty()) {
    throw ParameterError("MembershipPrior: empty probability vector");
  }
  for (double p : pi) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ParameterError("MembershipPrior: pi_k outside [0,1]");
    }
  }
  MembershipPrior prior;
  prior.kind_ = Kind::kIndependentBernoulli;
  prior.population_ = pi.size();
  prior.pi_ = std::move(pi);
  return prior;
}

MembershipPrior MembershipPrior::independent_bernoulli(std::size_t population,
                                                       double p) {
  return independent_bernoulli(std::vector<double>(population, p));
}

MembershipPrior MembershipPrior::fixed_size_uniform(std::size_t population,
                                                    std::size_t n) {
  if (population < 1 || n < 1 || n > population) {
    throw ParameterError("MembershipPrior: need 1 <= n <= K");
  }
  MembershipPrior prior;
  prior.kind_ = Kind::kFixedSizeUniform;
  prior.population_ = population;
  prior.n_ = n;
  double log_choose = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    log_choose += std::log(static_cast<double>(population - i)) -
                  std::log(static_cast<double>(i + 1));
  }
  prior.log_choose_ = log_choose;
  return prior;
}

double MembershipPrior::pmf(const MembershipVector& b) const {
  if (b.size() != population_) {
    throw ParameterError("MembershipPrior::pmf: length mismatch");
  }
  if (kind_ == Kind::kIndependentBernoulli) {
    double p = 1.0;
    for (std::size_t k = 0; k < population_; ++k) {
      p *= b.bits[k] ? pi_[k] : 1.0 - pi_[k];
    }
    return p;
  }
  return b.count_ones() == n_ ? std::exp(-log_choose_) : 0.0;
}

double MembershipPrior::log_pmf(const MembershipVector& b) const {
  return std::log(pmf(b));
}

double MembershipPrior::marginal(std::size_t k) const {
  if (k >= population_) throw ParameterError("MembershipPrior: bad index");
  if (kind_ == Kind::kIndependentBernoulli) return pi_[k];
  return static_cast<double>(n_) / static_cast<double>(population_);
}

MembershipVector MembershipPrior::sample(Rng& rng) const {
  MembershipVector b;
  b.bits.assign(population_, 0);
  if (kind_ == Kind::kIndependentBernoulli) {
    for (std::size_t k = 0; k < population_; ++k) {
      b.bits[k] = rng.bernoulli(pi_[k]) ? 1 : 0;
    }
    return b;
  }
  // Partial Fisher-Yates over individual indices.
  std::vector<std::size_t> ids(population_);
  for (std::size_t i = 0; i < population_; ++i) ids[i] = i;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j = i + rng.uniform_index(population_ - i);
    std::swap(ids[i], ids[j]);
    b.bits[ids[i]] = 1;
  }
  return b;
}

MembershipVector membership_from_index(std::uint64_t index, std::size_t k) {
  MembershipVector b;
  b.bits.assign(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    b.bits[i] = static_cast<std::uint8_t>((index >> i) & 1ULL);
  }
  return b;
}

std::uint64_t membership_to_index(const MembershipVector& b) {
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b.bits[i]) index |= 1ULL << i;
  }
  return index;
}

PopulationDataset generate_synthetic_population(std::size_t population,
                                                std::size_t attributes,
                                                double aaf_low,
                                                double aaf_high,
                                                std::uint64_t seed,
                                                double p_floor) {
  if (!(aaf_low > 0.0 && aaf_low <= aaf_high && aaf_high < 1.0)) {
    throw ParameterError(
        "generate_synthetic_population: need 0 < aaf_low <= aaf_high < 1");
  }
  if (population < 1 || attributes < 1) {
    throw ParameterError("generate_synthetic_population: need K, m >= 1");
  }
  Rng rng(seed);
  std::vector<double> frequencies(attributes);
  for (std::size_t j = 0; j < attributes; ++j) {
    frequencies[j] = rng.uniform(aaf_low, aaf_high);
  }
  std::vector<std::uint8_t> records(population * attributes);
  for (std::size_t k = 0; k < population; ++k) {
    for (std::size_t j = 0; j < attributes; ++j) {
      records[k * attributes + j] = rng.bernoulli(frequencies[j]) ? 1 : 0;
    }
  }
  return PopulationDataset(std::move(records), population, attributes,
                           std::move(frequencies), p_floor);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

PopulationDataset load_population_csv(const std::string& path,
                                      double p_floor) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_population_csv: cannot open " + path);

  std::string line;
  std::vector<double> reference;
  std::vector<std::uint8_t> records;
  std::size_t attributes = 0;
  std::size_t population = 0;
  std::size_t line_number = 0;
  bool saw_reference = false;

  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (line_number == 1 && cells[0] == "#ref") {
      saw_reference = true;
      for (std::size_t j = 1; j < cells.size(); ++j) {
        std::size_t consumed = 0;
        double value = 0.0;
        try {
          value = std::stod(cells[j], &consumed);
        } catch (const std::exception&) {
          consumed = 0;
        }
        if (consumed != cells[j].size()) {
          throw ParseError("load_population_csv: bad reference frequency at "
                           "line 1, column " +
                           std::to_string(j + 1));
        }
        reference.push_back(value);
      }
      attributes = reference.size();
      if (attributes == 0) {
        throw ParseError("load_population_csv: empty reference row");
      }
      continue;
    }
    if (attributes == 0) {
      attributes = cells.size();
    } else if (cells.size() != attributes) {
      throw ParseError("load_population_csv: row " +
                       std::to_string(line_number) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(attributes));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (cells[j] == "0") {
        records.push_back(0);
      } else if (cells[j] == "1") {
        records.push_back(1);
      } else {
        throw ParseError("load_population_csv: non-binary cell '" + cells[j] +
                         "' at line " + std::to_string(line_number) +
                         ", column " + std::to_string(j + 1));
      }
    }
    ++population;
  }
  if (population == 0) {
    throw ParseError("load_population_csv: no data rows in " + path);
  }
  if (!saw_reference) {
    reference.assign(attributes, 0.0);
    for (std::size_t k = 0; k < population; ++k) {
      for (std::size_t j = 0; j < attributes; ++j) {
        reference[j] += records[k * attributes + j];
      }
    }
    for (double& p : reference) p /= static_cast<double>(population);
  }
  return PopulationDataset(std::move(records), population, attributes,
                           std::move(reference), p_floor);
}

void save_population_csv(const PopulationDataset& dataset,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("save_population_csv: cannot open " + path);
  out << "#ref";
  out.precision(17);
  for (double p : dataset.reference_frequencies()) out << ',' << p;
  out << '\n';
  for (std::size_t k = 0; k < dataset.population_size(); ++k) {
    for (std::size_t j = 0; j < dataset.attribute_count(); ++j) {
      if (j) out << ',';
      out << static_cast<int>(dataset.bit(k, j));
    }
    out << '\n';
  }
}

}  // namespace bngp
