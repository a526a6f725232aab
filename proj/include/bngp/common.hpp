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
#ifndef BNGP_COMMON_HPP_
#define BNGP_COMMON_HPP_

#include <stdexcept>
#include <string>

namespace bngp {

// All logarithms in the library are natural logarithms.

// Frequencies are clamped to [kPFloor, 1 - kPFloor] so that log-likelihood
// ratios stay finite when a released frequency or reference frequency hits
// {0, 1}.
inline constexpr double kPFloor = 1e-3;

// Soft scores are clamped to [kScoreClamp, 1 - kScoreClamp] before logs in
// cross-entropy computations.
inline constexpr double kScoreClamp = 1e-7;

// An argument violated a documented precondition.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what)
      : std::invalid_argument(what) {}
};

// The requested value is mathematically undefined for the given input
// (e.g. summary statistics of an empty membership).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// The instance exceeds an enumeration guard; the operation refuses to run
// rather than silently subsample.
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& what)
      : std::runtime_error(what) {}
};

// An operation was called in the wrong order (e.g. backward without a
// matching train-mode forward).
class StateError : public std::runtime_error {
 public:
  explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

// A non-finite value surfaced where a finite one is required.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Training diverged or otherwise failed; the message names the step.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

// A file did not match its documented schema; the message names row/column.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A metric is undefined for the given inputs (e.g. single-class labels).
class MetricError : public std::runtime_error {
 public:
  explicit MetricError(const std::string& what) : std::runtime_error(what) {}
};

// A caller-supplied function broke its contract (e.g. an attacker emitted an
// out-of-range score).
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

inline double clamp_unit_interval(double v, double floor_value) {
  if (v < floor_value) return floor_value;
  if (v > 1.0 - floor_value) return 1.0 - floor_value;
  return v;
}

}  // namespace bngp

#endif  // BNGP_COMMON_HPP_
