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
#ifndef BNGP_VERIFICATION_HPP_
#define BNGP_VERIFICATION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "bngp/oracle.hpp"

namespace bngp::verification {

struct CheckResult {
  std::string check;
  std::string instance;
  double value = 0.0;
  std::string contract;
  bool pass = false;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::size_t prop1_instances = 20;
  std::size_t lemma1_instances = 200;
  std::size_t lemma1_trials = 200;
  std::size_t postprocessing_instances = 100;
  std::size_t prior_mismatch_instances = 100;
  std::size_t signal_instances = 50;
  std::size_t composition_instances = 100;
  std::size_t theorem3_priors = 100;
  std::size_t dp_bound_trials = 20000;
};

// One section per verified statement; each returns one row per instance (or
// per aggregate where an instance-level row would be noise).
std::vector<CheckResult> check_proposition1(std::size_t instances, Rng& rng);
std::vector<CheckResult> check_lemma1(std::size_t instances,
                                      std::size_t trials, Rng& rng);
std::vector<CheckResult> check_post_processing(std::size_t instances,
                                               Rng& rng);
std::vector<CheckResult> check_prior_mismatch(std::size_t instances, Rng& rng);
std::vector<CheckResult> check_signal_refinement(std::size_t instances,
                                                 Rng& rng);
std::vector<CheckResult> check_composition(std::size_t instances, Rng& rng);
std::vector<CheckResult> check_theorem3(std::size_t prior_samples, Rng& rng);
std::vector<CheckResult> check_dp_advantage_bound(std::size_t mc_trials,
                                                  Rng& rng);
std::vector<CheckResult> check_assumption2();

std::vector<CheckResult> run_verification_suite(const SuiteOptions& options);

bool all_passed(const std::vector<CheckResult>& results);
std::string to_csv(const std::vector<CheckResult>& results);

}  // namespace bngp::verification

#endif  // BNGP_VERIFICATION_HPP_
