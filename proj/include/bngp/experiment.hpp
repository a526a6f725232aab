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
#ifndef BNGP_EXPERIMENT_HPP_
#define BNGP_EXPERIMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "bngp/config.hpp"
#include "bngp/defense.hpp"

namespace bngp::exp {

struct ExperimentConfig {
  std::string run_id = "run";

  std::string dataset_kind = "synthetic";  // synthetic | csv
  std::size_t dataset_k = 40;
  std::size_t dataset_m = 100;
  double aaf_low = 0.1;
  double aaf_high = 0.9;
  std::uint64_t dataset_seed = 7;
  std::string dataset_path;
  std::size_t reference_rows = 0;  // appended rows that never join

  std::string release_kind = "summary";  // summary | bitflip | discretized
  double flip_prob = 0.25;
  std::size_t grid_size = 3;
  std::vector<double> noise_pmf;

  std::string prior_kind = "bernoulli";  // bernoulli | fixed_size
  double prior_pi = 0.5;
  std::size_t prior_n = 0;

  std::string defender_kind = "none";
  defense::DefenderConfig defender;
  double defender_tau = 0.0;
  std::size_t defender_reference_n = 0;
  double dp_epsilon = 0.0;         // > 0: explicit epsilon
  double dp_target_utility = 0.0;  // used when dp_epsilon == 0

  std::vector<std::string> attackers = {"bgp"};
  attack::AttackConfig attacker;
  double attacker_tau = 0.0;
  std::size_t attacker_reference_n = 10;

  std::size_t eval_draws = 200;
  double threshold = 0.5;

  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir;

  std::vector<std::size_t> capacity_widths = {4, 16, 64};

  std::string config_text;  // original document, written as the snapshot
};

ExperimentConfig experiment_config_from(const Config& config);
ExperimentConfig load_experiment_config(const std::string& path);

struct MetricsRow {
  std::string run_id;
  std::string defender;
  std::string attacker;
  double kappa = 0.0;
  double gamma = 0.5;
  double auc_raw = 0.0;
  double auc_oriented = 0.0;
  double adv = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double utility_loss = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  std::string directory;
  std::vector<MetricsRow> rows;
  std::vector<std::string> files;  // relative paths, manifest last
};

// Per seed: build the instance, train the configured defender, evaluate
// every configured attacker on a shared evaluation set, then write metrics,
// ROC tables/plots, traces, checkpoints, the config snapshot, and a manifest
// with one content hash per file. Identical config + seeds reproduce every
// byte. Seeds fan out over BNGP_WORKERS threads (default 1).
ExperimentResult run_experiment(const ExperimentConfig& config);

struct CapacityRow {
  std::size_t width = 0;
  std::uint64_t seed = 0;
  double trained_cel = 0.0;
  double oracle_cel = 0.0;
  double gap = 0.0;
};

struct CapacitySweepResult {
  std::vector<CapacityRow> rows;
  std::vector<std::size_t> widths;
  std::vector<double> median_gaps;  // aligned with widths
  std::string directory;
};

// Trains a BGP discriminator per (width, seed) on an enumerable instance and
// reports the gap between its exact expected CEL and the oracle optimum.
CapacitySweepResult capacity_sweep(const ExperimentConfig& config);

std::uint64_t fnv1a64(const std::string& data);

}  // namespace bngp::exp

#endif  // BNGP_EXPERIMENT_HPP_
