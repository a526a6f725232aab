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
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bngp/defense.hpp"
#include "bngp/experiment.hpp"
#include "bngp/verification.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  bngp::exp::ExperimentConfig config;
  try {
    config = bngp::exp::load_experiment_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    const bngp::exp::ExperimentResult result = bngp::exp::run_experiment(
        config);
    std::cout << "wrote " << result.files.size() << " files to "
              << result.directory << "\n";
    return 0;
  } catch (const bngp::TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 3;
  } catch (const bngp::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const bngp::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_verify(std::uint64_t seed, const std::string& csv_path, bool quick) {
  bngp::verification::SuiteOptions options;
  options.seed = seed;
  if (quick) {
    options.prop1_instances = 5;
    options.lemma1_instances = 20;
    options.lemma1_trials = 50;
    options.postprocessing_instances = 20;
    options.prior_mismatch_instances = 20;
    options.signal_instances = 10;
    options.composition_instances = 20;
    options.theorem3_priors = 20;
    options.dp_bound_trials = 5000;
  }
  const std::vector<bngp::verification::CheckResult> results =
      bngp::verification::run_verification_suite(options);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    out << bngp::verification::to_csv(results);
  }
  std::size_t failures = 0;
  for (const bngp::verification::CheckResult& result : results) {
    if (!result.pass) {
      ++failures;
      std::cout << "FAIL " << result.check << " " << result.instance << " ("
                << result.contract << ", value " << result.value << ")\n";
    }
  }
  std::cout << results.size() - failures << "/" << results.size()
            << " contracts passed\n";
  return failures == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& config_path) {
  bngp::exp::ExperimentConfig config;
  try {
    config = bngp::exp::load_experiment_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    const bngp::exp::CapacitySweepResult result =
        bngp::exp::capacity_sweep(config);
    for (std::size_t i = 0; i < result.widths.size(); ++i) {
      std::cout << "width " << result.widths[i] << ": median CEL gap "
                << result.median_gaps[i] << "\n";
    }
    return 0;
  } catch (const bngp::TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayes-Nash generative privacy for summary-statistic release"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config file")
      ->required();

  std::uint64_t seed = 1;
  std::string csv_path;
  bool quick = false;
  auto* verify = app.add_subcommand(
      "verify", "run the exact verification suite over the theory contracts");
  verify->add_option("--seed", seed, "suite seed");
  verify->add_option("--csv", csv_path, "write the report CSV here");
  verify->add_flag("--quick", quick, "reduced instance counts");

  std::string sweep_config;
  auto* sweep = app.add_subcommand("sweep-capacity",
                                   "discriminator capacity sweep");
  sweep->add_option("config", sweep_config, "experiment config file")
      ->required();

  double utility = 0.0;
  std::size_t m = 0;
  std::size_t kdagger = 0;
  auto* calibrate = app.add_subcommand(
      "calibrate-dp", "epsilon matching a target mean absolute noise");
  calibrate->add_option("--utility", utility, "target mean absolute noise")
      ->required();
  calibrate->add_option("--m", m, "attribute count")->required();
  calibrate->add_option("--kdagger", kdagger, "included individual count")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path);
  if (verify->parsed()) return cmd_verify(seed, csv_path, quick);
  if (sweep->parsed()) return cmd_sweep(sweep_config);
  if (calibrate->parsed()) {
    try {
      const bngp::DpParams params =
          bngp::defense::calibrate_dp_epsilon(utility, m, kdagger);
      std::printf("sensitivity %.12g\nepsilon %.12g\ndelta 0\n",
                  params.sensitivity, params.epsilon);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 0;
}
