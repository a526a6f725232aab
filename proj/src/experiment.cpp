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
#include "bngp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "bngp/metrics.hpp"
#include "bngp/oracle.hpp"

namespace bngp::exp {

namespace {

std::string fmt(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

std::size_t worker_count(std::size_t tasks) {
  const char* env = std::getenv("BNGP_WORKERS");
  std::size_t workers = 1;
  if (env && *env) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed > 0) workers = static_cast<std::size_t>(parsed);
  }
  return std::min(workers, std::max<std::size_t>(tasks, 1));
}

defense::DefenderConfig defender_from(const Config& c) {
  defense::DefenderConfig def;
  const std::string mode = c.get_string("defender.mode", "preference");
  if (mode == "preference") {
    def.mode = defense::ObjectiveMode::kPreference;
  } else if (mode == "privacy_budget") {
    def.mode = defense::ObjectiveMode::kPrivacyBudget;
  } else if (mode == "utility_budget") {
    def.mode = defense::ObjectiveMode::kUtilityBudget;
  } else {
    throw ParseError("config: unknown defender.mode " + mode);
  }
  def.budget = c.get_double("defender.budget", 0.0);
  def.penalty = c.get_double("defender.penalty", 100.0);
  def.kappa = c.get_double("defender.kappa", 1.0);
  def.kappa_vector = c.get_double_list("defender.kappa_vector", {});
  def.norm_order = c.get_double("defender.norm_p", 1.0);
  const std::vector<double> hidden =
      c.get_double_list("defender.hidden", {64, 64});
  def.hidden_widths.clear();
  for (double w : hidden) {
    def.hidden_widths.push_back(static_cast<std::size_t>(w));
  }
  def.batch_norm = c.get_bool("defender.batch_norm", true);
  def.aux_dim = static_cast<std::size_t>(c.get_int("defender.aux_dim", 8));
  def.rounds = static_cast<std::size_t>(c.get_int("defender.rounds", 400));
  def.attacker_steps =
      static_cast<std::size_t>(c.get_int("defender.attacker_steps", 5));
  def.batch = static_cast<std::size_t>(c.get_int("defender.batch", 64));
  def.learning_rate = c.get_double("defender.lr", 1e-3);
  def.weight_decay = c.get_double("defender.weight_decay", 1e-5);
  def.decay_rate = c.get_double("defender.decay", 0.988);
  def.epoch_rounds =
      static_cast<std::size_t>(c.get_int("defender.epoch_rounds", 50));
  def.patience = static_cast<std::size_t>(c.get_int("defender.patience", 0));
  def.eval_draws =
      static_cast<std::size_t>(c.get_int("defender.eval_draws", 200));
  return def;
}

attack::AttackConfig attacker_from(const Config& c) {
  attack::AttackConfig att;
  att.gamma = c.get_double("attacker.gamma", 0.5);
  const std::vector<double> hidden =
      c.get_double_list("attacker.hidden", {64, 64});
  att.hidden_widths.clear();
  for (double w : hidden) {
    att.hidden_widths.push_back(static_cast<std::size_t>(w));
  }
  att.batch_norm = c.get_bool("attacker.batch_norm", true);
  att.steps = static_cast<std::size_t>(c.get_int("attacker.steps", 2000));
  att.batch = static_cast<std::size_t>(c.get_int("attacker.batch", 64));
  att.learning_rate = c.get_double("attacker.lr", 1e-4);
  att.weight_decay = c.get_double("attacker.weight_decay", 1e-5);
  att.decay_rate = c.get_double("attacker.decay", 0.988);
  att.steps_per_epoch =
      static_cast<std::size_t>(c.get_int("attacker.epoch_steps", 200));
  return att;
}

}  // namespace

ExperimentConfig experiment_config_from(const Config& c) {
  ExperimentConfig config;
  config.run_id = c.get_string("run.id", "run");
  config.dataset_kind = c.get_string("dataset.kind", "synthetic");
  config.dataset_k = static_cast<std::size_t>(c.get_int("dataset.k", 40));
  config.dataset_m = static_cast<std::size_t>(c.get_int("dataset.m", 100));
  config.aaf_low = c.get_double("dataset.aaf_low", 0.1);
  config.aaf_high = c.get_double("dataset.aaf_high", 0.9);
  config.dataset_seed =
      static_cast<std::uint64_t>(c.get_int("dataset.seed", 7));
  config.dataset_path = c.get_string("dataset.path", "");
  config.reference_rows =
      static_cast<std::size_t>(c.get_int("dataset.reference_rows", 0));

  config.release_kind = c.get_string("release.kind", "summary");
  config.flip_prob = c.get_double("release.flip_prob", 0.25);
  config.grid_size =
      static_cast<std::size_t>(c.get_int("release.grid_size", 3));
  config.noise_pmf = c.get_double_list("release.noise_pmf", {});

  config.prior_kind = c.get_string("prior.kind", "bernoulli");
  config.prior_pi = c.get_double("prior.pi", 0.5);
  config.prior_n = static_cast<std::size_t>(c.get_int("prior.n", 0));

  config.defender_kind = c.get_string("defender.kind", "none");
  config.defender = defender_from(c);
  // defender.kappa_zero_fraction builds the 90%-zeros style vector.
  const double zero_fraction =
      c.get_double("defender.kappa_zero_fraction", 0.0);
  if (zero_fraction > 0.0) {
    if (!config.defender.kappa_vector.empty()) {
      throw ParseError(
          "config: give either defender.kappa_vector or "
          "defender.kappa_zero_fraction, not both");
    }
    const std::size_t m = config.dataset_m;
    const auto zeros = static_cast<std::size_t>(
        std::llround(zero_fraction * static_cast<double>(m)));
    config.defender.kappa_vector.assign(m, config.defender.kappa);
    for (std::size_t j = 0; j < std::min(zeros, m); ++j) {
      config.defender.kappa_vector[j] = 0.0;
    }
  }
  config.defender_tau = c.get_double("defender.tau", 0.0);
  config.defender_reference_n =
      static_cast<std::size_t>(c.get_int("defender.reference_n", 0));
  config.dp_epsilon = c.get_double("defender.dp_epsilon", 0.0);
  config.dp_target_utility =
      c.get_double("defender.dp_target_utility", 0.0);

  config.attackers = c.get_string_list("attackers", {"bgp"});
  config.attacker = attacker_from(c);
  config.attacker_tau = c.get_double("attacker.tau", 0.0);
  config.attacker_reference_n =
      static_cast<std::size_t>(c.get_int("attacker.reference_n", 10));

  config.eval_draws = static_cast<std::size_t>(c.get_int("eval.draws", 200));
  config.threshold = c.get_double("eval.threshold", 0.5);

  config.seeds = c.get_uint_list("seeds", {1});
  config.output_dir = c.require_string("output.dir");

  const std::vector<double> widths =
      c.get_double_list("capacity.widths", {4, 16, 64});
  config.capacity_widths.clear();
  for (double w : widths) {
    config.capacity_widths.push_back(static_cast<std::size_t>(w));
  }

  config.config_text = c.text();
  c.fail_on_unknown();

  if (config.seeds.empty()) throw ParseError("config: seeds must be nonempty");
  if (config.attackers.empty()) {
    throw ParseError("config: attackers must be nonempty");
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from(Config::parse_file(path));
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

namespace {

struct EvalDraw {
  MembershipVector b;
  std::vector<double> features;  // NN/LRT view of the release
  std::size_t symbol = 0;        // discrete releases only
};

struct Instance {
  std::optional<PopulationDataset> dataset;
  std::optional<MembershipPrior> prior;
  std::optional<DiscreteMechanism> mechanism;  // discrete release kinds
  std::size_t targets = 0;                     // ids [0, targets) are scored
  std::vector<std::size_t> reference_ids;
};

Instance build_instance(const ExperimentConfig& config) {
  Instance instance;
  const bool needs_dataset = config.release_kind != "bitflip";
  if (needs_dataset) {
    if (config.dataset_kind == "synthetic") {
      instance.dataset = generate_synthetic_population(
          config.dataset_k + config.reference_rows, config.dataset_m,
          config.aaf_low, config.aaf_high, config.dataset_seed);
    } else if (config.dataset_kind == "csv") {
      instance.dataset = load_population_csv(config.dataset_path);
      if (instance.dataset->population_size() <= config.reference_rows) {
        throw ParameterError("experiment: reference rows exhaust the dataset");
      }
    } else {
      throw ParseError("config: unknown dataset.kind " + config.dataset_kind);
    }
    instance.targets =
        instance.dataset->population_size() - config.reference_rows;
  } else {
    instance.targets = config.dataset_k;
  }
  const std::size_t total =
      instance.targets + (needs_dataset ? config.reference_rows : 0);
  for (std::size_t id = instance.targets; id < total; ++id) {
    instance.reference_ids.push_back(id);
  }

  if (config.prior_kind == "bernoulli") {
    std::vector<double> pi(total, 0.0);
    for (std::size_t k = 0; k < instance.targets; ++k) {
      pi[k] = config.prior_pi;
    }
    instance.prior = MembershipPrior::independent_bernoulli(std::move(pi));
  } else if (config.prior_kind == "fixed_size") {
    if (!instance.reference_ids.empty()) {
      throw ParameterError(
          "experiment: fixed_size prior cannot exclude reference rows; use "
          "a bernoulli prior");
    }
    instance.prior = MembershipPrior::fixed_size_uniform(
        total, config.prior_n ? config.prior_n : total / 2);
  } else {
    throw ParseError("config: unknown prior.kind " + config.prior_kind);
  }

  if (config.release_kind == "bitflip") {
    instance.mechanism =
        bitflip_mechanism(instance.targets, config.flip_prob);
  } else if (config.release_kind == "discretized") {
    std::vector<double> pmf = config.noise_pmf;
    if (pmf.empty()) pmf = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    instance.mechanism = discretized_summary_mechanism(
        *instance.dataset, config.grid_size, pmf);
  } else if (config.release_kind != "summary") {
    throw ParseError("config: unknown release.kind " + config.release_kind);
  }
  return instance;
}

std::vector<double> decode_grid_symbol(std::size_t symbol,
                                       std::size_t grid_size, std::size_t m) {
  std::vector<double> values(m);
  for (std::size_t j = 0; j < m; ++j) {
    values[j] = static_cast<double>(symbol % grid_size) /
                static_cast<double>(grid_size - 1);
    symbol /= grid_size;
  }
  return values;
}

// Everything trained or measured for one seed.
struct SeedOutputs {
  std::vector<MetricsRow> rows;
  // (relative filename, content) pairs, deterministic order
  std::vector<std::pair<std::string, std::string>> files;
};

std::string roc_csv(const RocCurve& curve) {
  std::string out = "fpr,tpr\n";
  for (const auto& [fpr, tpr] : curve.points) {
    out += fmt(fpr) + "," + fmt(tpr) + "\n";
  }
  return out;
}

std::string roc_svg(const RocCurve& curve, const std::string& title) {
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"340\" "
      "height=\"340\" viewBox=\"0 0 340 340\">\n"
      "<rect width=\"340\" height=\"340\" fill=\"white\"/>\n"
      "<line x1=\"40\" y1=\"300\" x2=\"300\" y2=\"300\" stroke=\"black\"/>\n"
      "<line x1=\"40\" y1=\"300\" x2=\"40\" y2=\"40\" stroke=\"black\"/>\n"
      "<line x1=\"40\" y1=\"300\" x2=\"300\" y2=\"40\" stroke=\"#bbbbbb\" "
      "stroke-dasharray=\"4\"/>\n";
  svg += "<text x=\"50\" y=\"30\" font-size=\"12\">" + title +
         " (AUC " + fmt(curve.auc) + ")</text>\n<polyline points=\"";
  for (const auto& [fpr, tpr] : curve.points) {
    svg += fmt(40.0 + 260.0 * fpr) + "," + fmt(300.0 - 260.0 * tpr) + " ";
  }
  svg += "\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\"/>\n</svg>\n";
  return svg;
}

std::string trace_csv(const defense::GameResult& game) {
  std::string out = "round,defender_loss,attacker_cel,utility,saturation\n";
  for (std::size_t r = 0; r < game.defender_loss_trace.size(); ++r) {
    out += std::to_string(r) + "," + fmt(game.defender_loss_trace[r]) + "," +
           fmt(game.attacker_cel_trace[r]) + "," +
           fmt(game.utility_trace[r]) + "," +
           fmt(game.saturation_trace[r]) + "\n";
  }
  return out;
}

SeedOutputs run_seed(const ExperimentConfig& config, const Instance& instance,
                     std::uint64_t seed) {
  SeedOutputs outputs;
  Rng rng(seed);
  const MembershipPrior& prior = *instance.prior;
  const std::string tag = "_seed" + std::to_string(seed);

  // 1. Train the configured defender and fix the release sampler.
  attack::ReleaseSampler sampler;
  double measured_utility = 0.0;  // filled during evaluation below
  std::optional<defense::GameResult> game;
  defense::DefenderConfig def = config.defender;
  def.seed = seed;
  attack::AttackConfig att = config.attacker;
  att.seed = seed + 1;

  const bool discrete = instance.mechanism.has_value();
  if (config.defender_kind != "none" && discrete) {
    throw ParameterError(
        "experiment: discrete release kinds support defender.kind = none");
  }
  if (config.defender_kind == "none") {
    if (discrete) {
      const DiscreteMechanism& mech = *instance.mechanism;
      const bool is_bitflip = config.release_kind == "bitflip";
      const std::size_t grid = config.grid_size;
      const std::size_t m = config.dataset_m;
      sampler = [&mech, is_bitflip, grid, m](const MembershipVector& b,
                                             Rng& r) {
        const std::size_t symbol = mech.sample(b, r);
        return is_bitflip ? attack::bit_features(symbol, b.size())
                          : decode_grid_symbol(symbol, grid, m);
      };
    } else {
      sampler = defense::identity_release_sampler(*instance.dataset);
    }
  } else if (config.defender_kind == "bngp") {
    game = defense::train_bngp(*instance.dataset, prior, def, att, rng);
    sampler = defense::generator_release_sampler(*instance.dataset,
                                                 game->generator, def.aux_dim);
    outputs.files.emplace_back("traces" + tag + ".csv", trace_csv(*game));
  } else if (config.defender_kind == "fixed_lrt" ||
             config.defender_kind == "adaptive_lrt") {
    defense::LrtConfig lrt;
    if (config.defender_kind == "fixed_lrt") {
      lrt.variant = defense::LrtConfig::Variant::kFixed;
      lrt.tau = config.defender_tau;
    } else {
      lrt.variant = defense::LrtConfig::Variant::kAdaptive;
      lrt.reference_ids = instance.reference_ids;
      lrt.n = config.defender_reference_n
                  ? config.defender_reference_n
                  : std::max<std::size_t>(1, instance.reference_ids.size() / 2);
    }
    defense::LrtDefenderResult trained =
        defense::train_lrt_best_response_defender(*instance.dataset, prior,
                                                  def, lrt, rng);
    sampler = defense::generator_release_sampler(*instance.dataset,
                                                 trained.generator,
                                                 def.aux_dim);
  } else if (config.defender_kind == "dp") {
    DpParams params;
    const std::size_t m = instance.dataset->attribute_count();
    if (config.dp_epsilon > 0.0) {
      params.epsilon = config.dp_epsilon;
      params.sensitivity = sensitivity_frequency(
          m, std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                 prior.marginal(0) * static_cast<double>(instance.targets)))));
    } else {
      if (!(config.dp_target_utility > 0.0)) {
        throw ParameterError(
            "experiment: dp defender needs dp_epsilon or dp_target_utility");
      }
      std::size_t expected_members = instance.targets;
      if (config.prior_kind == "bernoulli") {
        expected_members = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(
                   config.prior_pi * static_cast<double>(instance.targets))));
      } else if (config.prior_n > 0) {
        expected_members = config.prior_n;
      }
      params = defense::calibrate_dp_epsilon(config.dp_target_utility, m,
                                             expected_members);
    }
    sampler = defense::laplace_release_sampler(*instance.dataset, params);
  } else {
    throw ParseError("config: unknown defender.kind " + config.defender_kind);
  }

  // 2. Shared evaluation set.
  std::vector<EvalDraw> eval_set;
  eval_set.reserve(config.eval_draws);
  double utility_total = 0.0;
  for (std::size_t d = 0; d < config.eval_draws; ++d) {
    EvalDraw draw;
    draw.b = discrete ? prior.sample(rng)
                      : defense::sample_nonempty(prior, rng, nullptr);
    if (discrete) {
      draw.symbol = instance.mechanism->sample(draw.b, rng);
      draw.features =
          config.release_kind == "bitflip"
              ? attack::bit_features(draw.symbol, draw.b.size())
              : decode_grid_symbol(draw.symbol, config.grid_size,
                                   config.dataset_m);
    } else {
      draw.features = sampler(draw.b, rng);
      const SummaryStats raw = summary_statistics(*instance.dataset, draw.b);
      const SummaryStats released{draw.features};
      utility_total +=
          config.defender.kappa_is_vector()
              ? defense::utility_loss(released, raw,
                                      config.defender.kappa_vector)
              : defense::utility_loss(released, raw, config.defender.kappa,
                                      config.defender.norm_order);
    }
    eval_set.push_back(std::move(draw));
  }
  measured_utility =
      config.eval_draws > 0
          ? utility_total / static_cast<double>(config.eval_draws)
          : 0.0;

  // 3. Attackers score the same evaluation set.
  for (const std::string& attacker_name : config.attackers) {
    std::vector<double> rankings;
    std::vector<std::uint8_t> labels;
    double tp_count = 0.0;
    double fp_count = 0.0;

    std::optional<attack::BgpResponse> bgp;
    if (attacker_name == "bgp") {
      Rng train_rng(seed + 1000003);
      bgp = attack::train_bgp_response(sampler, prior, att, train_rng);
    }

    for (const EvalDraw& draw : eval_set) {
      std::vector<double> soft;
      std::vector<double> ranking;
      if (attacker_name == "bgp") {
        soft = bgp->scores(draw.features);
        ranking = soft;
      } else if (attacker_name == "fixed-lrt") {
        attack::AttackScores scores = attack::fixed_lrt_attack(
            *instance.dataset, SummaryStats{draw.features},
            config.attacker_tau);
        soft.assign(scores.hard.begin(), scores.hard.end());
        ranking = scores.ranking;
      } else if (attacker_name == "adaptive-lrt") {
        attack::AdaptiveLrtResult result = attack::adaptive_lrt_attack(
            *instance.dataset, SummaryStats{draw.features},
            instance.reference_ids, config.attacker_reference_n);
        soft.assign(result.scores.hard.begin(), result.scores.hard.end());
        ranking = result.scores.ranking;
      } else if (attacker_name == "score") {
        attack::AttackScores scores = attack::score_attack_all(
            *instance.dataset, SummaryStats{draw.features});
        soft.assign(scores.hard.begin(), scores.hard.end());
        ranking = scores.ranking;
      } else if (attacker_name == "optimal-lrt") {
        if (!discrete) {
          throw ParameterError(
              "experiment: optimal-lrt needs a discrete release kind");
        }
        const std::vector<double> ratios = attack::optimal_lrt_scores(
            *instance.mechanism, prior, draw.symbol);
        soft.resize(ratios.size());
        for (std::size_t i = 0; i < ratios.size(); ++i) {
          soft[i] = std::isinf(ratios[i]) ? 0.0 : 1.0 / (1.0 + ratios[i]);
        }
        ranking = soft;
      } else {
        throw ParseError("config: unknown attacker " + attacker_name);
      }
      for (std::size_t i = 0; i < instance.targets; ++i) {
        rankings.push_back(ranking[i]);
        labels.push_back(draw.b.bits[i]);
        const bool claim = attacker_name == "bgp" ||
                                   attacker_name == "optimal-lrt"
                               ? soft[i] >= config.threshold
                               : soft[i] >= 0.5;  // hard decisions are 0/1
        if (claim) {
          if (draw.b.bits[i]) {
            tp_count += 1.0;
          } else {
            fp_count += 1.0;
          }
        }
      }
    }

    const RocCurve curve = roc_auc(rankings, labels);
    MetricsRow row;
    row.run_id = config.run_id;
    row.defender = config.defender_kind;
    row.attacker = attacker_name;
    row.kappa = config.defender.kappa_is_vector()
                    ? *std::max_element(config.defender.kappa_vector.begin(),
                                        config.defender.kappa_vector.end())
                    : config.defender.kappa;
    row.gamma = config.attacker.gamma;
    row.auc_raw = curve.auc;
    row.auc_oriented = std::max(curve.auc, 1.0 - curve.auc);
    const double draws = static_cast<double>(config.eval_draws);
    row.tpr = tp_count / draws;
    row.fpr = fp_count / draws;
    row.adv = (1.0 - row.gamma) * row.tpr - row.gamma * row.fpr;
    row.utility_loss = measured_utility;
    row.seed = seed;
    outputs.rows.push_back(row);

    outputs.files.emplace_back("roc_" + attacker_name + tag + ".csv",
                               roc_csv(curve));
    outputs.files.emplace_back(
        "roc_" + attacker_name + tag + ".svg",
        roc_svg(curve, attacker_name + " vs " + config.defender_kind));
  }

  if (game) {
    outputs.files.emplace_back("checkpoint_generator" + tag + ".txt",
                               game->generator.checkpoint_string());
    outputs.files.emplace_back("checkpoint_discriminator" + tag + ".txt",
                               game->discriminator.checkpoint_string());
  }
  return outputs;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const Instance instance = build_instance(config);

  std::vector<SeedOutputs> by_seed(config.seeds.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<std::size_t> next{0};
  const std::size_t workers = worker_count(config.seeds.size());
  auto work = [&]() {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= config.seeds.size()) return;
      try {
        by_seed[index] = run_seed(config, instance, config.seeds[index]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  result.directory = config.output_dir;
  std::filesystem::create_directories(config.output_dir);

  std::vector<std::pair<std::string, std::string>> files;
  std::string metrics =
      "run_id,defender,attacker,kappa,gamma,auc_raw,auc_oriented,adv,tpr,"
      "fpr,utility_loss,seed\n";
  for (const SeedOutputs& outputs : by_seed) {
    for (const MetricsRow& row : outputs.rows) {
      result.rows.push_back(row);
      metrics += row.run_id + "," + row.defender + "," + row.attacker + "," +
                 fmt(row.kappa) + "," + fmt(row.gamma) + "," +
                 fmt(row.auc_raw) + "," + fmt(row.auc_oriented) + "," +
                 fmt(row.adv) + "," + fmt(row.tpr) + "," + fmt(row.fpr) +
                 "," + fmt(row.utility_loss) + "," +
                 std::to_string(row.seed) + "\n";
    }
    for (const auto& file : outputs.files) files.push_back(file);
  }
  files.emplace_back("metrics.csv", metrics);
  files.emplace_back("config.snapshot", config.config_text);

  std::string manifest = "file,fnv1a64\n";
  for (const auto& [name, content] : files) {
    std::ofstream out(config.output_dir + "/" + name, std::ios::binary);
    out << content;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    manifest += name + "," + hash + "\n";
    result.files.push_back(name);
  }
  std::ofstream manifest_out(config.output_dir + "/manifest.csv",
                             std::ios::binary);
  manifest_out << manifest;
  result.files.push_back("manifest.csv");
  return result;
}

CapacitySweepResult capacity_sweep(const ExperimentConfig& config) {
  if (config.release_kind != "bitflip") {
    throw ParameterError("capacity_sweep: release.kind must be bitflip");
  }
  const Instance instance = build_instance(config);
  const DiscreteMechanism& mech = *instance.mechanism;
  const MembershipPrior& prior = *instance.prior;
  const double oracle_cel = oracle::exact_marginal_cel(mech, prior);
  const std::size_t k = instance.targets;

  CapacitySweepResult result;
  result.widths = config.capacity_widths;
  result.directory = config.output_dir;
  for (std::size_t width : config.capacity_widths) {
    std::vector<double> gaps;
    for (std::uint64_t seed : config.seeds) {
      attack::AttackConfig att = config.attacker;
      att.hidden_widths = {width, width};
      att.seed = seed + 11;
      Rng rng(seed);
      attack::ReleaseSampler sampler = [&mech, k](const MembershipVector& b,
                                                  Rng& r) {
        return attack::bit_features(mech.sample(b, r), k);
      };
      attack::BgpResponse response =
          attack::train_bgp_response(sampler, prior, att, rng);
      const double trained = oracle::predictor_cel(
          mech, prior, [&response, k](std::size_t symbol) {
            return response.scores(attack::bit_features(symbol, k));
          });
      CapacityRow row;
      row.width = width;
      row.seed = seed;
      row.trained_cel = trained;
      row.oracle_cel = oracle_cel;
      row.gap = trained - oracle_cel;
      gaps.push_back(row.gap);
      result.rows.push_back(row);
    }
    std::sort(gaps.begin(), gaps.end());
    result.median_gaps.push_back(gaps[gaps.size() / 2]);
  }

  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    std::string csv = "width,seed,trained_cel,oracle_cel,gap\n";
    for (const CapacityRow& row : result.rows) {
      csv += std::to_string(row.width) + "," + std::to_string(row.seed) +
             "," + fmt(row.trained_cel) + "," + fmt(row.oracle_cel) + "," +
             fmt(row.gap) + "\n";
    }
    std::ofstream out(config.output_dir + "/capacity.csv", std::ios::binary);
    out << csv;
  }
  return result;
}

}  // namespace bngp::exp
