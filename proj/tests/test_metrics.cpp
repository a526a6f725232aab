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

#include "bngp/metrics.hpp"
#include "bngp/rng.hpp"

using namespace bngp;

TEST_CASE("roc_auc: separations and ties") {
  CHECK(roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}).auc == 1.0);
  CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}).auc == 0.5);
  CHECK(roc_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}).auc ==
        doctest::Approx(0.75));
  CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), MetricError);
}

TEST_CASE("roc_auc: curve endpoints and monotonicity") {
  Rng rng(4);
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (int i = 0; i < 500; ++i) {
    // Quantized scores force plenty of ties.
    scores.push_back(std::floor(rng.uniform() * 10.0) / 10.0);
    labels.push_back(rng.bernoulli(0.4));
  }
  const RocCurve curve = roc_auc(scores, labels);
  CHECK(curve.points.front() == std::pair<double, double>{0.0, 0.0});
  CHECK(curve.points.back().first == doctest::Approx(1.0));
  CHECK(curve.points.back().second == doctest::Approx(1.0));
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].first >= curve.points[i - 1].first);
    CHECK(curve.points[i].second >= curve.points[i - 1].second);
  }
}

TEST_CASE("roc_auc: rank statistic equals the trapezoidal integral") {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 200; ++i) {
      scores.push_back(std::floor(rng.uniform() * 8.0));
      labels.push_back(rng.bernoulli(0.5));
    }
    labels[0] = 1;
    labels[1] = 0;
    const RocCurve curve = roc_auc(scores, labels);
    CHECK(std::abs(curve.auc - curve.trapezoidal_auc()) < 1e-12);
  }
}

TEST_CASE("roc_auc: invariant under strictly monotone transforms") {
  Rng rng(14);
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (int i = 0; i < 300; ++i) {
    scores.push_back(rng.uniform(-4.0, 4.0));
    labels.push_back(rng.bernoulli(0.5));
  }
  labels[0] = 1;
  labels[1] = 0;
  const double base = roc_auc(scores, labels).auc;
  std::vector<double> transformed = scores;
  for (double& s : transformed) s = std::exp(0.5 * s) + 3.0;
  CHECK(roc_auc(transformed, labels).auc == doctest::Approx(base));
  for (double& s : transformed) s = std::atan(s);
  CHECK(roc_auc(transformed, labels).auc == doctest::Approx(base));
}

TEST_CASE("membership advantage") {
  CHECK(membership_advantage({1, 1, 0, 0}, {1, 1, 0, 0}) == 1.0);
  CHECK(membership_advantage({0, 0, 1, 1}, {1, 1, 0, 0}) == -1.0);

  // TPR 0.8 (4/5 members claimed), FPR 0.3 (3/10 nonmembers claimed).
  std::vector<std::uint8_t> labels(15, 0);
  std::vector<std::uint8_t> decisions(15, 0);
  for (int i = 0; i < 5; ++i) labels[i] = 1;
  for (int i = 0; i < 4; ++i) decisions[i] = 1;
  for (int i = 5; i < 8; ++i) decisions[i] = 1;
  CHECK(membership_advantage(decisions, labels) == doctest::Approx(0.5));

  CHECK_THROWS_AS(membership_advantage({1, 0}, {1, 1}), MetricError);
}
