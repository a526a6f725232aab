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
#include "bngp/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace bngp {

double RocCurve::trapezoidal_auc() const {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double dx = points[i].first - points[i - 1].first;
    area += dx * 0.5 * (points[i].second + points[i - 1].second);
  }
  return area;
}

RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size()) {
    throw ParameterError("roc_auc: scores/labels length mismatch");
  }
  RocCurve curve;
  for (std::uint8_t label : labels) {
    if (label) {
      ++curve.positives;
    } else {
      ++curve.negatives;
    }
  }
  if (curve.positives == 0 || curve.negatives == 0) {
    throw MetricError("roc_auc: need at least one positive and one negative");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });

  // Sweep thresholds from high to low; groups of tied scores move the
  // operating point diagonally, which realizes the ties-count-1/2 rank
  // statistic as the trapezoidal area.
  const double np = static_cast<double>(curve.positives);
  const double nn = static_cast<double>(curve.negatives);
  curve.points.emplace_back(0.0, 0.0);
  double tp = 0.0;
  double fp = 0.0;
  double auc = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double tied_tp = 0.0;
    double tied_fp = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]]) {
        tied_tp += 1.0;
      } else {
        tied_fp += 1.0;
      }
      ++j;
    }
    // Rank statistic: each tied (positive, negative) pair contributes 1/2;
    // positives in this group beat all negatives still below the threshold.
    auc += tied_tp * (nn - fp - tied_fp) + 0.5 * tied_tp * tied_fp;
    tp += tied_tp;
    fp += tied_fp;
    curve.points.emplace_back(fp / nn, tp / np);
    i = j;
  }
  curve.auc = auc / (np * nn);
  return curve;
}

double membership_advantage(const std::vector<std::uint8_t>& decisions,
                            const std::vector<std::uint8_t>& labels) {
  if (decisions.size() != labels.size()) {
    throw ParameterError("membership_advantage: length mismatch");
  }
  std::size_t tp = 0, fp = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      ++pos;
      if (decisions[i]) ++tp;
    } else {
      ++neg;
      if (decisions[i]) ++fp;
    }
  }
  if (pos == 0 || neg == 0) {
    throw MetricError(
        "membership_advantage: need at least one positive and one negative");
  }
  return static_cast<double>(tp) / static_cast<double>(pos) -
         static_cast<double>(fp) / static_cast<double>(neg);
}

}  // namespace bngp
