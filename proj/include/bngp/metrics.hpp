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
#ifndef BNGP_METRICS_HPP_
#define BNGP_METRICS_HPP_

#include <cstdint>
#include <vector>

#include "bngp/common.hpp"

namespace bngp {

struct RocCurve {
  // (fpr, tpr) points from all distinct thresholds, starting at (0,0) and
  // ending at (1,1), nondecreasing in both coordinates.
  std::vector<std::pair<double, double>> points;
  // Rank statistic: probability a random positive outscores a random
  // negative, ties counted 1/2. Equals the trapezoidal integral of points.
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;

  double trapezoidal_auc() const;
};

// Scores may be any reals; higher score means "more likely member".
RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<std::uint8_t>& labels);

// Empirical TPR - FPR of hard decisions.
double membership_advantage(const std::vector<std::uint8_t>& decisions,
                            const std::vector<std::uint8_t>& labels);

}  // namespace bngp

#endif  // BNGP_METRICS_HPP_
