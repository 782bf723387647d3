// Copyright 2026 The glccl Authors
// SPDX-License-Identifier: Apache-2.0
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

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "glccl/types.hpp"

namespace glccl {

enum class Direction { t2v, v2t };
const char* to_string(Direction d);

/// Rank of the ground-truth item for every query (1 = best).
struct RankVector {
  std::vector<int> ranks;
  Direction direction = Direction::t2v;

  std::size_t size() const { return ranks.size(); }
};

/// Ground truth sits on the diagonal. Ties count against the ground truth:
/// rank = 1 + #{j != i : s(i, j) >= s(i, i)} (columns for v2t).
RankVector ranks_from_scores(const Mat& scores, Direction direction);

/// Percentage of queries with rank <= k.
double recall_at_k(const RankVector& r, int k);
/// Lower median for even counts.
double median_rank(const RankVector& r);
double mean_rank(const RankVector& r);
/// Entry k-1 is the fraction of queries with rank <= k.
std::vector<double> cmc_curve(const RankVector& r);

struct DirectionMetrics {
  double r1 = 0, r5 = 0, r10 = 0;
  double median_rank = 0, mean_rank = 0;
};

DirectionMetrics direction_metrics(const RankVector& r);

struct RetrievalMetrics {
  DirectionMetrics t2v, v2t;
  double sum_r = 0;
};

/// R@1 + R@5 + R@10 over both directions.
double sum_r(const DirectionMetrics& t2v, const DirectionMetrics& v2t);

RetrievalMetrics evaluate_scores(const Mat& scores);

/// CSV: direction,k,recall for k = 1..B, followed by summary rows.
void write_metrics_csv(std::ostream& out, const RetrievalMetrics& m, const RankVector& t2v,
                       const RankVector& v2t);
/// CSV: series,k,fraction
void write_cmc_csv(std::ostream& out, const std::vector<std::pair<std::string, std::vector<double>>>& curves);

}  // namespace glccl
