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

#include "glccl/evaluator.hpp"

#include <algorithm>
#include <iomanip>

namespace glccl {

const char* to_string(Direction d) { return d == Direction::t2v ? "t2v" : "v2t"; }

RankVector ranks_from_scores(const Mat& scores, Direction direction) {
  if (scores.rows() != scores.cols() || scores.rows() < 1) {
    throw DataError("ranks_from_scores: expected a non-empty square matrix");
  }
  const Eigen::Index b = scores.rows();
  RankVector r;
  r.direction = direction;
  r.ranks.resize(b);
  for (Eigen::Index q = 0; q < b; ++q) {
    const double truth = scores(q, q);
    int rank = 1;
    for (Eigen::Index c = 0; c < b; ++c) {
      if (c == q) continue;
      const double s = direction == Direction::t2v ? scores(q, c) : scores(c, q);
      if (s >= truth) ++rank;
    }
    r.ranks[q] = rank;
  }
  return r;
}

double recall_at_k(const RankVector& r, int k) {
  if (r.ranks.empty()) throw DataError("recall_at_k: empty rank vector");
  const auto hits = std::count_if(r.ranks.begin(), r.ranks.end(), [k](int x) { return x <= k; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(r.ranks.size());
}

double median_rank(const RankVector& r) {
  if (r.ranks.empty()) throw DataError("median_rank: empty rank vector");
  std::vector<int> sorted = r.ranks;
  std::sort(sorted.begin(), sorted.end());
  return sorted[(sorted.size() - 1) / 2];
}

double mean_rank(const RankVector& r) {
  if (r.ranks.empty()) throw DataError("mean_rank: empty rank vector");
  double sum = 0.0;
  for (int x : r.ranks) sum += x;
  return sum / static_cast<double>(r.ranks.size());
}

std::vector<double> cmc_curve(const RankVector& r) {
  const std::size_t b = r.ranks.size();
  std::vector<std::size_t> counts(b + 1, 0);
  for (int x : r.ranks) {
    if (x < 1 || static_cast<std::size_t>(x) > b) throw DataError("cmc_curve: rank out of range");
    ++counts[x];
  }
  std::vector<double> curve(b);
  std::size_t acc = 0;
  for (std::size_t k = 1; k <= b; ++k) {
    acc += counts[k];
    curve[k - 1] = static_cast<double>(acc) / static_cast<double>(b);
  }
  return curve;
}

DirectionMetrics direction_metrics(const RankVector& r) {
  return {recall_at_k(r, 1), recall_at_k(r, 5), recall_at_k(r, 10), median_rank(r), mean_rank(r)};
}

double sum_r(const DirectionMetrics& t2v, const DirectionMetrics& v2t) {
  return t2v.r1 + t2v.r5 + t2v.r10 + v2t.r1 + v2t.r5 + v2t.r10;
}

RetrievalMetrics evaluate_scores(const Mat& scores) {
  RetrievalMetrics m;
  m.t2v = direction_metrics(ranks_from_scores(scores, Direction::t2v));
  m.v2t = direction_metrics(ranks_from_scores(scores, Direction::v2t));
  m.sum_r = sum_r(m.t2v, m.v2t);
  return m;
}

void write_metrics_csv(std::ostream& out, const RetrievalMetrics& m, const RankVector& t2v,
                       const RankVector& v2t) {
  out << std::setprecision(17);
  out << "direction,k,recall\n";
  for (const RankVector* r : {&t2v, &v2t}) {
    for (std::size_t k = 1; k <= r->size(); ++k) {
      out << to_string(r->direction) << ',' << k << ',' << recall_at_k(*r, static_cast<int>(k)) << '\n';
    }
  }
  out << "summary,metric,value\n";
  for (auto [name, dm] : {std::pair{"t2v", &m.t2v}, std::pair{"v2t", &m.v2t}}) {
    out << name << ",R@1," << dm->r1 << '\n'
        << name << ",R@5," << dm->r5 << '\n'
        << name << ",R@10," << dm->r10 << '\n'
        << name << ",MdR," << dm->median_rank << '\n'
        << name << ",MnR," << dm->mean_rank << '\n';
  }
  out << "both,SumR," << m.sum_r << '\n';
}

void write_cmc_csv(std::ostream& out,
                   const std::vector<std::pair<std::string, std::vector<double>>>& curves) {
  out << std::setprecision(17);
  out << "series,k,fraction\n";
  for (const auto& [name, curve] : curves) {
    for (std::size_t k = 0; k < curve.size(); ++k) out << name << ',' << k + 1 << ',' << curve[k] << '\n';
  }
}

}  // namespace glccl
