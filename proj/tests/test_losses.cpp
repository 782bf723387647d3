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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glccl/losses.hpp"

using namespace glccl;

namespace {

// Grain tensors for the two-pair example: positives (1,1,1,1) and (0,2,0,2),
// every negative (0,0,1,1).
ScoreTensors worked_example() {
  ScoreTensors s;
  const double pos[2][4] = {{1, 1, 1, 1}, {0, 2, 0, 2}};
  const double neg[4] = {0, 0, 1, 1};
  for (int g = 0; g < 4; ++g) {
    Mat m(2, 2);
    m << pos[0][g], neg[g], neg[g], pos[1][g];
    s.grain(kAllGrains[g]) = m;
  }
  s.aggregate = (s.vs + s.vw + s.sf + s.fw) / 4.0;
  return s;
}

std::vector<const Mat*> grain_ptrs(const ScoreTensors& s) { return {&s.vs, &s.vw, &s.sf, &s.fw}; }

double oracle_infonce_direction(const Mat& logits) {
  double total = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double z = 0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) z += std::exp(logits(i, j));
    total += std::log(z) - logits(i, i);
  }
  return total / static_cast<double>(logits.rows());
}

Mat random_scores(int b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Mat m(b, b);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

}  // namespace

TEST(Csc, WorkedExamplePopulation) {
  const auto s = worked_example();
  LossConfig cfg;
  const auto r = csc(grain_ptrs(s), cfg);
  EXPECT_DOUBLE_EQ(r.var_pos, 0.5);
  EXPECT_DOUBLE_EQ(r.var_neg, 0.25);
  EXPECT_DOUBLE_EQ(r.l_csc, 2.0);
  EXPECT_FALSE(r.degenerate);
}

TEST(Csc, RatioUnchangedBySampleModeAndScaling) {
  const auto s = worked_example();
  LossConfig cfg;
  cfg.variance_mode = VarianceMode::sample;
  const auto r = csc(grain_ptrs(s), cfg);
  EXPECT_NEAR(r.var_pos, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.var_neg, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.l_csc, 2.0, 1e-12);
  ScoreTensors scaled = s;
  for (Grain g : kAllGrains) scaled.grain(g) *= 0.37;
  EXPECT_NEAR(csc(grain_ptrs(scaled), LossConfig{}).l_csc, 2.0, 1e-12);
}

TEST(Csc, Variants) {
  const auto s = worked_example();
  LossConfig cfg;
  cfg.csc_variant = CscVariant::positive_only;
  EXPECT_DOUBLE_EQ(csc(grain_ptrs(s), cfg).l_csc, 0.5);
  cfg.csc_variant = CscVariant::negative_only;
  EXPECT_DOUBLE_EQ(csc(grain_ptrs(s), cfg).l_csc, 4.0);
}

TEST(Csc, EqualGrainsAreDegenerate) {
  ScoreTensors s;
  for (Grain g : kAllGrains) s.grain(g) = Mat::Constant(3, 3, 0.2);
  const auto r = csc(grain_ptrs(s), LossConfig{});
  EXPECT_EQ(r.var_pos, 0.0);
  EXPECT_EQ(r.var_neg, 0.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(std::isfinite(r.l_csc));
}

TEST(Csc, SinglePairNeedsPositiveOnly) {
  ScoreTensors s;
  for (Grain g : kAllGrains) s.grain(g) = Mat::Constant(1, 1, 0.2);
  EXPECT_THROW(csc(grain_ptrs(s), LossConfig{}), DataError);
  LossConfig cfg;
  cfg.csc_variant = CscVariant::positive_only;
  EXPECT_NO_THROW(csc(grain_ptrs(s), cfg));
}

TEST(GrainVariance, PopulationAndSample) {
  const double v[] = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(grain_variance(v, VarianceMode::population), 1.25);
  EXPECT_NEAR(grain_variance(v, VarianceMode::sample), 5.0 / 3.0, 1e-15);
  const double one[] = {7};
  EXPECT_EQ(grain_variance(std::span<const double>(one, 1), VarianceMode::sample), 0.0);
}

TEST(InfoNce, SinglePairIsZero) {
  const auto r = infonce(Mat::Constant(1, 1, 0.4), LossConfig{});
  EXPECT_EQ(r.l_infonce, 0.0);
}

TEST(InfoNce, UniformTwoByTwoIsTwoLogTwo) {
  LossConfig cfg;
  cfg.logit_scale = 1.0;
  const auto r = infonce(Mat::Constant(2, 2, 0.3), cfg);
  EXPECT_NEAR(r.l_infonce, 2.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(r.l_t2v, std::log(2.0), 1e-12);
}

TEST(InfoNce, ShiftInvariance) {
  std::mt19937_64 rng(1);
  const Mat s = random_scores(5, rng);
  LossConfig cfg;
  const double base = infonce(s, cfg).l_infonce;
  const double shifted = infonce((s.array() + 0.7).matrix(), cfg).l_infonce;
  EXPECT_NEAR(base, shifted, 1e-10);
}

TEST(InfoNce, MatchesLogSumExpLoops) {
  std::mt19937_64 rng(2);
  for (int b : {2, 3, 6}) {
    const Mat s = random_scores(b, rng);
    LossConfig cfg;
    cfg.logit_scale = 3.5;
    const auto r = infonce(s, cfg);
    EXPECT_NEAR(r.l_t2v, oracle_infonce_direction(3.5 * s), 1e-12);
    EXPECT_NEAR(r.l_v2t, oracle_infonce_direction(3.5 * s.transpose()), 1e-12);
  }
}

TEST(InfoNce, LargeScaleStaysFinite) {
  Mat s = Mat::Constant(3, 3, -1.0);
  s.diagonal().setOnes();
  const auto r = infonce(s, LossConfig{});
  EXPECT_TRUE(std::isfinite(r.l_infonce));
  EXPECT_LT(r.l_infonce, 1e-80);
}

TEST(TotalLoss, EtaZeroIsExactlyInfoNce) {
  const auto s = worked_example();
  LossConfig cfg;
  cfg.eta = 0.0;
  const auto r = total_loss(s, GrainSet::all(), cfg);
  EXPECT_EQ(r.total, r.l_infonce);
  EXPECT_DOUBLE_EQ(r.l_csc, 2.0);
}

TEST(TotalLoss, AddsWeightedConsistency) {
  const auto s = worked_example();
  LossConfig cfg;
  cfg.eta = 0.3;
  const auto r = total_loss(s, GrainSet::all(), cfg);
  EXPECT_NEAR(r.total, infonce(s.aggregate, cfg).l_infonce + 0.3 * 2.0, 1e-12);
}

TEST(TotalLoss, VarianceUsesOnlyActiveGrains) {
  const auto s = worked_example();
  const auto r = total_loss(s, GrainSet::global_only(), LossConfig{});
  // positives (1,1) and (0,2); negatives (0,0)
  EXPECT_DOUBLE_EQ(r.var_pos, 0.5);
  EXPECT_EQ(r.var_neg, 0.0);
  EXPECT_TRUE(r.csc_degenerate);
}

TEST(TotalLoss, SinglePairWithConsistencyIsRejected) {
  ScoreTensors s;
  for (Grain g : kAllGrains) s.grain(g) = Mat::Constant(1, 1, 0.5);
  s.aggregate = s.vs;
  EXPECT_THROW(total_loss(s, GrainSet::all(), LossConfig{}), DataError);
  LossConfig cfg;
  cfg.eta = 0;
  EXPECT_EQ(total_loss(s, GrainSet::all(), cfg).total, 0.0);
}

TEST(LossConfig, Validation) {
  LossConfig cfg;
  cfg.eta = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.logit_scale = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(parse_csc_variant("all"), ConfigError);
  EXPECT_EQ(parse_variance_mode("sample"), VarianceMode::sample);
}
