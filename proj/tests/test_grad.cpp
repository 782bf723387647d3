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

#include <random>
#include <set>

#include "glccl/grad.hpp"

using namespace glccl;

namespace {

Batch small_batch(std::uint64_t seed, int b = 3) {
  GenConfig g;
  g.num_items = b;
  g.dim = 6;
  g.topics = 6;
  g.n_t = 3;
  g.n_v = 3;
  g.sigma = 0.3;
  const Corpus c = normalize_corpus(gen_synthetic(g, seed));
  std::vector<std::size_t> idx(b);
  for (int i = 0; i < b; ++i) idx[i] = i;
  Batch batch = make_batch(c, idx);
  batch.texts[1].word_count = 2;  // exercise padding
  batch.texts[1].words.row(2).setZero();
  batch.videos[0].frame_count = 2;
  batch.videos[0].frames.row(2).setZero();
  return batch;
}

ModelParams small_params(std::uint64_t seed, int depth) {
  ModelParams p;
  p.head = ProjectionHead::random(6, 5, seed);
  p.temporal = TemporalEncoder::initialized(3, 5, depth, 2, seed + 1);
  std::mt19937_64 rng(seed + 2);
  std::normal_distribution<double> n(0.0, 0.1);
  for (auto& t : trainable_tensors(p, false)) {
    auto m = t.map();
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += n(rng);
  }
  p.logit_scale = 7.0;
  return p;
}

}  // namespace

TEST(GradCheck, SuitePassesAtDefaultTolerance) {
  const auto reports = run_gradcheck_suite(1, GradcheckShape{}, FdOptions{});
  ASSERT_GE(reports.size(), 18u);
  for (const auto& r : reports) {
    EXPECT_TRUE(r.report.passed) << r.op << " " << r.report.max_rel_err << " at " << r.report.worst_tensor;
    EXPECT_LE(r.report.max_rel_err, 1e-5) << r.op;
    EXPECT_GT(r.report.checked, 0u) << r.op;
  }
}

TEST(GradCheck, SuiteCoversEveryStage) {
  const auto reports = run_gradcheck_suite(2, GradcheckShape{}, FdOptions{});
  std::set<std::string> ops;
  for (const auto& r : reports) ops.insert(r.op);
  for (const char* op : {"glim_attend", "score_vs", "score_vw", "score_sf", "score_fw", "score_pair",
                         "score_matrix", "temporal_encoder", "infonce", "csc[both,population]",
                         "total_loss[eta=0.1]", "total_loss[eta=0]", "end_to_end[eta=0.1]",
                         "end_to_end[eta=0]"}) {
    EXPECT_TRUE(ops.count(op)) << op;
  }
}

TEST(GradCheck, EndToEndWithTemporalBlocksAndPadding) {
  PipelineConfig cfg;
  cfg.loss.eta = 0.2;
  const auto rep = fd_check(small_params(3, 2), small_batch(4), cfg, FdOptions{});
  EXPECT_TRUE(rep.passed) << rep.max_rel_err << " at " << rep.worst_tensor << "[" << rep.worst_index << "]";
}

TEST(GradCheck, DetectsACorruptedGradient) {
  Mat x(2, 2);
  x << 0.3, -0.2, 0.5, 0.1;
  Mat g = 2.0 * x;
  g(1, 0) += 1e-3;
  std::vector<TensorRef> tensors{{"x", x.data(), 2, 2}};
  const auto rep = fd_check_tensors(tensors, {&g}, [&] { return x.squaredNorm(); }, FdOptions{});
  EXPECT_FALSE(rep.passed);
  EXPECT_EQ(rep.worst_tensor, "x");
  EXPECT_EQ(rep.worst_index, 2);  // row-major (1, 0)
  EXPECT_EQ(rep.checked, 4u);
}

TEST(GradCheck, SamplesAtLeastTwoHundredCoordinates) {
  Mat x = Mat::Random(30, 30);
  const Mat g = 2.0 * x;
  std::vector<TensorRef> tensors{{"x", x.data(), 30, 30}};
  const auto rep = fd_check_tensors(tensors, {&g}, [&] { return x.squaredNorm(); }, FdOptions{});
  EXPECT_TRUE(rep.passed);
  EXPECT_GE(rep.checked, 200u);
  EXPECT_LT(rep.checked, 900u);
}

TEST(Backward, EtaZeroIgnoresConsistency) {
  const auto batch = small_batch(5);
  const auto params = small_params(6, 0);
  PipelineConfig a, b;
  a.loss.eta = 0.0;
  b.loss.eta = 0.0;
  b.loss.csc_variant = CscVariant::negative_only;
  const auto ga = backward(batch, params, a);
  const auto gb = backward(batch, params, b);
  ASSERT_EQ(ga.grads.size(), gb.grads.size());
  for (std::size_t k = 0; k < ga.grads.size(); ++k) {
    EXPECT_EQ((ga.grads[k].grad - gb.grads[k].grad).cwiseAbs().maxCoeff(), 0.0) << ga.grads[k].name;
  }
  EXPECT_EQ(ga.loss, ga.report.l_infonce);
}

TEST(Backward, PaddingRowsGetZeroInputGradient) {
  const auto batch = small_batch(7);
  const auto g = backward(batch, small_params(8, 1), PipelineConfig{}, true);
  EXPECT_EQ(g.at("text1.words").row(2).norm(), 0.0);
  EXPECT_EQ(g.at("video0.frames").row(2).norm(), 0.0);
  EXPECT_GT(g.at("text1.words").row(0).norm(), 0.0);
  EXPECT_TRUE(g.all_finite());
}

TEST(Backward, LossMatchesForward) {
  const auto batch = small_batch(9);
  const auto params = small_params(10, 1);
  PipelineConfig cfg;
  const auto fwd = pipeline_forward(batch, params, cfg);
  const auto g = backward(batch, params, cfg);
  EXPECT_EQ(fwd.report.total, g.loss);
  EXPECT_THROW(g.at("no_such_tensor"), std::exception);
}
