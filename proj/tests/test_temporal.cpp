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

#include "glccl/temporal.hpp"

using namespace glccl;

namespace {

Mat random_mat(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Vec random_vec(int n, std::mt19937_64& rng, double scale = 1.0) {
  return random_mat(n, 1, rng, scale);
}

// One pre-norm block written with explicit loops.
std::vector<std::vector<double>> block_oracle(const std::vector<std::vector<double>>& x,
                                              const TransformerBlock& b) {
  const std::size_t n = x.size(), d = x[0].size(), h = static_cast<std::size_t>(b.w1.cols());
  auto norm = [&](const std::vector<double>& r, const Vec& g, const Vec& bias) {
    double mu = 0;
    for (double e : r) mu += e;
    mu /= d;
    double var = 0;
    for (double e : r) var += (e - mu) * (e - mu);
    var /= d;
    std::vector<double> out(d);
    for (std::size_t k = 0; k < d; ++k) out[k] = (r[k] - mu) / std::sqrt(var + 1e-5) * g[k] + bias[k];
    return out;
  };
  auto affine = [](const std::vector<double>& r, const Mat& w, const Vec& bias) {
    std::vector<double> out(w.cols());
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      double acc = bias[j];
      for (std::size_t k = 0; k < r.size(); ++k) acc += r[k] * w(k, j);
      out[j] = acc;
    }
    return out;
  };
  std::vector<std::vector<double>> q(n), k(n), v(n), x1(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto h1 = norm(x[i], b.ln1_gain, b.ln1_bias);
    q[i] = affine(h1, b.wq, b.bq);
    k[i] = affine(h1, b.wk, b.bk);
    v[i] = affine(h1, b.wv, b.bv);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logits(n);
    double mx = -1e300;
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0;
      for (std::size_t c = 0; c < d; ++c) acc += q[i][c] * k[j][c];
      logits[j] = acc / std::sqrt(static_cast<double>(d));
      mx = std::max(mx, logits[j]);
    }
    double z = 0;
    for (auto& l : logits) z += (l = std::exp(l - mx));
    std::vector<double> ctx(d, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < d; ++c) ctx[c] += logits[j] / z * v[j][c];
    const auto o = affine(ctx, b.wo, b.bo);
    x1[i].resize(d);
    for (std::size_t c = 0; c < d; ++c) x1[i][c] = x[i][c] + o[c];
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto u = affine(norm(x1[i], b.ln2_gain, b.ln2_bias), b.w1, b.b1);
    for (std::size_t c = 0; c < h; ++c) {
      const double t = u[c];
      u[c] = 0.5 * t * (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (t + 0.044715 * t * t * t)));
    }
    const auto f = affine(u, b.w2, b.b2);
    out[i].resize(d);
    for (std::size_t c = 0; c < d; ++c) out[i][c] = x1[i][c] + f[c];
  }
  return out;
}

TransformerBlock random_block(int d, int h, std::mt19937_64& rng) {
  TransformerBlock b = TransformerBlock::zeros(d, h);
  b.ln1_gain = Vec::Ones(d) + random_vec(d, rng, 0.1);
  b.ln1_bias = random_vec(d, rng, 0.1);
  b.ln2_gain = Vec::Ones(d) + random_vec(d, rng, 0.1);
  b.ln2_bias = random_vec(d, rng, 0.1);
  b.wq = random_mat(d, d, rng, 0.3);
  b.wk = random_mat(d, d, rng, 0.3);
  b.wv = random_mat(d, d, rng, 0.3);
  b.wo = random_mat(d, d, rng, 0.3);
  b.bq = random_vec(d, rng, 0.1);
  b.bk = random_vec(d, rng, 0.1);
  b.bv = random_vec(d, rng, 0.1);
  b.bo = random_vec(d, rng, 0.1);
  b.w1 = random_mat(d, h, rng, 0.3);
  b.b1 = random_vec(h, rng, 0.1);
  b.w2 = random_mat(h, d, rng, 0.3);
  b.b2 = random_vec(d, rng, 0.1);
  return b;
}

}  // namespace

TEST(Temporal, DepthZeroWithZeroPositionalIsIdentity) {
  std::mt19937_64 rng(1);
  const Mat frames = random_mat(5, 6, rng);
  const auto enc = TemporalEncoder::identity(8, 6);
  EXPECT_EQ((temporal_forward(frames, enc) - frames).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Temporal, DepthZeroAddsPositionalRows) {
  std::mt19937_64 rng(2);
  const Mat frames = random_mat(3, 4, rng);
  auto enc = TemporalEncoder::identity(5, 4);
  enc.positional.row(1) << 1, 2, 3, 4;
  const Mat out = temporal_forward(frames, enc);
  EXPECT_LE((out.row(1) - frames.row(1) - enc.positional.row(1)).norm(), 1e-15);
  EXPECT_EQ((out.row(0) - frames.row(0)).norm(), 0.0);
  EXPECT_EQ((out.row(2) - frames.row(2)).norm(), 0.0);
}

TEST(Temporal, SingleBlockMatchesLoopOracle) {
  std::mt19937_64 rng(3);
  const int n = 4, d = 6, h = 12;
  auto enc = TemporalEncoder::identity(n, d);
  enc.positional = random_mat(n, d, rng, 0.1);
  enc.blocks.push_back(random_block(d, h, rng));
  const Mat frames = random_mat(n, d, rng, 0.5);
  std::vector<std::vector<double>> x(n, std::vector<double>(d));
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) x[i][c] = frames(i, c) + enc.positional(i, c);
  const auto expect = block_oracle(x, enc.blocks[0]);
  const Mat got = temporal_forward(frames, enc);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) EXPECT_NEAR(got(i, c), expect[i][c], 1e-10);
}

TEST(Temporal, TooManyFramesIsDataError) {
  const auto enc = TemporalEncoder::identity(3, 4);
  EXPECT_THROW(temporal_forward(Mat::Ones(4, 4), enc), DataError);
}

TEST(Temporal, EncodeLeavesPaddingUntouched) {
  std::mt19937_64 rng(4);
  VideoTokens v;
  v.id = "v";
  v.frames = Mat::Zero(5, 3);
  v.frames.topRows(2) = random_mat(2, 3, rng);
  v.frame_count = 2;
  auto enc = TemporalEncoder::identity(5, 3);
  enc.positional.setOnes();
  const VideoTokens out = temporal_encode(v, enc);
  EXPECT_EQ(out.frames.bottomRows(3).norm(), 0.0);
  EXPECT_EQ((out.frames.topRows(2) - v.frames.topRows(2)).cwiseAbs().maxCoeff(), 1.0);
}

TEST(Temporal, ParameterCounts) {
  const auto id = TemporalEncoder::identity(12, 4);
  EXPECT_EQ(id.param_count(), 48u);
  const auto enc = TemporalEncoder::initialized(12, 8, 2, 4, 7);
  const std::size_t block = 2 * 8 + 4 * 64 + 4 * 8 + 2 * 8 + 8 * 32 + 32 + 32 * 8 + 8;
  EXPECT_EQ(enc.param_count(), 12u * 8u + 2u * block);
}

TEST(Temporal, InitializationIsSeeded) {
  const auto a = TemporalEncoder::initialized(6, 8, 1, 4, 5);
  const auto b = TemporalEncoder::initialized(6, 8, 1, 4, 5);
  const auto c = TemporalEncoder::initialized(6, 8, 1, 4, 6);
  EXPECT_EQ((a.blocks[0].wq - b.blocks[0].wq).norm(), 0.0);
  EXPECT_NE((a.blocks[0].wq - c.blocks[0].wq).norm(), 0.0);
  EXPECT_EQ(a.positional.norm(), 0.0);
}
