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

#include "glccl/model.hpp"

#include <random>

namespace glccl {

ProjectionHead ProjectionHead::identity(int d_in, int d) {
  if (d_in < 1 || d < 2) throw ConfigError("projection head: need d_in >= 1 and D >= 2");
  return {Mat::Identity(d_in, d), Mat::Identity(d_in, d)};
}

ProjectionHead ProjectionHead::random(int d_in, int d, std::uint64_t seed) {
  if (d_in < 1 || d < 2) throw ConfigError("projection head: need d_in >= 1 and D >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d_in)));
  ProjectionHead h{Mat(d_in, d), Mat(d_in, d)};
  for (Eigen::Index i = 0; i < h.text_matrix.size(); ++i) h.text_matrix.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < h.video_matrix.size(); ++i) h.video_matrix.data()[i] = normal(rng);
  return h;
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams g;
  g.head.text_matrix = Mat::Zero(p.head.text_matrix.rows(), p.head.text_matrix.cols());
  g.head.video_matrix = Mat::Zero(p.head.video_matrix.rows(), p.head.video_matrix.cols());
  g.temporal = zeros_like(p.temporal);
  g.logit_scale = 0.0;
  return g;
}

namespace {

template <typename M>
TensorRef ref(std::string name, M& m) {
  if constexpr (M::IsVectorAtCompileTime) {
    return {std::move(name), m.data(), m.size(), 1};
  } else {
    return {std::move(name), m.data(), m.rows(), m.cols()};
  }
}

}  // namespace

std::vector<TensorRef> trainable_tensors(ModelParams& p, bool include_scale) {
  std::vector<TensorRef> out;
  out.push_back(ref("head.text_matrix", p.head.text_matrix));
  out.push_back(ref("head.video_matrix", p.head.video_matrix));
  out.push_back(ref("temporal.positional", p.temporal.positional));
  for (std::size_t l = 0; l < p.temporal.blocks.size(); ++l) {
    auto& b = p.temporal.blocks[l];
    const std::string pre = "temporal.block" + std::to_string(l) + ".";
    out.push_back(ref(pre + "ln1_gain", b.ln1_gain));
    out.push_back(ref(pre + "ln1_bias", b.ln1_bias));
    out.push_back(ref(pre + "wq", b.wq));
    out.push_back(ref(pre + "wk", b.wk));
    out.push_back(ref(pre + "wv", b.wv));
    out.push_back(ref(pre + "wo", b.wo));
    out.push_back(ref(pre + "bq", b.bq));
    out.push_back(ref(pre + "bk", b.bk));
    out.push_back(ref(pre + "bv", b.bv));
    out.push_back(ref(pre + "bo", b.bo));
    out.push_back(ref(pre + "ln2_gain", b.ln2_gain));
    out.push_back(ref(pre + "ln2_bias", b.ln2_bias));
    out.push_back(ref(pre + "w1", b.w1));
    out.push_back(ref(pre + "b1", b.b1));
    out.push_back(ref(pre + "w2", b.w2));
    out.push_back(ref(pre + "b2", b.b2));
  }
  if (include_scale) out.push_back({"logit_scale", &p.logit_scale, 1, 1});
  return out;
}

CrossAttentionBaseline CrossAttentionBaseline::initialized(int dim, std::uint64_t seed) {
  if (dim < 1) throw ConfigError("cross-attention baseline: dim must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  CrossAttentionBaseline b;
  for (Mat* m : {&b.wq, &b.wk, &b.wv, &b.wo}) {
    m->resize(dim, dim);
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = normal(rng);
  }
  for (Vec* v : {&b.bq, &b.bk, &b.bv, &b.bo}) *v = Vec::Zero(dim);
  return b;
}

double CrossAttentionBaseline::score(const Vec& sentence, const Mat& frames) const {
  if (frames.rows() < 1) throw DataError("cross-attention baseline: no frames");
  const Vec q = wq.transpose() * sentence + bq;
  const Mat k = (frames * wk).rowwise() + bk.transpose();
  const Mat v = (frames * wv).rowwise() + bv.transpose();
  Vec logits = (k * q) / std::sqrt(static_cast<double>(dim()));
  const double mx = logits.maxCoeff();
  logits = (logits.array() - mx).exp();
  logits /= logits.sum();
  const Vec pooled = v.transpose() * logits;
  Vec out = wo.transpose() * pooled + bo;
  out /= out.norm();
  return out.dot(sentence);
}

}  // namespace glccl
