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

#include "glccl/temporal.hpp"

#include <random>

namespace glccl {

namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

double gelu(double u) { return 0.5 * u * (1.0 + std::tanh(kGeluC * (u + kGeluA * u * u * u))); }

double gelu_grad(double u) {
  const double t = std::tanh(kGeluC * (u + kGeluA * u * u * u));
  return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * u * u);
}

Mat layer_norm(const Mat& x, const Vec& gain, const Vec& bias, Vec& mu, Vec& rstd) {
  const auto n = x.rows();
  const double d = static_cast<double>(x.cols());
  mu.resize(n);
  rstd.resize(n);
  Mat h(n, x.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    mu[r] = x.row(r).sum() / d;
    const double var = (x.row(r).array() - mu[r]).square().sum() / d;
    rstd[r] = 1.0 / std::sqrt(var + kLayerNormEps);
    h.row(r) = ((x.row(r).array() - mu[r]) * rstd[r]) * gain.transpose().array() +
               bias.transpose().array();
  }
  return h;
}

Mat layer_norm_backward(const Mat& x, const Vec& mu, const Vec& rstd, const Vec& gain,
                        const Mat& dh, Vec& dgain, Vec& dbias) {
  const double d = static_cast<double>(x.cols());
  Mat dx(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Eigen::RowVectorXd xhat = (x.row(r).array() - mu[r]) * rstd[r];
    dgain += (dh.row(r).array() * xhat.array()).matrix().transpose();
    dbias += dh.row(r).transpose();
    const Eigen::RowVectorXd dxhat = dh.row(r).array() * gain.transpose().array();
    const double mean_dxhat = dxhat.sum() / d;
    const double mean_dxhat_xhat = dxhat.dot(xhat) / d;
    dx.row(r) = rstd[r] * (dxhat.array() - mean_dxhat - xhat.array() * mean_dxhat_xhat);
  }
  return dx;
}

Mat add_bias(Mat m, const Vec& b) {
  m.rowwise() += b.transpose();
  return m;
}

void softmax_rows(Mat& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double mx = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() - mx).exp();
    s.row(r) /= s.row(r).sum();
  }
}

Mat block_forward(const Mat& x, const TransformerBlock& b, BlockCache* cache) {
  BlockCache local;
  BlockCache& c = cache ? *cache : local;
  const double scale = 1.0 / std::sqrt(static_cast<double>(x.cols()));
  c.x = x;
  c.h1 = layer_norm(x, b.ln1_gain, b.ln1_bias, c.mu1, c.rstd1);
  c.q = add_bias(c.h1 * b.wq, b.bq);
  c.k = add_bias(c.h1 * b.wk, b.bk);
  c.v = add_bias(c.h1 * b.wv, b.bv);
  c.attn = (c.q * c.k.transpose()) * scale;
  softmax_rows(c.attn);
  c.ctx = c.attn * c.v;
  c.x1 = x + add_bias(c.ctx * b.wo, b.bo);
  c.h2 = layer_norm(c.x1, b.ln2_gain, b.ln2_bias, c.mu2, c.rstd2);
  c.u = add_bias(c.h2 * b.w1, b.b1);
  c.g = c.u.unaryExpr([](double u) { return gelu(u); });
  return c.x1 + add_bias(c.g * b.w2, b.b2);
}

Mat block_backward(const TransformerBlock& b, const BlockCache& c, const Mat& d_out,
                   TransformerBlock& g) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(c.x.cols()));
  // Feed-forward branch.
  Mat dx1 = d_out;
  g.w2 += c.g.transpose() * d_out;
  g.b2 += d_out.colwise().sum().transpose();
  const Mat dg = d_out * b.w2.transpose();
  const Mat du = dg.array() * c.u.unaryExpr([](double u) { return gelu_grad(u); }).array();
  g.w1 += c.h2.transpose() * du;
  g.b1 += du.colwise().sum().transpose();
  const Mat dh2 = du * b.w1.transpose();
  dx1 += layer_norm_backward(c.x1, c.mu2, c.rstd2, b.ln2_gain, dh2, g.ln2_gain, g.ln2_bias);

  // Attention branch.
  g.wo += c.ctx.transpose() * dx1;
  g.bo += dx1.colwise().sum().transpose();
  const Mat dctx = dx1 * b.wo.transpose();
  const Mat dattn = dctx * c.v.transpose();
  const Mat dv = c.attn.transpose() * dctx;
  Mat dscores = c.attn.array() * dattn.array();
  for (Eigen::Index r = 0; r < dscores.rows(); ++r) {
    const double inner = dscores.row(r).sum();
    dscores.row(r) -= c.attn.row(r) * inner;
  }
  dscores *= scale;
  const Mat dq = dscores * c.k;
  const Mat dk = dscores.transpose() * c.q;
  g.wq += c.h1.transpose() * dq;
  g.wk += c.h1.transpose() * dk;
  g.wv += c.h1.transpose() * dv;
  g.bq += dq.colwise().sum().transpose();
  g.bk += dk.colwise().sum().transpose();
  g.bv += dv.colwise().sum().transpose();
  const Mat dh1 = dq * b.wq.transpose() + dk * b.wk.transpose() + dv * b.wv.transpose();
  return dx1 + layer_norm_backward(c.x, c.mu1, c.rstd1, b.ln1_gain, dh1, g.ln1_gain, g.ln1_bias);
}

}  // namespace

TransformerBlock TransformerBlock::zeros(int dim, int hidden) {
  TransformerBlock b;
  b.ln1_gain = Vec::Zero(dim);
  b.ln1_bias = Vec::Zero(dim);
  b.wq = Mat::Zero(dim, dim);
  b.wk = Mat::Zero(dim, dim);
  b.wv = Mat::Zero(dim, dim);
  b.wo = Mat::Zero(dim, dim);
  b.bq = Vec::Zero(dim);
  b.bk = Vec::Zero(dim);
  b.bv = Vec::Zero(dim);
  b.bo = Vec::Zero(dim);
  b.ln2_gain = Vec::Zero(dim);
  b.ln2_bias = Vec::Zero(dim);
  b.w1 = Mat::Zero(dim, hidden);
  b.b1 = Vec::Zero(hidden);
  b.w2 = Mat::Zero(hidden, dim);
  b.b2 = Vec::Zero(dim);
  return b;
}

std::size_t TransformerBlock::param_count() const {
  return static_cast<std::size_t>(ln1_gain.size() + ln1_bias.size() + wq.size() + wk.size() +
                                  wv.size() + wo.size() + bq.size() + bk.size() + bv.size() +
                                  bo.size() + ln2_gain.size() + ln2_bias.size() + w1.size() +
                                  b1.size() + w2.size() + b2.size());
}

std::size_t TemporalEncoder::param_count() const {
  std::size_t n = static_cast<std::size_t>(positional.size());
  for (const auto& b : blocks) n += b.param_count();
  return n;
}

TemporalEncoder TemporalEncoder::identity(int n_v_max, int dim) {
  TemporalEncoder e;
  e.positional = Mat::Zero(n_v_max, dim);
  return e;
}

TemporalEncoder TemporalEncoder::initialized(int n_v_max, int dim, int depth, int ffn_mult,
                                             std::uint64_t seed) {
  if (depth < 0 || ffn_mult < 1 || dim < 1 || n_v_max < 1) {
    throw ConfigError("temporal encoder: invalid shape");
  }
  TemporalEncoder e = identity(n_v_max, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.02);
  auto fill = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  };
  for (int l = 0; l < depth; ++l) {
    auto b = TransformerBlock::zeros(dim, ffn_mult * dim);
    b.ln1_gain.setOnes();
    b.ln2_gain.setOnes();
    fill(b.wq);
    fill(b.wk);
    fill(b.wv);
    fill(b.wo);
    fill(b.w1);
    fill(b.w2);
    e.blocks.push_back(std::move(b));
  }
  return e;
}

TemporalEncoder zeros_like(const TemporalEncoder& enc) {
  TemporalEncoder g;
  g.positional = Mat::Zero(enc.positional.rows(), enc.positional.cols());
  for (const auto& b : enc.blocks) {
    g.blocks.push_back(TransformerBlock::zeros(static_cast<int>(b.wq.rows()),
                                               static_cast<int>(b.w1.cols())));
  }
  return g;
}

Mat temporal_forward(const Mat& frames, const TemporalEncoder& enc, TemporalCache* cache) {
  if (frames.rows() > enc.capacity()) {
    throw DataError("frame count " + std::to_string(frames.rows()) +
                    " exceeds temporal positional capacity " + std::to_string(enc.capacity()));
  }
  if (frames.cols() != enc.dim()) throw DataError("temporal encoder dimension mismatch");
  if (cache) {
    cache->input = frames;
    cache->blocks.assign(enc.blocks.size(), BlockCache{});
  }
  Mat x = frames + enc.positional.topRows(frames.rows());
  for (std::size_t l = 0; l < enc.blocks.size(); ++l) {
    x = block_forward(x, enc.blocks[l], cache ? &cache->blocks[l] : nullptr);
  }
  return x;
}

Mat temporal_backward(const TemporalEncoder& enc, const TemporalCache& cache, const Mat& d_out,
                      TemporalEncoder& grad) {
  Mat d = d_out;
  for (std::size_t l = enc.blocks.size(); l-- > 0;) {
    d = block_backward(enc.blocks[l], cache.blocks[l], d, grad.blocks[l]);
  }
  grad.positional.topRows(d.rows()) += d;
  return d;
}

VideoTokens temporal_encode(const VideoTokens& v, const TemporalEncoder& enc) {
  VideoTokens out = v;
  out.frames.topRows(v.frame_count) = temporal_forward(Mat(v.valid_frames()), enc);
  return out;
}

}  // namespace glccl
