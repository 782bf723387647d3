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

#include "glccl/losses.hpp"

#include <algorithm>
#include <array>

namespace glccl {

const char* to_string(CscVariant v) {
  switch (v) {
    case CscVariant::positive_only: return "positive_only";
    case CscVariant::negative_only: return "negative_only";
    case CscVariant::both: return "both";
  }
  return "?";
}

const char* to_string(VarianceMode m) {
  return m == VarianceMode::population ? "population" : "sample";
}

CscVariant parse_csc_variant(const std::string& s) {
  if (s == "positive_only") return CscVariant::positive_only;
  if (s == "negative_only") return CscVariant::negative_only;
  if (s == "both") return CscVariant::both;
  throw ConfigError("unknown csc_variant '" + s + "'");
}

VarianceMode parse_variance_mode(const std::string& s) {
  if (s == "population") return VarianceMode::population;
  if (s == "sample") return VarianceMode::sample;
  throw ConfigError("unknown variance_mode '" + s + "'");
}

void LossConfig::validate() const {
  if (!std::isfinite(eta) || eta < 0.0) throw ConfigError("loss: eta must be finite and >= 0");
  if (!(logit_scale > 0.0) || !std::isfinite(logit_scale)) {
    throw ConfigError("loss: logit_scale must be positive");
  }
  if (!(eps_var > 0.0)) throw ConfigError("loss: eps_var must be positive");
}

namespace {

void check_square(const Mat& m, const char* op) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw DataError(std::string(op) + ": expected a non-empty square matrix");
  }
  if (!m.allFinite()) throw NumericError(std::string(op) + ": non-finite input");
}

// Row-wise softmax of `logits` (stabilized by the row max) and the per-row
// log-sum-exp.
Mat softmax_rows(const Mat& logits, Vec& lse) {
  Mat p(logits.rows(), logits.cols());
  lse.resize(logits.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    p.row(r) = (logits.row(r).array() - mx).exp();
    const double sum = p.row(r).sum();
    lse[r] = mx + std::log(sum);
    p.row(r) /= sum;
  }
  return p;
}

}  // namespace

InfoNceResult infonce(const Mat& aggregate, const LossConfig& cfg) {
  check_square(aggregate, "infonce");
  const Mat logits = cfg.logit_scale * aggregate;
  const double b = static_cast<double>(logits.rows());
  Vec lse_rows, lse_cols;
  softmax_rows(logits, lse_rows);
  softmax_rows(logits.transpose(), lse_cols);
  InfoNceResult r;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    r.l_t2v += lse_rows[i] - logits(i, i);
    r.l_v2t += lse_cols[i] - logits(i, i);
  }
  r.l_t2v /= b;
  r.l_v2t /= b;
  r.l_infonce = r.l_t2v + r.l_v2t;
  return r;
}

InfoNceGrad infonce_backward(const Mat& aggregate, const LossConfig& cfg) {
  check_square(aggregate, "infonce");
  const Mat logits = cfg.logit_scale * aggregate;
  const double b = static_cast<double>(logits.rows());
  Vec lse;
  Mat d_logits = softmax_rows(logits, lse);
  d_logits += softmax_rows(logits.transpose(), lse).transpose();
  d_logits.diagonal().array() -= 2.0;
  d_logits /= b;
  InfoNceGrad g;
  g.d_aggregate = cfg.logit_scale * d_logits;
  g.d_logit_scale = (d_logits.array() * aggregate.array()).sum();
  return g;
}

double grain_variance(std::span<const double> values, VarianceMode mode) {
  const auto n = values.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(mode == VarianceMode::population ? n : n - 1);
}

namespace {

void check_grains(const std::vector<const Mat*>& grains, const LossConfig& cfg) {
  if (grains.empty()) throw ConfigError("csc: no grain tensors");
  for (const Mat* g : grains) check_square(*g, "csc");
  const auto b = grains.front()->rows();
  for (const Mat* g : grains) {
    if (g->rows() != b) throw DataError("csc: grain tensors differ in batch size");
  }
  if (b < 2 && cfg.csc_variant != CscVariant::positive_only) {
    throw DataError("csc: negatives need a batch of at least 2");
  }
}

struct VarianceTable {
  Mat var;  // per-pair variance
  double var_pos = 0, var_neg = 0;
};

VarianceTable pair_variances(const std::vector<const Mat*>& grains, VarianceMode mode) {
  const auto b = grains.front()->rows();
  VarianceTable t;
  t.var.resize(b, b);
  std::vector<double> values(grains.size());
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      for (std::size_t g = 0; g < grains.size(); ++g) values[g] = (*grains[g])(i, j);
      t.var(i, j) = grain_variance(values, mode);
    }
  }
  const double bd = static_cast<double>(b);
  const double diag = t.var.diagonal().sum();
  t.var_pos = diag / bd;
  t.var_neg = b > 1 ? (t.var.sum() - diag) / (bd * bd - bd) : 0.0;
  return t;
}

}  // namespace

CscResult csc(const std::vector<const Mat*>& grains, const LossConfig& cfg) {
  check_grains(grains, cfg);
  const auto t = pair_variances(grains, cfg.variance_mode);
  CscResult r;
  r.var_pos = t.var_pos;
  r.var_neg = t.var_neg;
  const double denom = std::max(t.var_neg, cfg.eps_var);
  r.degenerate = cfg.csc_variant != CscVariant::positive_only && t.var_neg < cfg.eps_var;
  switch (cfg.csc_variant) {
    case CscVariant::both: r.l_csc = t.var_pos / denom; break;
    case CscVariant::positive_only: r.l_csc = t.var_pos; break;
    case CscVariant::negative_only: r.l_csc = 1.0 / denom; break;
  }
  return r;
}

std::vector<Mat> csc_backward(const std::vector<const Mat*>& grains, const LossConfig& cfg) {
  check_grains(grains, cfg);
  const auto t = pair_variances(grains, cfg.variance_mode);
  const auto b = grains.front()->rows();
  const double bd = static_cast<double>(b);
  const bool clamped = t.var_neg < cfg.eps_var;
  const double denom = std::max(t.var_neg, cfg.eps_var);

  double d_pos = 0.0, d_neg = 0.0;
  switch (cfg.csc_variant) {
    case CscVariant::both:
      d_pos = 1.0 / denom;
      d_neg = clamped ? 0.0 : -t.var_pos / (denom * denom);
      break;
    case CscVariant::positive_only: d_pos = 1.0; break;
    case CscVariant::negative_only: d_neg = clamped ? 0.0 : -1.0 / (denom * denom); break;
  }

  const auto n = grains.size();
  std::vector<Mat> out(n, Mat::Zero(b, b));
  if (n < 2) return out;
  const double divisor =
      static_cast<double>(cfg.variance_mode == VarianceMode::population ? n : n - 1);
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      // d Var_pos / d var(i,i) = 1/B; d Var_neg / d var(i,j) = 1/(B^2 - B).
      const double d_var = i == j ? d_pos / bd : d_neg / (bd * bd - bd);
      if (d_var == 0.0) continue;
      double mean = 0.0;
      for (std::size_t g = 0; g < n; ++g) mean += (*grains[g])(i, j);
      mean /= static_cast<double>(n);
      for (std::size_t g = 0; g < n; ++g) {
        out[g](i, j) = d_var * 2.0 * ((*grains[g])(i, j) - mean) / divisor;
      }
    }
  }
  return out;
}

namespace {

std::vector<Grain> active(const GrainSet& grains) {
  std::vector<Grain> out;
  for (Grain g : kAllGrains) {
    if (grains.has(g)) out.push_back(g);
  }
  if (out.empty()) throw ConfigError("no active grains");
  return out;
}

}  // namespace

LossReport total_loss(const ScoreTensors& scores, const GrainSet& grains, const LossConfig& cfg) {
  cfg.validate();
  const auto act = active(grains);
  LossReport r;
  const auto nce = infonce(scores.aggregate, cfg);
  r.l_t2v = nce.l_t2v;
  r.l_v2t = nce.l_v2t;
  r.l_infonce = nce.l_infonce;
  r.eta = cfg.eta;

  // With eta = 0 the consistency term is reported when it is defined but never
  // applied, so single-pair batches still work.
  const bool csc_defined = scores.batch() >= 2 || cfg.csc_variant == CscVariant::positive_only;
  if (csc_defined) {
    std::vector<const Mat*> tensors;
    for (Grain g : act) tensors.push_back(&scores.grain(g));
    const auto c = csc(tensors, cfg);
    r.var_pos = c.var_pos;
    r.var_neg = c.var_neg;
    r.l_csc = c.l_csc;
    r.csc_degenerate = c.degenerate;
  } else if (cfg.eta != 0.0) {
    throw DataError("total_loss: consistency term needs a batch of at least 2");
  }
  r.total = cfg.eta == 0.0 ? r.l_infonce : r.l_infonce + cfg.eta * r.l_csc;
  if (!std::isfinite(r.total)) throw NumericError("total_loss: non-finite loss");
  return r;
}

LossGrad total_loss_backward(const ScoreTensors& scores, const GrainSet& grains,
                             const LossConfig& cfg) {
  cfg.validate();
  const auto act = active(grains);
  const auto b = scores.batch();
  const auto nce = infonce_backward(scores.aggregate, cfg);

  LossGrad g;
  g.d_logit_scale = nce.d_logit_scale;
  const double share = 1.0 / static_cast<double>(act.size());
  for (Grain k : kAllGrains) {
    g.d_scores.grain(k) = grains.has(k) ? Mat(nce.d_aggregate * share) : Mat(Mat::Zero(b, b));
  }
  g.d_scores.aggregate = nce.d_aggregate;

  if (cfg.eta != 0.0) {
    std::vector<const Mat*> tensors;
    for (Grain k : act) tensors.push_back(&scores.grain(k));
    const auto d_csc = csc_backward(tensors, cfg);
    for (std::size_t i = 0; i < act.size(); ++i) g.d_scores.grain(act[i]) += cfg.eta * d_csc[i];
  }
  return g;
}

}  // namespace glccl
