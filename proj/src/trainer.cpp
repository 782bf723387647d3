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

#include "glccl/trainer.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <random>

namespace glccl {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::global_only: return "global_only";
    case Variant::local_only: return "local_only";
    case Variant::global_local: return "global_local";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "global_only") return Variant::global_only;
  if (s == "local_only") return Variant::local_only;
  if (s == "global_local") return Variant::global_local;
  throw ConfigError("unknown variant '" + s + "'");
}

GrainSet grains_for(Variant v) {
  switch (v) {
    case Variant::global_only: return GrainSet::global_only();
    case Variant::local_only: return GrainSet::local_only();
    case Variant::global_local: break;
  }
  return GrainSet::all();
}

const char* to_string(HeadInit h) { return h == HeadInit::identity ? "identity" : "random"; }

HeadInit parse_head_init(const std::string& s) {
  if (s == "identity") return HeadInit::identity;
  if (s == "random") return HeadInit::random;
  throw ConfigError("unknown head_init '" + s + "'");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be positive");
  if (batch_size < 2 && loss.eta != 0.0 && loss.csc_variant != CscVariant::positive_only) {
    throw ConfigError("train: the consistency loss with negatives needs batch_size >= 2");
  }
  for (double lr : {lr_head, lr_temporal, lr_scale}) {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("train: learning rates must be >= 0");
  }
  if (warmup_steps < 0) throw ConfigError("train: warmup_steps must be >= 0");
  if (held_out < 1) throw ConfigError("train: held_out must be positive");
  if (proj_dim < 0 || proj_dim == 1) throw ConfigError("train: proj_dim must be 0 or >= 2");
  if (temporal_depth < 0 || temporal_depth > 4) throw ConfigError("train: temporal_depth must be in [0, 4]");
  if (ffn_mult < 1) throw ConfigError("train: ffn_mult must be positive");
  if (tile_size < 1 || threads < 1) throw ConfigError("train: tile_size and threads must be positive");
  loss.validate();
  if (loss.logit_scale > kMaxLogitScale && loss.scale_learnable) {
    throw ConfigError("train: learnable logit_scale is clamped to 100");
  }
}

PipelineConfig TrainConfig::pipeline() const {
  PipelineConfig p;
  p.score.glim = glim;
  p.score.grains = grains_for(variant);
  p.score.tile_size = tile_size;
  p.score.threads = threads;
  p.loss = loss;
  return p;
}

double cosine_lr(double base, int step, int total_steps, int warmup_steps) {
  if (warmup_steps > 0 && step < warmup_steps) {
    return base * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  }
  const int span = total_steps - warmup_steps - 1;
  if (span <= 0) return base;
  const double progress = std::min(1.0, static_cast<double>(step - warmup_steps) / span);
  return base * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void Adam::step(std::size_t slot, Eigen::Map<Mat> param, const Mat& grad, double lr) {
  if (slot >= m_.size()) {
    m_.resize(slot + 1);
    v_.resize(slot + 1);
  }
  if (m_[slot].size() == 0) {
    m_[slot] = Mat::Zero(grad.rows(), grad.cols());
    v_[slot] = Mat::Zero(grad.rows(), grad.cols());
  }
  const long t = std::max<long>(t_, 1);
  m_[slot] = opt_.beta1 * m_[slot] + (1.0 - opt_.beta1) * grad;
  v_[slot] = opt_.beta2 * v_[slot] + (1.0 - opt_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t));
  param.array() -= lr * (m_[slot].array() / c1) / ((v_[slot].array() / c2).sqrt() + opt_.eps);
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

enum : std::uint64_t { kSplitStream = 1, kInitStream = 2, kOrderStream = 3, kTemporalStream = 4 };

void accumulate(LossReport& acc, const LossReport& r) {
  acc.l_t2v += r.l_t2v;
  acc.l_v2t += r.l_v2t;
  acc.l_infonce += r.l_infonce;
  acc.var_pos += r.var_pos;
  acc.var_neg += r.var_neg;
  acc.l_csc += r.l_csc;
  acc.total += r.total;
}

void scale(LossReport& acc, double s) {
  acc.l_t2v *= s;
  acc.l_v2t *= s;
  acc.l_infonce *= s;
  acc.var_pos *= s;
  acc.var_neg *= s;
  acc.l_csc *= s;
  acc.total *= s;
}

}  // namespace

Split split_corpus(std::size_t n, int held_out, std::uint64_t seed) {
  if (held_out < 1 || static_cast<std::size_t>(held_out) >= n) {
    throw ConfigError("split: held_out must be in [1, corpus size - 1]");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto rng = stream(seed, kSplitStream);
  std::shuffle(perm.begin(), perm.end(), rng);
  Split s;
  s.held_out.assign(perm.begin(), perm.begin() + held_out);
  s.train.assign(perm.begin() + held_out, perm.end());
  std::sort(s.held_out.begin(), s.held_out.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

ModelParams init_params(const TrainConfig& cfg, int input_dim, int n_v_max) {
  const int d = cfg.proj_dim == 0 ? input_dim : cfg.proj_dim;
  ModelParams p;
  auto rng = stream(cfg.seed, kInitStream);
  p.head = cfg.head_init == HeadInit::identity ? ProjectionHead::identity(input_dim, d)
                                               : ProjectionHead::random(input_dim, d, rng());
  p.temporal = TemporalEncoder::initialized(n_v_max, d, cfg.temporal_depth, cfg.ffn_mult,
                                            stream(cfg.seed, kTemporalStream)());
  p.logit_scale = cfg.loss.logit_scale;
  return p;
}

EpochRecord evaluate_params(const ModelParams& params, const Batch& held_out, const TrainConfig& cfg) {
  PipelineConfig pc = cfg.pipeline();
  // Held-out variance statistics are reported even when training runs eta = 0.
  pc.loss.eta = 0.0;
  const auto out = pipeline_forward(held_out, params, pc);
  EpochRecord rec;
  rec.held_out = evaluate_scores(out.scores.aggregate);
  rec.held_out_var_pos = out.report.var_pos;
  rec.held_out_var_neg = out.report.var_neg;
  rec.held_out_var_ratio = out.report.var_pos / std::max(out.report.var_neg, cfg.loss.eps_var);
  rec.logit_scale = params.logit_scale;
  return rec;
}

TrainReport train(const TrainConfig& cfg, const Corpus& corpus) {
  cfg.validate();
  const Corpus aligned = normalize_corpus(corpus.aligned());
  const Split split = split_corpus(aligned.size(), cfg.held_out, cfg.seed);
  const Batch held_out = make_batch(aligned, split.held_out);
  const PipelineConfig pc = cfg.pipeline();

  TrainReport rep;
  rep.config = cfg;
  rep.train_size = split.train.size();
  rep.held_out_size = split.held_out.size();

  ModelParams params = init_params(cfg, aligned.dim, aligned.n_v_max);
  rep.initial = evaluate_params(params, held_out, cfg);
  rep.initial.last_lr = 0.0;

  const std::size_t bsz = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t min_batch =
      (cfg.loss.eta != 0.0 && cfg.loss.csc_variant != CscVariant::positive_only) ? 2 : 1;
  std::size_t per_epoch = split.train.size() / bsz;
  if (split.train.size() % bsz >= std::max<std::size_t>(min_batch, 2)) ++per_epoch;
  if (per_epoch == 0) throw ConfigError("train: training split is smaller than one batch");
  const int total_steps = static_cast<int>(per_epoch) * cfg.epochs;

  auto order_rng = stream(cfg.seed, kOrderStream);
  Adam adam;
  int step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = split.train;
    std::shuffle(order.begin(), order.end(), order_rng);
    LossReport acc;
    double last_lr = 0.0;
    for (std::size_t k = 0; k < per_epoch; ++k) {
      const auto first = order.begin() + static_cast<std::ptrdiff_t>(k * bsz);
      const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), (k + 1) * bsz));
      const std::vector<std::size_t> idx(first, last);
      const Batch batch = make_batch(aligned, idx);

      GradBundle g;
      try {
        g = backward(batch, params, pc, false);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at step " + std::to_string(step) + ": " + e.what());
      }
      if (!std::isfinite(g.loss)) {
        throw NumericError("training diverged at step " + std::to_string(step) + ": non-finite loss");
      }
      if (g.report.csc_degenerate) ++rep.degenerate_batches;
      accumulate(acc, g.report);

      const double factor = cosine_lr(1.0, step, total_steps, cfg.warmup_steps);
      last_lr = cfg.lr_head * factor;
      adam.tick();
      auto tensors = trainable_tensors(params, cfg.loss.scale_learnable);
      for (std::size_t t = 0; t < tensors.size(); ++t) {
        const auto& name = tensors[t].name;
        const double base = name.rfind("head.", 0) == 0       ? cfg.lr_head
                            : name.rfind("temporal.", 0) == 0 ? cfg.lr_temporal
                                                              : cfg.lr_scale;
        adam.step(t, tensors[t].map(), g.grads[t].grad, base * factor);
      }
      params.logit_scale = std::clamp(params.logit_scale, kMinLogitScale, kMaxLogitScale);
      ++step;
    }
    scale(acc, 1.0 / static_cast<double>(per_epoch));
    acc.eta = cfg.loss.eta;

    EpochRecord rec = evaluate_params(params, held_out, cfg);
    rec.epoch = epoch;
    rec.train_loss = acc;
    rec.last_lr = last_lr;
    rep.epochs.push_back(std::move(rec));
  }
  rep.steps = step;

  PipelineConfig eval_cfg = pc;
  eval_cfg.loss.eta = 0.0;
  const auto final_scores = pipeline_forward(held_out, params, eval_cfg).scores.aggregate;
  rep.final_t2v = ranks_from_scores(final_scores, Direction::t2v);
  rep.final_v2t = ranks_from_scores(final_scores, Direction::v2t);
  rep.final_params = std::move(params);
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<AblationRow> ablate_interaction(const TrainConfig& base, const Corpus& corpus) {
  std::vector<AblationRow> rows;
  for (Variant v : {Variant::global_only, Variant::local_only, Variant::global_local}) {
    TrainConfig cfg = base;
    cfg.variant = v;
    rows.push_back({to_string(v), train(cfg, corpus)});
  }
  return rows;
}

CscAblation ablate_csc(const TrainConfig& base, const Corpus& corpus) {
  CscAblation out;
  TrainConfig without = base;
  without.loss.eta = 0.0;
  out.without_csc = train(without, corpus);

  for (CscVariant v : {CscVariant::positive_only, CscVariant::negative_only, CscVariant::both}) {
    TrainConfig cfg = base;
    cfg.loss.csc_variant = v;
    TrainReport r = train(cfg, corpus);
    out.cmc.emplace_back(to_string(v), cmc_curve(r.final_t2v));
    if (v == base.loss.csc_variant) out.with_csc = r;
    out.variants.push_back({to_string(v), std::move(r)});
  }
  return out;
}

std::vector<double> default_eta_grid() { return {0.0, 0.1, 0.3, 0.5, 0.7, 0.9}; }

std::vector<SweepRow> sweep_eta(const TrainConfig& base, const Corpus& corpus,
                                const std::vector<double>& etas) {
  std::vector<SweepRow> rows;
  for (double eta : etas) {
    TrainConfig cfg = base;
    cfg.loss.eta = eta;
    SweepRow row;
    row.eta = eta;
    row.report = train(cfg, corpus);
    const auto& m = row.report.epochs.empty() ? row.report.initial.held_out
                                              : row.report.epochs.back().held_out;
    row.r1_sum = m.t2v.r1 + m.v2t.r1;
    row.sum_r = m.sum_r;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace glccl
