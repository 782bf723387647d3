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

#include <cstdint>
#include <string>
#include <vector>

#include "glccl/evaluator.hpp"
#include "glccl/features.hpp"
#include "glccl/grad.hpp"
#include "glccl/losses.hpp"
#include "glccl/model.hpp"
#include "glccl/scoring.hpp"

namespace glccl {

enum class Variant { global_only, local_only, global_local };
const char* to_string(Variant v);
Variant parse_variant(const std::string& s);
GrainSet grains_for(Variant v);

enum class HeadInit { identity, random };
const char* to_string(HeadInit h);
HeadInit parse_head_init(const std::string& s);

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double lr_head = 1e-3;
  double lr_temporal = 1e-3;
  double lr_scale = 1e-3;
  int warmup_steps = 0;
  std::uint64_t seed = 1;
  Variant variant = Variant::global_local;
  int held_out = 64;
  // 0 keeps the corpus dimension.
  int proj_dim = 0;
  HeadInit head_init = HeadInit::identity;
  int temporal_depth = 0;
  int ffn_mult = 4;
  GlimConfig glim;
  LossConfig loss;
  int tile_size = 16;
  int threads = 1;

  void validate() const;
  PipelineConfig pipeline() const;
};

struct EpochRecord {
  int epoch = 0;  // 0 = before training
  LossReport train_loss;  // mean over the epoch's batches
  RetrievalMetrics held_out;
  double held_out_var_pos = 0;
  double held_out_var_neg = 0;
  double held_out_var_ratio = 0;
  double logit_scale = 0;
  double last_lr = 0;
};

struct TrainReport {
  TrainConfig config;
  std::size_t train_size = 0;
  std::size_t held_out_size = 0;
  int steps = 0;
  int degenerate_batches = 0;
  EpochRecord initial;
  std::vector<EpochRecord> epochs;
  RankVector final_t2v;
  RankVector final_v2t;
  ModelParams final_params;
};

// ---------------------------------------------------------------------------
// Optimizer pieces.

/// Cosine decay from `base` to 0 over `total_steps`, after optional linear warmup.
double cosine_lr(double base, int step, int total_steps, int warmup_steps);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamOptions opt = {}) : opt_(opt) {}
  /// One update of `param` with its own moment state keyed by slot index.
  void step(std::size_t slot, Eigen::Map<Mat> param, const Mat& grad, double lr);
  /// Advances the shared step counter; call once per optimizer step before step().
  void tick() { ++t_; }
  long steps() const { return t_; }

 private:
  AdamOptions opt_;
  long t_ = 0;
  std::vector<Mat> m_, v_;
};

/// Deterministic split of an aligned corpus: first `held_out` of a seeded permutation.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> held_out;
};
Split split_corpus(std::size_t n, int held_out, std::uint64_t seed);

ModelParams init_params(const TrainConfig& cfg, int input_dim, int n_v_max);

/// Scores every held-out pair and reports retrieval metrics plus variance data.
EpochRecord evaluate_params(const ModelParams& params, const Batch& held_out, const TrainConfig& cfg);

TrainReport train(const TrainConfig& cfg, const Corpus& corpus);

// ---------------------------------------------------------------------------
// Ablation harnesses.

struct AblationRow {
  std::string name;
  TrainReport report;
};

/// global_only / local_only / global_local under identical seeds.
std::vector<AblationRow> ablate_interaction(const TrainConfig& base, const Corpus& corpus);

struct CscAblation {
  TrainReport with_csc;     // base eta
  TrainReport without_csc;  // eta = 0
  // CMC curves of held-out t2v ranks per csc_variant (positive_only,
  // negative_only, both), all at the base eta.
  std::vector<std::pair<std::string, std::vector<double>>> cmc;
  std::vector<AblationRow> variants;
};
CscAblation ablate_csc(const TrainConfig& base, const Corpus& corpus);

struct SweepRow {
  double eta = 0;
  double r1_sum = 0;  // t2v R@1 + v2t R@1
  double sum_r = 0;
  TrainReport report;
};
std::vector<double> default_eta_grid();
std::vector<SweepRow> sweep_eta(const TrainConfig& base, const Corpus& corpus,
                                const std::vector<double>& etas);

}  // namespace glccl
