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

#include "glccl/features.hpp"
#include "glccl/scoring.hpp"

namespace glccl {

enum class Component { glim, scoring, cross_attention_baseline, projection_heads, temporal_encoder };
const char* to_string(Component c);
Component parse_component(const std::string& s);

struct ParamShape {
  int dim = 512;
  int input_dim = 512;
  int n_v_max = 12;
  int temporal_depth = 0;
  int ffn_mult = 4;
};

/// Exact number of trainable scalars.
std::int64_t count_params(Component c, const ParamShape& shape);

struct FlopShape {
  int batch = 1;  // videos scored per query
  int n_t = 0;
  int n_v = 0;
  int dim = 0;
};

/// Analytic FLOPs of post-backbone scoring: an m x k by k x n product costs
/// 2mkn, a softmax over n entries 5n, a length-D dot product 2D, a row
/// renormalization 3D + 1 (dot, sqrt, D divides). Supports glim (the
/// attention pooling alone), scoring (a full score_pair) and
/// cross_attention_baseline; the total is multiplied by `batch`.
std::int64_t count_flops(const FlopShape& shape, Component c);

struct TimingStats {
  double mean = 0, p50 = 0, p95 = 0;
};

struct CostReport {
  std::string component;
  std::int64_t params = 0;
  std::int64_t flops = 0;  // per query over the whole gallery
  TimingStats per_query_ms;
  int reps = 0;
  std::size_t queries = 0;
  std::size_t gallery = 0;
};

/// Wall-clock per-query scoring of every text against every video. `warmup`
/// repetitions run first and are discarded.
CostReport time_scoring(const Corpus& corpus, int reps, Component c, const ScoreConfig& cfg = {},
                        int warmup = 1, std::uint64_t seed = 0);

}  // namespace glccl
