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
#include <vector>

#include "glccl/features.hpp"
#include "glccl/types.hpp"

namespace glccl {

/// Pre-normalization transformer block over the frame axis:
///   x1 = x + Attn(LN1(x)) Wo + bo,   x2 = x1 + GELU(LN2(x1) W1 + b1) W2 + b2
/// with single-head scaled dot-product attention.
struct TransformerBlock {
  Vec ln1_gain, ln1_bias;
  Mat wq, wk, wv, wo;
  Vec bq, bk, bv, bo;
  Vec ln2_gain, ln2_bias;
  Mat w1;  // D x H
  Vec b1;
  Mat w2;  // H x D
  Vec b2;

  static TransformerBlock zeros(int dim, int hidden);
  std::size_t param_count() const;
};

/// v_bar = Mixer(v_bar' + P). Depth 0 is the identity mixer.
struct TemporalEncoder {
  Mat positional;  // n_v_max x D
  std::vector<TransformerBlock> blocks;

  int depth() const { return static_cast<int>(blocks.size()); }
  int capacity() const { return static_cast<int>(positional.rows()); }
  int dim() const { return static_cast<int>(positional.cols()); }
  std::size_t param_count() const;

  /// Zero positional table, no blocks.
  static TemporalEncoder identity(int n_v_max, int dim);
  /// Seeded initialization; positional starts at zero, projections ~ N(0, 0.02^2).
  static TemporalEncoder initialized(int n_v_max, int dim, int depth, int ffn_mult,
                                     std::uint64_t seed);
};

inline constexpr double kLayerNormEps = 1e-5;

struct BlockCache {
  Mat x, h1, q, k, v, attn, ctx, x1, h2, u, g;
  Vec mu1, rstd1, mu2, rstd2;
};

struct TemporalCache {
  Mat input;  // valid frames before positional add
  std::vector<BlockCache> blocks;
};

/// Forward over valid frame rows only (frames.rows() <= capacity).
Mat temporal_forward(const Mat& frames, const TemporalEncoder& enc, TemporalCache* cache = nullptr);

/// Gradient of the encoder output w.r.t. its input; parameter gradients are
/// accumulated into `grad` (same shapes as `enc`).
Mat temporal_backward(const TemporalEncoder& enc, const TemporalCache& cache, const Mat& d_out,
                      TemporalEncoder& grad);

/// Convenience wrapper: returns a copy of `v` whose valid rows are encoded.
VideoTokens temporal_encode(const VideoTokens& v, const TemporalEncoder& enc);

TemporalEncoder zeros_like(const TemporalEncoder& enc);

}  // namespace glccl
