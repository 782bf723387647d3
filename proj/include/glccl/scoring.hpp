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

#include <span>
#include <string>

#include "glccl/features.hpp"
#include "glccl/glim.hpp"
#include "glccl/types.hpp"

namespace glccl {

enum class Grain { vs, vw, sf, fw };
inline constexpr Grain kAllGrains[] = {Grain::vs, Grain::vw, Grain::sf, Grain::fw};

const char* to_string(Grain g);

/// Which grains enter the aggregate score (and the consistency variance).
struct GrainSet {
  bool vs = true, vw = true, sf = true, fw = true;

  static GrainSet all() { return {}; }
  /// Grains built only from the text-guided video vector.
  static GrainSet global_only() { return {true, true, false, false}; }
  /// Grains built only from the text-guided frame matrix.
  static GrainSet local_only() { return {false, false, true, true}; }

  bool has(Grain g) const;
  int count() const { return int{vs} + int{vw} + int{sf} + int{fw}; }
  bool operator==(const GrainSet&) const = default;
};

struct ScoreConfig {
  GlimConfig glim;
  GrainSet grains;
  // Text rows (and video columns) per tile of the B x B evaluation.
  int tile_size = 16;
  int threads = 1;
};

struct GrainScores {
  double vs = 0, vw = 0, sf = 0, fw = 0;
  double aggregate = 0;

  double get(Grain g) const;
};

/// Per-grain B x B matrices; entry (i, j) scores text i against video j.
struct ScoreTensors {
  Mat vs, vw, sf, fw;
  Mat aggregate;

  const Mat& grain(Grain g) const;
  Mat& grain(Grain g);
  Eigen::Index batch() const { return aggregate.rows(); }
};

/// Softmax-weighted combination softmax(s) . s.
double weighted_combination(const Eigen::Ref<const Vec>& s);
/// Gradient of weighted_combination w.r.t. s: p_j (1 + s_j - f).
Vec weighted_combination_grad(const Eigen::Ref<const Vec>& s);

double score_vs(const Vec& guided_video, const Vec& sentence);
double score_vw(const Vec& guided_video, const Mat& words);
double score_sf(const Mat& guided_frames, const Vec& sentence);

/// Both intermediate reductions of the frame-word contrast.
struct FrameWordTrace {
  Mat similarity;   // N_t x N_t, guided frames x words
  Vec over_words;   // word axis reduced first, frame-indexed
  Vec over_frames;  // frame axis reduced first, word-indexed
};
double score_fw(const Mat& guided_frames, const Mat& words, FrameWordTrace* trace = nullptr);

/// The full pair score on valid rows: concat -> GLIM -> grains -> mean.
GrainScores score_pair(const Vec& sentence, const Mat& words, const Mat& frames,
                       const ScoreConfig& cfg = {});
GrainScores score_pair(const TextTokens& t, const VideoTokens& v, const ScoreConfig& cfg = {});

/// Mean of the active grains, summed in vs, vw, sf, fw order.
double aggregate(const GrainScores& s, const GrainSet& grains);

ScoreTensors score_matrix(std::span<const TextTokens> texts, std::span<const VideoTokens> videos,
                          const ScoreConfig& cfg = {});

// ---------------------------------------------------------------------------
// Reverse passes.

struct VecGradPair {
  Vec d_a;
  Vec d_b;
};
struct VecMatGrad {
  Vec d_vec;
  Mat d_mat;
};
struct MatMatGrad {
  Mat d_a;
  Mat d_b;
};

VecGradPair score_vs_backward(const Vec& guided_video, const Vec& sentence, double upstream);
VecMatGrad score_vw_backward(const Vec& guided_video, const Mat& words, double upstream);
VecMatGrad score_sf_backward(const Mat& guided_frames, const Vec& sentence, double upstream);
MatMatGrad score_fw_backward(const Mat& guided_frames, const Mat& words, double upstream);

struct PairGrad {
  Vec d_sentence;
  Mat d_words;
  Mat d_frames;
};

/// Upstream gradients per grain (d loss / d grain); inactive grains should carry 0.
PairGrad score_pair_backward(const Vec& sentence, const Mat& words, const Mat& frames,
                             const ScoreConfig& cfg, const GrainScores& upstream);

}  // namespace glccl
