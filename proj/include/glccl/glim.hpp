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

#include "glccl/features.hpp"
#include "glccl/types.hpp"

namespace glccl {

struct GlimConfig {
  // Softmax temperature applied to the text/frame logits. 1 keeps the
  // unscaled product; 1/sqrt(D) is the usual alternative.
  double temperature = 1.0;
  // Rescale v' and each guided frame row to unit L2 norm after pooling.
  bool renormalize = true;
};

/// Text-guided visual features for one (text, video) pair.
struct GuidedVisual {
  Vec video;   // v', guided by the sentence row
  Mat frames;  // N_t x D, one guided frame per word
  Mat attn;    // (1 + N_t) x N_v softmax weights over valid frames
  Mat pooled;  // (1 + N_t) x D, attn * frames before renormalization
};

/// Stacks the sentence vector over the valid word rows.
Mat concat_text(const TextTokens& t);

/// Softmax attention of every text row over the valid frames, then pooling.
/// `frames` holds only valid rows; padding never enters the softmax.
GuidedVisual glim_attend(const Mat& text_rows, const Mat& frames, const GlimConfig& cfg = {});
GuidedVisual glim_attend(const Mat& text_rows, const VideoTokens& video, const GlimConfig& cfg = {});

struct GlimGrad {
  Mat d_text_rows;
  Mat d_frames;
};

/// Reverse pass of glim_attend given upstream gradients for v' and the guided frames.
GlimGrad glim_attend_backward(const Mat& text_rows, const Mat& frames, const GlimConfig& cfg,
                              const GuidedVisual& fwd, const Vec& d_video, const Mat& d_guided);

/// GLIM owns no trainable tensors.
inline constexpr std::size_t kGlimParamCount = 0;

}  // namespace glccl
