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

#include "glccl/temporal.hpp"
#include "glccl/types.hpp"

namespace glccl {

/// Linear maps applied to every token row (outputs are re-normalized downstream).
struct ProjectionHead {
  Mat text_matrix;   // D_in x D
  Mat video_matrix;  // D_in x D

  int input_dim() const { return static_cast<int>(text_matrix.rows()); }
  int output_dim() const { return static_cast<int>(text_matrix.cols()); }
  std::size_t param_count() const {
    return static_cast<std::size_t>(text_matrix.size() + video_matrix.size());
  }

  /// Rectangular identity on both sides.
  static ProjectionHead identity(int d_in, int d);
  /// Entries ~ N(0, 1/d_in).
  static ProjectionHead random(int d_in, int d, std::uint64_t seed);
};

/// Everything the trainer optimizes.
struct ModelParams {
  ProjectionHead head;
  TemporalEncoder temporal;
  double logit_scale = 100.0;
};

ModelParams zeros_like(const ModelParams& p);

/// A flat view of one tensor's storage, for optimizers and finite differences.
struct TensorRef {
  std::string name;
  double* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
  Eigen::Map<Mat> map() const { return {data, rows, cols}; }
};

/// Trainable tensors in a fixed order. The logit scale is included (as a 1x1
/// tensor) only when `include_scale` is set.
std::vector<TensorRef> trainable_tensors(ModelParams& p, bool include_scale);

/// Parametric language-video attention pooling used as the efficiency baseline:
/// the sentence queries the frames through learned Q/K/V/O projections.
struct CrossAttentionBaseline {
  Mat wq, wk, wv, wo;  // D x D
  Vec bq, bk, bv, bo;

  int dim() const { return static_cast<int>(wq.rows()); }
  std::size_t param_count() const {
    return static_cast<std::size_t>(wq.size() + wk.size() + wv.size() + wo.size() + bq.size() +
                                    bk.size() + bv.size() + bo.size());
  }

  static CrossAttentionBaseline initialized(int dim, std::uint64_t seed);

  /// Cosine between the sentence and the text-conditioned pooled video.
  double score(const Vec& sentence, const Mat& frames) const;
};

}  // namespace glccl
