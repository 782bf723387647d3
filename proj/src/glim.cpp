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

#include "glccl/glim.hpp"

namespace glccl {

Mat concat_text(const TextTokens& t) {
  if (t.word_count < 1) throw DataError("text " + t.id + " has no valid words");
  Mat out(1 + t.word_count, t.dim());
  out.row(0) = t.sentence.transpose();
  out.bottomRows(t.word_count) = t.valid_words();
  return out;
}

GuidedVisual glim_attend(const Mat& text_rows, const Mat& frames, const GlimConfig& cfg) {
  if (frames.rows() < 1) throw DataError("glim_attend: video has no valid frames");
  if (text_rows.rows() < 2) throw DataError("glim_attend: need a sentence row and at least one word");
  if (text_rows.cols() != frames.cols()) throw DataError("glim_attend: dimension mismatch");
  if (!(cfg.temperature > 0.0) || !std::isfinite(cfg.temperature)) {
    throw ConfigError("glim_attend: temperature must be positive");
  }

  GuidedVisual out;
  out.attn = (text_rows * frames.transpose()) / cfg.temperature;
  if (!out.attn.allFinite()) throw NumericError("glim_attend: non-finite logits");
  for (Eigen::Index r = 0; r < out.attn.rows(); ++r) {
    const double mx = out.attn.row(r).maxCoeff();
    out.attn.row(r) = (out.attn.row(r).array() - mx).exp();
    out.attn.row(r) /= out.attn.row(r).sum();
  }
  out.pooled = out.attn * frames;

  Mat guided = out.pooled;
  if (cfg.renormalize && !normalize_rows(guided)) {
    throw NumericError("glim_attend: pooled row has zero norm");
  }
  out.video = guided.row(0).transpose();
  out.frames = guided.bottomRows(guided.rows() - 1);
  return out;
}

GuidedVisual glim_attend(const Mat& text_rows, const VideoTokens& video, const GlimConfig& cfg) {
  return glim_attend(text_rows, Mat(video.valid_frames()), cfg);
}

GlimGrad glim_attend_backward(const Mat& text_rows, const Mat& frames, const GlimConfig& cfg,
                              const GuidedVisual& fwd, const Vec& d_video, const Mat& d_guided) {
  Mat d_pooled(fwd.pooled.rows(), fwd.pooled.cols());
  d_pooled.row(0) = d_video.transpose();
  d_pooled.bottomRows(d_guided.rows()) = d_guided;

  if (cfg.renormalize) {
    for (Eigen::Index r = 0; r < d_pooled.rows(); ++r) {
      const double n = fwd.pooled.row(r).norm();
      const Eigen::RowVectorXd y = fwd.pooled.row(r) / n;
      const double radial = y.dot(d_pooled.row(r));
      d_pooled.row(r) = (d_pooled.row(r) - radial * y) / n;
    }
  }

  GlimGrad g;
  const Mat d_attn = d_pooled * frames.transpose();
  g.d_frames = fwd.attn.transpose() * d_pooled;
  Mat d_logits = fwd.attn.array() * d_attn.array();
  for (Eigen::Index r = 0; r < d_logits.rows(); ++r) {
    const double inner = d_logits.row(r).sum();
    d_logits.row(r) -= fwd.attn.row(r) * inner;
  }
  d_logits /= cfg.temperature;
  g.d_text_rows = d_logits * frames;
  g.d_frames += d_logits.transpose() * text_rows;
  return g;
}

}  // namespace glccl
