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

#include "glccl/scoring.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace glccl {

const char* to_string(Grain g) {
  switch (g) {
    case Grain::vs: return "vs";
    case Grain::vw: return "vw";
    case Grain::sf: return "sf";
    case Grain::fw: return "fw";
  }
  return "?";
}

bool GrainSet::has(Grain g) const {
  switch (g) {
    case Grain::vs: return vs;
    case Grain::vw: return vw;
    case Grain::sf: return sf;
    case Grain::fw: return fw;
  }
  return false;
}

double GrainScores::get(Grain g) const {
  switch (g) {
    case Grain::vs: return vs;
    case Grain::vw: return vw;
    case Grain::sf: return sf;
    case Grain::fw: return fw;
  }
  return 0.0;
}

const Mat& ScoreTensors::grain(Grain g) const {
  switch (g) {
    case Grain::vs: return vs;
    case Grain::vw: return vw;
    case Grain::sf: return sf;
    case Grain::fw: break;
  }
  return fw;
}

Mat& ScoreTensors::grain(Grain g) {
  return const_cast<Mat&>(static_cast<const ScoreTensors&>(*this).grain(g));
}

double weighted_combination(const Eigen::Ref<const Vec>& s) {
  const double mx = s.maxCoeff();
  const Vec e = (s.array() - mx).exp();
  return e.dot(s) / e.sum();
}

Vec weighted_combination_grad(const Eigen::Ref<const Vec>& s) {
  const double mx = s.maxCoeff();
  Vec p = (s.array() - mx).exp();
  p /= p.sum();
  const double f = p.dot(s);
  return p.array() * (1.0 + s.array() - f);
}

double score_vs(const Vec& guided_video, const Vec& sentence) {
  if (guided_video.size() != sentence.size()) throw DataError("score_vs: dimension mismatch");
  return guided_video.dot(sentence);
}

double score_vw(const Vec& guided_video, const Mat& words) {
  if (words.rows() < 1) throw DataError("score_vw: no words");
  if (words.cols() != guided_video.size()) throw DataError("score_vw: dimension mismatch");
  return weighted_combination(words * guided_video);
}

double score_sf(const Mat& guided_frames, const Vec& sentence) {
  if (guided_frames.rows() < 1) throw DataError("score_sf: no guided frames");
  if (guided_frames.cols() != sentence.size()) throw DataError("score_sf: dimension mismatch");
  return weighted_combination(guided_frames * sentence);
}

double score_fw(const Mat& guided_frames, const Mat& words, FrameWordTrace* trace) {
  if (guided_frames.rows() < 1 || words.rows() < 1) throw DataError("score_fw: no words");
  if (guided_frames.cols() != words.cols()) throw DataError("score_fw: dimension mismatch");
  const Mat m = guided_frames * words.transpose();
  Vec over_words(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) over_words[i] = weighted_combination(m.row(i).transpose());
  Vec over_frames(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) over_frames[j] = weighted_combination(m.col(j));
  const double value = (weighted_combination(over_words) + weighted_combination(over_frames)) / 2.0;
  if (trace) {
    trace->similarity = m;
    trace->over_words = std::move(over_words);
    trace->over_frames = std::move(over_frames);
  }
  return value;
}

double aggregate(const GrainScores& s, const GrainSet& grains) {
  const int n = grains.count();
  if (n == 0) throw ConfigError("no active grains");
  double sum = 0.0;
  for (Grain g : kAllGrains) {
    if (grains.has(g)) sum += s.get(g);
  }
  return sum / n;
}

namespace {

Mat stack_text(const Vec& sentence, const Mat& words) {
  Mat rows(1 + words.rows(), words.cols());
  rows.row(0) = sentence.transpose();
  rows.bottomRows(words.rows()) = words;
  return rows;
}

}  // namespace

GrainScores score_pair(const Vec& sentence, const Mat& words, const Mat& frames,
                       const ScoreConfig& cfg) {
  if (words.rows() < 1) throw DataError("score_pair: text has no words");
  const GuidedVisual gv = glim_attend(stack_text(sentence, words), frames, cfg.glim);
  GrainScores s;
  s.vs = score_vs(gv.video, sentence);
  s.vw = score_vw(gv.video, words);
  s.sf = score_sf(gv.frames, sentence);
  s.fw = score_fw(gv.frames, words);
  s.aggregate = aggregate(s, cfg.grains);
  return s;
}

GrainScores score_pair(const TextTokens& t, const VideoTokens& v, const ScoreConfig& cfg) {
  return score_pair(t.sentence, Mat(t.valid_words()), Mat(v.valid_frames()), cfg);
}

ScoreTensors score_matrix(std::span<const TextTokens> texts, std::span<const VideoTokens> videos,
                          const ScoreConfig& cfg) {
  if (texts.empty() || videos.empty()) throw DataError("score_matrix: empty batch");
  if (cfg.tile_size < 1) throw ConfigError("score_matrix: tile_size must be positive");
  const auto rows = static_cast<Eigen::Index>(texts.size());
  const auto cols = static_cast<Eigen::Index>(videos.size());
  ScoreTensors out;
  for (Grain g : kAllGrains) out.grain(g) = Mat::Zero(rows, cols);
  out.aggregate = Mat::Zero(rows, cols);

  std::vector<Mat> frames;
  frames.reserve(videos.size());
  for (const auto& v : videos) frames.emplace_back(v.valid_frames());

  struct Tile {
    Eigen::Index r0, r1, c0, c1;
  };
  std::vector<Tile> tiles;
  const Eigen::Index ts = cfg.tile_size;
  for (Eigen::Index r0 = 0; r0 < rows; r0 += ts) {
    for (Eigen::Index c0 = 0; c0 < cols; c0 += ts) {
      tiles.push_back({r0, std::min(rows, r0 + ts), c0, std::min(cols, c0 + ts)});
    }
  }

  // Every entry is computed independently and written to its own slot, so
  // the result does not depend on tiling or thread count.
  auto run_tile = [&](const Tile& tile) {
    for (Eigen::Index i = tile.r0; i < tile.r1; ++i) {
      const Mat words(texts[i].valid_words());
      for (Eigen::Index j = tile.c0; j < tile.c1; ++j) {
        const GrainScores s = score_pair(texts[i].sentence, words, frames[j], cfg);
        out.vs(i, j) = s.vs;
        out.vw(i, j) = s.vw;
        out.sf(i, j) = s.sf;
        out.fw(i, j) = s.fw;
        out.aggregate(i, j) = s.aggregate;
      }
    }
  };

  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(tiles.size())));
  if (threads == 1) {
    for (const auto& t : tiles) run_tile(t);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t k = w; k < tiles.size(); k += threads) run_tile(tiles[k]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

VecGradPair score_vs_backward(const Vec& guided_video, const Vec& sentence, double upstream) {
  return {upstream * sentence, upstream * guided_video};
}

VecMatGrad score_vw_backward(const Vec& guided_video, const Mat& words, double upstream) {
  const Vec ds = upstream * weighted_combination_grad(words * guided_video);
  return {words.transpose() * ds, ds * guided_video.transpose()};
}

VecMatGrad score_sf_backward(const Mat& guided_frames, const Vec& sentence, double upstream) {
  const Vec ds = upstream * weighted_combination_grad(guided_frames * sentence);
  return {guided_frames.transpose() * ds, ds * sentence.transpose()};
}

MatMatGrad score_fw_backward(const Mat& guided_frames, const Mat& words, double upstream) {
  FrameWordTrace tr;
  score_fw(guided_frames, words, &tr);
  const Mat& m = tr.similarity;
  Mat dm = Mat::Zero(m.rows(), m.cols());

  const Vec d_over_words = (0.5 * upstream) * weighted_combination_grad(tr.over_words);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    dm.row(i) += d_over_words[i] * weighted_combination_grad(m.row(i).transpose()).transpose();
  }
  const Vec d_over_frames = (0.5 * upstream) * weighted_combination_grad(tr.over_frames);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    dm.col(j) += d_over_frames[j] * weighted_combination_grad(m.col(j));
  }
  return {dm * words, dm.transpose() * guided_frames};
}

PairGrad score_pair_backward(const Vec& sentence, const Mat& words, const Mat& frames,
                             const ScoreConfig& cfg, const GrainScores& upstream) {
  const Mat text_rows = stack_text(sentence, words);
  const GuidedVisual gv = glim_attend(text_rows, frames, cfg.glim);

  PairGrad g;
  g.d_sentence = Vec::Zero(sentence.size());
  g.d_words = Mat::Zero(words.rows(), words.cols());
  Vec d_video = Vec::Zero(sentence.size());
  Mat d_guided = Mat::Zero(gv.frames.rows(), gv.frames.cols());

  if (upstream.vs != 0.0) {
    const auto d = score_vs_backward(gv.video, sentence, upstream.vs);
    d_video += d.d_a;
    g.d_sentence += d.d_b;
  }
  if (upstream.vw != 0.0) {
    const auto d = score_vw_backward(gv.video, words, upstream.vw);
    d_video += d.d_vec;
    g.d_words += d.d_mat;
  }
  if (upstream.sf != 0.0) {
    const auto d = score_sf_backward(gv.frames, sentence, upstream.sf);
    g.d_sentence += d.d_vec;
    d_guided += d.d_mat;
  }
  if (upstream.fw != 0.0) {
    const auto d = score_fw_backward(gv.frames, words, upstream.fw);
    d_guided += d.d_a;
    g.d_words += d.d_b;
  }

  const GlimGrad dg = glim_attend_backward(text_rows, frames, cfg.glim, gv, d_video, d_guided);
  g.d_sentence += dg.d_text_rows.row(0).transpose();
  g.d_words += dg.d_text_rows.bottomRows(words.rows());
  g.d_frames = dg.d_frames;
  return g;
}

}  // namespace glccl
