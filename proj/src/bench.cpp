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

#include "glccl/bench.hpp"

#include <algorithm>
#include <chrono>
#include <vector>

#include "glccl/glim.hpp"
#include "glccl/model.hpp"
#include "glccl/temporal.hpp"

namespace glccl {

const char* to_string(Component c) {
  switch (c) {
    case Component::glim: return "glim";
    case Component::scoring: return "scoring";
    case Component::cross_attention_baseline: return "cross_attention_baseline";
    case Component::projection_heads: return "projection_heads";
    case Component::temporal_encoder: return "temporal_encoder";
  }
  return "?";
}

Component parse_component(const std::string& s) {
  for (Component c : {Component::glim, Component::scoring, Component::cross_attention_baseline,
                      Component::projection_heads, Component::temporal_encoder}) {
    if (s == to_string(c)) return c;
  }
  throw ConfigError("unknown component '" + s + "'");
}

std::int64_t count_params(Component c, const ParamShape& s) {
  const std::int64_t d = s.dim;
  switch (c) {
    case Component::glim:
    case Component::scoring:
      return static_cast<std::int64_t>(kGlimParamCount);
    case Component::cross_attention_baseline:
      return 4 * d * d + 4 * d;
    case Component::projection_heads:
      return 2 * std::int64_t{s.input_dim} * d;
    case Component::temporal_encoder: {
      const std::int64_t h = std::int64_t{s.ffn_mult} * d;
      // LN1, Q/K/V/O with biases, LN2, two feed-forward layers with biases.
      const std::int64_t block = 2 * d + 4 * d * d + 4 * d + 2 * d + d * h + h + h * d + d;
      return std::int64_t{s.n_v_max} * d + s.temporal_depth * block;
    }
  }
  return 0;
}

namespace {

std::int64_t matmul(std::int64_t m, std::int64_t k, std::int64_t n) { return 2 * m * k * n; }
std::int64_t softmax(std::int64_t n) { return 5 * n; }
std::int64_t dot(std::int64_t d) { return 2 * d; }
std::int64_t renorm(std::int64_t d) { return 3 * d + 1; }
// softmax(s) . s over n entries.
std::int64_t weighted(std::int64_t n) { return softmax(n) + dot(n); }

std::int64_t glim_flops(std::int64_t nt, std::int64_t nv, std::int64_t d) {
  const std::int64_t rows = 1 + nt;
  return matmul(rows, d, nv)          // text rows x frames^T
         + rows * nv                  // temperature division
         + rows * softmax(nv)         // per-row softmax
         + matmul(rows, nv, d)        // weights x frames
         + rows * renorm(d);          // unit-normalize pooled rows
}

std::int64_t grain_flops(std::int64_t nt, std::int64_t d) {
  const std::int64_t vs = dot(d);
  const std::int64_t vw = nt * dot(d) + weighted(nt);
  const std::int64_t sf = nt * dot(d) + weighted(nt);
  const std::int64_t fw = matmul(nt, d, nt) + 2 * (nt * weighted(nt) + weighted(nt)) + 2;
  return vs + vw + sf + fw;
}

std::int64_t baseline_flops(std::int64_t nv, std::int64_t d) {
  return matmul(1, d, d) + d                   // query projection + bias
         + 2 * (matmul(nv, d, d) + nv * d)     // keys and values + biases
         + nv * dot(d) + nv                    // logits and 1/sqrt(D) scaling
         + softmax(nv)                         // attention weights
         + matmul(1, nv, d)                    // pooling
         + matmul(1, d, d) + d                 // output projection + bias
         + renorm(d) + dot(d);                 // cosine with the sentence
}

}  // namespace

std::int64_t count_flops(const FlopShape& s, Component c) {
  if (s.batch < 1 || s.n_t < 1 || s.n_v < 1 || s.dim < 1) {
    throw ConfigError("count_flops: every dimension must be positive");
  }
  const std::int64_t nt = s.n_t, nv = s.n_v, d = s.dim;
  std::int64_t per_pair = 0;
  switch (c) {
    case Component::glim: per_pair = glim_flops(nt, nv, d); break;
    case Component::scoring:
      // Four grains, then the mean of four: four adds and a divide.
      per_pair = glim_flops(nt, nv, d) + grain_flops(nt, d) + 4 + 1;
      break;
    case Component::cross_attention_baseline: per_pair = baseline_flops(nv, d); break;
    default: throw ConfigError(std::string("count_flops: no FLOP model for ") + to_string(c));
  }
  return per_pair * s.batch;
}

CostReport time_scoring(const Corpus& corpus, int reps, Component c, const ScoreConfig& cfg,
                        int warmup, std::uint64_t seed) {
  if (reps < 5) throw ConfigError("time_scoring: reps must be >= 5");
  if (corpus.size() == 0) throw DataError("time_scoring: empty corpus");
  if (c != Component::scoring && c != Component::glim && c != Component::cross_attention_baseline) {
    throw ConfigError(std::string("time_scoring: cannot time ") + to_string(c));
  }
  const Corpus data = normalize_corpus(corpus.aligned());
  const auto baseline = CrossAttentionBaseline::initialized(data.dim, seed);

  std::vector<Mat> words, frames;
  for (const auto& t : data.texts) words.emplace_back(t.valid_words());
  for (const auto& v : data.videos) frames.emplace_back(v.valid_frames());

  double sink = 0.0;
  auto one_pass = [&] {
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t j = 0; j < data.size(); ++j) {
        switch (c) {
          case Component::scoring:
            sink += score_pair(data.texts[i].sentence, words[i], frames[j], cfg).aggregate;
            break;
          case Component::glim: {
            Mat rows(1 + words[i].rows(), data.dim);
            rows.row(0) = data.texts[i].sentence.transpose();
            rows.bottomRows(words[i].rows()) = words[i];
            sink += glim_attend(rows, frames[j], cfg.glim).video[0];
            break;
          }
          default: sink += baseline.score(data.texts[i].sentence, frames[j]); break;
        }
      }
    }
  };

  for (int w = 0; w < warmup; ++w) one_pass();
  std::vector<double> per_query;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    one_pass();
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    per_query.push_back(ms / static_cast<double>(data.size()));
  }
  if (!std::isfinite(sink)) throw NumericError("time_scoring: non-finite scores");

  CostReport rep;
  rep.component = to_string(c);
  ParamShape ps;
  ps.dim = ps.input_dim = data.dim;
  ps.n_v_max = data.n_v_max;
  rep.params = count_params(c, ps);
  rep.flops = count_flops({static_cast<int>(data.size()), data.n_t_max, data.n_v_max, data.dim},
                          c);
  rep.reps = reps;
  rep.queries = data.size();
  rep.gallery = data.size();
  double sum = 0.0;
  for (double x : per_query) sum += x;
  rep.per_query_ms.mean = sum / reps;
  std::sort(per_query.begin(), per_query.end());
  auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * per_query.size())) - 1;
    return per_query[std::min(idx, per_query.size() - 1)];
  };
  rep.per_query_ms.p50 = quantile(0.5);
  rep.per_query_ms.p95 = quantile(0.95);
  return rep;
}

}  // namespace glccl
