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

// Straight-line reference for guided attention, the four grains and the
// aggregate, written over nested std::vector with explicit loops. It shares
// no code with the library. The scalar type is a template parameter so the
// same routine can run on Counted to tally arithmetic operations.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace oracle {

template <typename T>
using Rows = std::vector<std::vector<T>>;

// Scalar that counts every arithmetic operation and comparison.
struct Counted {
  double v = 0;
  static inline std::int64_t ops = 0;

  Counted() = default;
  Counted(double x) : v(x) {}  // NOLINT: implicit on purpose

  friend Counted operator+(Counted a, Counted b) { ++ops; return a.v + b.v; }
  friend Counted operator-(Counted a, Counted b) { ++ops; return a.v - b.v; }
  friend Counted operator*(Counted a, Counted b) { ++ops; return a.v * b.v; }
  friend Counted operator/(Counted a, Counted b) { ++ops; return a.v / b.v; }
  friend bool operator>(Counted a, Counted b) { ++ops; return a.v > b.v; }
};

inline double value(double x) { return x; }
inline double value(Counted x) { return x.v; }
inline double exp_of(double x) { return std::exp(x); }
inline Counted exp_of(Counted x) { ++Counted::ops; return std::exp(x.v); }
inline double sqrt_of(double x) { return std::sqrt(x); }
inline Counted sqrt_of(Counted x) { ++Counted::ops; return std::sqrt(x.v); }

template <typename T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  T acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc = acc + a[i] * b[i];
  return acc;
}

// max, shift, exp, sum, divide: five operations per entry.
template <typename T>
std::vector<T> softmax(const std::vector<T>& x) {
  T mx = -std::numeric_limits<double>::infinity();
  for (const T& e : x) {
    if (e > mx) mx = e;
  }
  std::vector<T> p(x.size());
  T sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = exp_of(x[i] - mx);
    sum = sum + p[i];
  }
  for (auto& e : p) e = e / sum;
  return p;
}

template <typename T>
T weighted(const std::vector<T>& s) {
  return dot(softmax(s), s);
}

template <typename T>
void unit(std::vector<T>& x) {
  T sq = 0.0;
  for (const T& e : x) sq = sq + e * e;
  const T n = sqrt_of(sq);
  for (auto& e : x) e = e / n;
}

template <typename T>
struct Guided {
  std::vector<T> video;
  Rows<T> frames;
  Rows<double> attn;
};

// text = sentence followed by words; frames = valid frames only.
template <typename T>
Guided<T> attend(const Rows<T>& text, const Rows<T>& frames, double temperature, bool renormalize) {
  const std::size_t d = frames[0].size();
  Guided<T> g;
  for (std::size_t r = 0; r < text.size(); ++r) {
    std::vector<T> logits(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
      T acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc = acc + text[r][k] * frames[f][k];
      logits[f] = acc / T(temperature);
    }
    const auto w = softmax(logits);
    std::vector<T> pooled(d);
    for (std::size_t k = 0; k < d; ++k) {
      T acc = 0.0;
      for (std::size_t f = 0; f < frames.size(); ++f) acc = acc + w[f] * frames[f][k];
      pooled[k] = acc;
    }
    if (renormalize) unit(pooled);
    std::vector<double> wd;
    for (const T& e : w) wd.push_back(value(e));
    g.attn.push_back(wd);
    if (r == 0) {
      g.video = pooled;
    } else {
      g.frames.push_back(pooled);
    }
  }
  return g;
}

template <typename T>
struct Scores {
  T vs, vw, sf, fw, aggregate;
};

struct Mask {
  bool vs = true, vw = true, sf = true, fw = true;
};

template <typename T>
Scores<T> score(const std::vector<T>& sentence, const Rows<T>& words, const Rows<T>& frames,
                double temperature = 1.0, bool renormalize = true, Mask mask = {}) {
  Rows<T> text{sentence};
  for (const auto& w : words) text.push_back(w);
  const auto g = attend(text, frames, temperature, renormalize);
  const std::size_t nt = words.size();
  Scores<T> s;
  s.vs = dot(g.video, sentence);
  std::vector<T> vw(nt), sf(nt);
  for (std::size_t i = 0; i < nt; ++i) vw[i] = dot(words[i], g.video);
  for (std::size_t i = 0; i < nt; ++i) sf[i] = dot(g.frames[i], sentence);
  s.vw = weighted(vw);
  s.sf = weighted(sf);
  Rows<T> m(nt, std::vector<T>(nt));
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      T acc = 0.0;
      for (std::size_t k = 0; k < sentence.size(); ++k) acc = acc + g.frames[i][k] * words[j][k];
      m[i][j] = acc;
    }
  }
  std::vector<T> per_frame(nt), per_word(nt);
  for (std::size_t i = 0; i < nt; ++i) per_frame[i] = weighted(m[i]);
  for (std::size_t j = 0; j < nt; ++j) {
    std::vector<T> col(nt);
    for (std::size_t i = 0; i < nt; ++i) col[i] = m[i][j];
    per_word[j] = weighted(col);
  }
  s.fw = (weighted(per_frame) + weighted(per_word)) / T(2.0);
  T sum = 0.0;
  int n = 0;
  if (mask.vs) { sum = sum + s.vs; ++n; }
  if (mask.vw) { sum = sum + s.vw; ++n; }
  if (mask.sf) { sum = sum + s.sf; ++n; }
  if (mask.fw) { sum = sum + s.fw; ++n; }
  s.aggregate = sum / T(static_cast<double>(n));
  return s;
}

}  // namespace oracle
