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
#include <filesystem>
#include <string>
#include <vector>

#include "glccl/types.hpp"

namespace glccl {

/// One caption: its sentence ([EOS]) vector and per-word token matrix.
/// Rows of `words` at or beyond `word_count` are padding and are zero.
struct TextTokens {
  std::string id;
  Vec sentence;
  Mat words;
  int word_count = 0;

  int dim() const { return static_cast<int>(sentence.size()); }
  auto valid_words() const { return words.topRows(word_count); }
};

/// One video: per-frame token matrix; rows at or beyond `frame_count` are padding.
struct VideoTokens {
  std::string id;
  Mat frames;
  int frame_count = 0;

  int dim() const { return static_cast<int>(frames.cols()); }
  auto valid_frames() const { return frames.topRows(frame_count); }
};

/// A paired text/video collection. `pairing[i]` is the video index matched
/// with text i; it is a bijection.
struct Corpus {
  int dim = 0;
  int n_t_max = 0;
  int n_v_max = 0;
  std::vector<TextTokens> texts;
  std::vector<VideoTokens> videos;
  std::vector<std::size_t> pairing;

  std::size_t size() const { return texts.size(); }
  /// Reorders videos so that video i is the match of text i.
  Corpus aligned() const;
  /// Subset of aligned pairs, in the order given.
  Corpus select(const std::vector<std::size_t>& pair_indices) const;
  void validate() const;
};

// ---------------------------------------------------------------------------
// Blob format: "GLCC", u32 version (1), u32 rows, u32 dim, rows*dim LE binary32.

inline constexpr std::uint32_t kBlobVersion = 1;

void write_blob(const std::filesystem::path& path, const Mat& rows);
Mat read_blob(const std::filesystem::path& path);

/// Reads a manifest and every blob it references.
Corpus load_corpus(const std::filesystem::path& manifest_path);
/// Writes `manifest.json` plus one blob per item under `dir/blobs/`.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

/// Rescales every valid sentence, word and frame row to unit L2 norm.
/// Throws DataError naming the item when a valid row has zero norm.
Corpus normalize_corpus(Corpus corpus);

/// Normalizes the rows of `m` in place; returns false on a zero-norm row.
bool normalize_rows(Eigen::Ref<Mat> m);

// ---------------------------------------------------------------------------
// Synthetic "partially relevant" corpus.

struct GenConfig {
  int num_items = 320;
  int dim = 32;
  int topics = 16;
  int relevant = 2;
  int n_t = 4;
  int n_v = 6;
  double sigma = 0.05;
  // Bumped whenever the sampling procedure changes.
  int version = 1;
};

/// Ground truth the generator used; kept out of Corpus so scoring never sees it.
struct GenTrace {
  Mat topics;                                      // K x D, unit rows
  std::vector<std::vector<int>> relevant_topics;   // per item
  std::vector<std::vector<int>> relevant_frames;   // frame rows holding relevant topics
};

void validate(const GenConfig& cfg);
Corpus gen_synthetic(const GenConfig& cfg, std::uint64_t seed, GenTrace* trace = nullptr);

}  // namespace glccl
