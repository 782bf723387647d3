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

#include "glccl/features.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"

namespace glccl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 4> kMagic = {'G', 'L', 'C', 'C'};

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  v = to_le(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return to_le(v);
}

}  // namespace

void write_blob(const fs::path& path, const Mat& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write blob " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kBlobVersion);
  put_u32(out, static_cast<std::uint32_t>(rows.rows()));
  put_u32(out, static_cast<std::uint32_t>(rows.cols()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      const auto bits = to_le(std::bit_cast<std::uint32_t>(static_cast<float>(rows(r, c))));
      out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  }
  if (!out) throw DataError("short write on blob " + path.string());
}

Mat read_blob(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing blob file " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError("bad magic in blob " + path.string());
  const auto version = get_u32(in);
  if (version != kBlobVersion) {
    throw DataError("unsupported blob version " + std::to_string(version) + " in " + path.string());
  }
  const auto rows = get_u32(in);
  const auto dim = get_u32(in);
  if (!in) throw DataError("truncated header in blob " + path.string());

  const auto expected = 16 + std::uintmax_t{rows} * dim * 4;
  if (fs::file_size(path) != expected) {
    throw DataError("blob " + path.string() + " size does not match its header (" +
                    std::to_string(rows) + "x" + std::to_string(dim) + ")");
  }
  Mat m(rows, dim);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < dim; ++c) {
      std::uint32_t bits = 0;
      in.read(reinterpret_cast<char*>(&bits), sizeof(bits));
      m(r, c) = static_cast<double>(std::bit_cast<float>(to_le(bits)));
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

void Corpus::validate() const {
  if (dim <= 0) throw DataError("corpus dim must be positive");
  if (texts.size() != videos.size() || pairing.size() != texts.size()) {
    throw DataError("corpus pairing must cover every text and video");
  }
  std::vector<bool> seen(videos.size(), false);
  for (auto p : pairing) {
    if (p >= videos.size() || seen[p]) throw DataError("corpus pairing is not a bijection");
    seen[p] = true;
  }
  for (const auto& t : texts) {
    if (t.sentence.size() != dim || t.words.cols() != dim) {
      throw DataError("dimension mismatch in text " + t.id);
    }
    if (t.word_count < 1 || t.word_count > n_t_max || t.words.rows() != n_t_max) {
      throw DataError("word count out of range in text " + t.id);
    }
  }
  for (const auto& v : videos) {
    if (v.frames.cols() != dim) throw DataError("dimension mismatch in video " + v.id);
    if (v.frame_count < 1 || v.frame_count > n_v_max || v.frames.rows() != n_v_max) {
      throw DataError("frame count out of range in video " + v.id);
    }
  }
}

Corpus Corpus::aligned() const {
  Corpus out = *this;
  for (std::size_t i = 0; i < texts.size(); ++i) out.videos[i] = videos[pairing[i]];
  std::iota(out.pairing.begin(), out.pairing.end(), std::size_t{0});
  return out;
}

Corpus Corpus::select(const std::vector<std::size_t>& pair_indices) const {
  Corpus out;
  out.dim = dim;
  out.n_t_max = n_t_max;
  out.n_v_max = n_v_max;
  for (auto i : pair_indices) {
    if (i >= texts.size()) throw DataError("pair index out of range");
    out.texts.push_back(texts[i]);
    out.videos.push_back(videos[pairing[i]]);
  }
  out.pairing.resize(pair_indices.size());
  std::iota(out.pairing.begin(), out.pairing.end(), std::size_t{0});
  return out;
}

Corpus load_corpus(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("missing manifest " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  const auto base = manifest_path.parent_path();

  Corpus c;
  std::map<std::string, std::size_t> text_index, video_index;
  try {
    c.dim = manifest.at("dim").get<int>();
    c.n_t_max = manifest.at("n_t_max").get<int>();
    c.n_v_max = manifest.at("n_v_max").get<int>();
    if (c.dim <= 0 || c.n_t_max <= 0 || c.n_v_max <= 0) {
      throw DataError("manifest " + manifest_path.string() + ": dim and maxima must be positive");
    }
    for (const auto& item : manifest.at("items")) {
      const auto id = item.at("id").get<std::string>();
      const auto kind = item.at("kind").get<std::string>();
      const auto rows = item.at("rows").get<int>();
      const auto blob_path = base / item.at("blob").get<std::string>();
      Mat m = read_blob(blob_path);
      if (m.cols() != c.dim) {
        throw DataError("dimension mismatch: blob " + blob_path.string() + " has dim " +
                        std::to_string(m.cols()) + ", manifest declares " + std::to_string(c.dim));
      }
      if (m.rows() != rows) {
        throw DataError("row count mismatch between manifest and blob " + blob_path.string());
      }
      if (kind == "text") {
        const int words = rows - 1;
        if (words < 1) throw DataError("text " + id + " has no words");
        if (words > c.n_t_max) {
          throw DataError("text " + id + " has " + std::to_string(words) +
                          " words, above n_t_max " + std::to_string(c.n_t_max));
        }
        TextTokens t;
        t.id = id;
        t.sentence = m.row(0).transpose();
        t.words = Mat::Zero(c.n_t_max, c.dim);
        t.words.topRows(words) = m.bottomRows(words);
        t.word_count = words;
        if (!text_index.emplace(id, c.texts.size()).second) throw DataError("duplicate id " + id);
        c.texts.push_back(std::move(t));
      } else if (kind == "video") {
        if (rows < 1) throw DataError("video " + id + " has no frames");
        if (rows > c.n_v_max) {
          throw DataError("video " + id + " has " + std::to_string(rows) +
                          " frames, above n_v_max " + std::to_string(c.n_v_max));
        }
        VideoTokens v;
        v.id = id;
        v.frames = Mat::Zero(c.n_v_max, c.dim);
        v.frames.topRows(rows) = m;
        v.frame_count = rows;
        if (!video_index.emplace(id, c.videos.size()).second) throw DataError("duplicate id " + id);
        c.videos.push_back(std::move(v));
      } else {
        throw DataError("item " + id + " has unknown kind '" + kind + "'");
      }
    }
    c.pairing.assign(c.texts.size(), c.videos.size());
    for (const auto& pair : manifest.at("pairing")) {
      const auto t = text_index.find(pair.at(0).get<std::string>());
      const auto v = video_index.find(pair.at(1).get<std::string>());
      if (t == text_index.end() || v == video_index.end()) {
        throw DataError("pairing references unknown id in " + manifest_path.string());
      }
      c.pairing[t->second] = v->second;
    }
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  c.validate();
  return c;
}

void save_corpus(const Corpus& corpus, const fs::path& dir) {
  corpus.validate();
  fs::create_directories(dir / "blobs");
  json items = json::array();
  char name[64];
  for (std::size_t i = 0; i < corpus.texts.size(); ++i) {
    const auto& t = corpus.texts[i];
    Mat m(t.word_count + 1, corpus.dim);
    m.row(0) = t.sentence.transpose();
    m.bottomRows(t.word_count) = t.valid_words();
    std::snprintf(name, sizeof(name), "blobs/text_%05zu.glcc", i);
    write_blob(dir / name, m);
    items.push_back({{"id", t.id}, {"kind", "text"}, {"blob", name}, {"rows", m.rows()}});
  }
  for (std::size_t i = 0; i < corpus.videos.size(); ++i) {
    const auto& v = corpus.videos[i];
    std::snprintf(name, sizeof(name), "blobs/video_%05zu.glcc", i);
    write_blob(dir / name, Mat(v.valid_frames()));
    items.push_back({{"id", v.id}, {"kind", "video"}, {"blob", name}, {"rows", v.frame_count}});
  }
  json pairing = json::array();
  for (std::size_t i = 0; i < corpus.texts.size(); ++i) {
    pairing.push_back({corpus.texts[i].id, corpus.videos[corpus.pairing[i]].id});
  }
  json manifest = {{"dim", corpus.dim},
                   {"n_t_max", corpus.n_t_max},
                   {"n_v_max", corpus.n_v_max},
                   {"items", std::move(items)},
                   {"pairing", std::move(pairing)}};
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw DataError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

bool normalize_rows(Eigen::Ref<Mat> m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double n = m.row(r).norm();
    if (!(n > 0.0) || !std::isfinite(n)) return false;
    m.row(r) /= n;
  }
  return true;
}

Corpus normalize_corpus(Corpus corpus) {
  for (auto& t : corpus.texts) {
    const double n = t.sentence.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw DataError("zero-norm sentence in text " + t.id);
    }
    t.sentence /= n;
    if (!normalize_rows(t.words.topRows(t.word_count))) {
      throw DataError("zero-norm word row in text " + t.id);
    }
  }
  for (auto& v : corpus.videos) {
    if (!normalize_rows(v.frames.topRows(v.frame_count))) {
      throw DataError("zero-norm frame row in video " + v.id);
    }
  }
  return corpus;
}

// ---------------------------------------------------------------------------

void validate(const GenConfig& cfg) {
  if (cfg.num_items < 1 || cfg.dim < 1 || cfg.n_t < 1 || cfg.n_v < 1 || cfg.relevant < 1 ||
      !(cfg.sigma >= 0.0) || !std::isfinite(cfg.sigma)) {
    throw ConfigError("generator: num_items, dim, n_t, n_v, relevant must be positive, sigma >= 0");
  }
  if (cfg.topics < 4) throw ConfigError("generator: need at least 4 topics");
  if (cfg.relevant >= cfg.topics) throw ConfigError("generator: relevant must be below topics");
  if (cfg.relevant > std::min(cfg.n_v, cfg.n_t)) {
    throw ConfigError("generator: relevant exceeds the word or frame count");
  }
  if (cfg.topics < 2 * cfg.relevant) {
    throw ConfigError("generator: not enough distractor topics (topics < 2*relevant)");
  }
}

namespace {

double choose_capped(int n, int k, double cap) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > cap) return cap;
  }
  return c;
}

Vec gaussian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v;
}

Vec noised_unit(const Vec& base, double sigma, std::mt19937_64& rng) {
  Vec v = base + sigma * gaussian(static_cast<int>(base.size()), rng);
  const double n = v.norm();
  if (!(n > 0.0)) throw NumericError("generator produced a zero vector");
  return v / n;
}

}  // namespace

Corpus gen_synthetic(const GenConfig& cfg, std::uint64_t seed, GenTrace* trace) {
  validate(cfg);
  std::mt19937_64 rng(seed);

  Mat topics(cfg.topics, cfg.dim);
  for (int k = 0; k < cfg.topics; ++k) {
    Vec g;
    do {
      g = gaussian(cfg.dim, rng);
    } while (!(g.norm() > 0.0));
    topics.row(k) = g.transpose() / g.norm();
  }

  Corpus c;
  c.dim = cfg.dim;
  c.n_t_max = cfg.n_t;
  c.n_v_max = cfg.n_v;
  if (trace) {
    trace->topics = topics;
    trace->relevant_topics.clear();
    trace->relevant_frames.clear();
  }

  // Relevant topic subsets are drawn without repetition until every subset
  // has been used once, then the cycle restarts.
  const double subsets = choose_capped(cfg.topics, cfg.relevant, 1e15);
  std::set<std::vector<int>> used;
  std::vector<int> all_topics(cfg.topics);
  std::iota(all_topics.begin(), all_topics.end(), 0);

  char id[32];
  for (int i = 0; i < cfg.num_items; ++i) {
    if (static_cast<double>(used.size()) >= subsets) used.clear();
    std::vector<int> relevant;
    for (;;) {
      std::vector<int> pool = all_topics;
      std::shuffle(pool.begin(), pool.end(), rng);
      relevant.assign(pool.begin(), pool.begin() + cfg.relevant);
      std::vector<int> key = relevant;
      std::sort(key.begin(), key.end());
      if (used.insert(key).second) break;
    }
    // Distractor content is specific to each item: fresh unit directions
    // unrelated to the topic set, so it never matches another item by topic.
    auto distractor = [&] {
      Vec g;
      do {
        g = gaussian(cfg.dim, rng);
      } while (!(g.norm() > 0.0));
      return Vec(g / g.norm());
    };

    // Video.
    std::vector<int> order(cfg.n_v);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    VideoTokens v;
    std::snprintf(id, sizeof(id), "video_%05d", i);
    v.id = id;
    v.frames = Mat::Zero(cfg.n_v, cfg.dim);
    v.frame_count = cfg.n_v;
    std::vector<int> relevant_rows;
    for (int f = 0; f < cfg.n_v; ++f) {
      const int row = order[f];
      const Vec base = f < cfg.relevant ? Vec(topics.row(relevant[f]).transpose()) : distractor();
      v.frames.row(row) = noised_unit(base, cfg.sigma, rng).transpose();
      if (f < cfg.relevant) relevant_rows.push_back(row);
    }
    std::sort(relevant_rows.begin(), relevant_rows.end());

    // Text.
    TextTokens t;
    std::snprintf(id, sizeof(id), "text_%05d", i);
    t.id = id;
    Vec mean = Vec::Zero(cfg.dim);
    for (int k : relevant) mean += topics.row(k).transpose();
    mean /= mean.norm();
    t.sentence = noised_unit(mean, cfg.sigma, rng);
    std::vector<int> word_order(cfg.n_t);
    std::iota(word_order.begin(), word_order.end(), 0);
    std::shuffle(word_order.begin(), word_order.end(), rng);
    t.words = Mat::Zero(cfg.n_t, cfg.dim);
    t.word_count = cfg.n_t;
    for (int w = 0; w < cfg.n_t; ++w) {
      const Vec base = w < cfg.relevant ? Vec(topics.row(relevant[w]).transpose()) : distractor();
      t.words.row(word_order[w]) = noised_unit(base, cfg.sigma, rng).transpose();
    }

    c.texts.push_back(std::move(t));
    c.videos.push_back(std::move(v));
    c.pairing.push_back(static_cast<std::size_t>(i));
    if (trace) {
      trace->relevant_topics.push_back(relevant);
      trace->relevant_frames.push_back(relevant_rows);
    }
  }
  return c;
}

}  // namespace glccl
