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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <set>

#include "glccl/features.hpp"

namespace fs = std::filesystem;
using namespace glccl;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("glccl_features_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Mat random_mat(int rows, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(-2.f, 2.f);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace

TEST(Blob, HeaderLayoutIsLittleEndian) {
  const auto dir = scratch("header");
  Mat m(1, 2);
  m << 1.0, -2.0;
  write_blob(dir / "x.glcc", m);
  const std::string bytes = slurp(dir / "x.glcc");
  ASSERT_EQ(bytes.size(), 16u + 8u);
  EXPECT_EQ(bytes.substr(0, 4), "GLCC");
  const unsigned char expect_header[12] = {1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0};
  for (int i = 0; i < 12; ++i) EXPECT_EQ(static_cast<unsigned char>(bytes[4 + i]), expect_header[i]);
  // 1.0f = 0x3f800000, -2.0f = 0xc0000000
  const unsigned char expect_data[8] = {0, 0, 0x80, 0x3f, 0, 0, 0, 0xc0};
  for (int i = 0; i < 8; ++i) EXPECT_EQ(static_cast<unsigned char>(bytes[16 + i]), expect_data[i]);
}

TEST(Blob, RoundTripIsExactForFloatValues) {
  const auto dir = scratch("roundtrip");
  const Mat m = random_mat(5, 7, 3);
  write_blob(dir / "a.glcc", m);
  const Mat back = read_blob(dir / "a.glcc");
  ASSERT_EQ(back.rows(), 5);
  ASSERT_EQ(back.cols(), 7);
  EXPECT_EQ((back - m).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Blob, RejectsCorruptFiles) {
  const auto dir = scratch("corrupt");
  write_blob(dir / "a.glcc", random_mat(2, 3, 1));
  std::string bytes = slurp(dir / "a.glcc");
  {
    std::ofstream out(dir / "trunc.glcc", std::ios::binary);
    out << bytes.substr(0, bytes.size() - 1);
  }
  EXPECT_THROW(read_blob(dir / "trunc.glcc"), DataError);
  bytes[0] = 'X';
  {
    std::ofstream out(dir / "magic.glcc", std::ios::binary);
    out << bytes;
  }
  EXPECT_THROW(read_blob(dir / "magic.glcc"), DataError);
  EXPECT_THROW(read_blob(dir / "missing.glcc"), DataError);
}

TEST(Corpus, SaveLoadRoundTripIsBitwise) {
  const auto dir = scratch("corpus");
  GenConfig cfg;
  cfg.num_items = 12;
  const Corpus c = gen_synthetic(cfg, 5);
  save_corpus(c, dir / "a");
  const Corpus back = load_corpus(dir / "a" / "manifest.json");
  save_corpus(back, dir / "b");
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir / "a");
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / rel)) << rel;
  }
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.texts[i].id, c.texts[i].id);
    EXPECT_EQ(back.texts[i].word_count, c.texts[i].word_count);
    EXPECT_EQ((back.videos[i].frames.cast<float>() - c.videos[i].frames.cast<float>()).norm(), 0.f);
  }
}

TEST(Corpus, PaddingIsZeroedOnLoad) {
  const auto dir = scratch("padding");
  Corpus c;
  c.dim = 3;
  c.n_t_max = 4;
  c.n_v_max = 5;
  TextTokens t;
  t.id = "t0";
  t.sentence = Vec::Ones(3);
  t.words = Mat::Zero(4, 3);
  t.words.topRows(2).setOnes();
  t.word_count = 2;
  VideoTokens v;
  v.id = "v0";
  v.frames = Mat::Zero(5, 3);
  v.frames.topRows(3).setOnes();
  v.frame_count = 3;
  c.texts.push_back(t);
  c.videos.push_back(v);
  c.pairing = {0};
  save_corpus(c, dir);
  const Corpus back = load_corpus(dir / "manifest.json");
  ASSERT_EQ(back.texts[0].words.rows(), 4);
  ASSERT_EQ(back.videos[0].frames.rows(), 5);
  EXPECT_EQ(back.texts[0].words.bottomRows(2).norm(), 0.0);
  EXPECT_EQ(back.videos[0].frames.bottomRows(2).norm(), 0.0);
  EXPECT_EQ(back.texts[0].valid_words().rows(), 2);
}

TEST(Corpus, DimensionMismatchNamesTheBlob) {
  const auto dir = scratch("mismatch");
  GenConfig cfg;
  cfg.num_items = 2;
  save_corpus(gen_synthetic(cfg, 1), dir);
  write_blob(dir / "blobs" / "video_00001.glcc", Mat::Ones(6, 16));
  try {
    load_corpus(dir / "manifest.json");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("video_00001.glcc"), std::string::npos) << e.what();
  }
}

TEST(Corpus, RowCountBeyondMaximumIsRejected) {
  const auto dir = scratch("overflow");
  GenConfig cfg;
  cfg.num_items = 2;
  save_corpus(gen_synthetic(cfg, 1), dir);
  write_blob(dir / "blobs" / "video_00000.glcc", Mat::Ones(7, 32));
  EXPECT_THROW(load_corpus(dir / "manifest.json"), DataError);
}

TEST(Corpus, MalformedManifestIsDataError) {
  const auto dir = scratch("malformed");
  {
    std::ofstream out(dir / "manifest.json");
    out << "{ not json";
  }
  EXPECT_THROW(load_corpus(dir / "manifest.json"), DataError);
  EXPECT_THROW(load_corpus(dir / "absent.json"), DataError);
}

TEST(Corpus, AlignedReordersVideosByPairing) {
  GenConfig cfg;
  cfg.num_items = 4;
  Corpus c = gen_synthetic(cfg, 2);
  std::swap(c.videos[0], c.videos[3]);
  c.pairing = {3, 1, 2, 0};
  const Corpus a = c.aligned();
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a.pairing[i], i);
    EXPECT_EQ(a.videos[i].id, c.videos[c.pairing[i]].id);
  }
}

TEST(Normalize, RowsBecomeUnitAndIsIdempotent) {
  GenConfig cfg;
  cfg.num_items = 6;
  Corpus c = gen_synthetic(cfg, 4);
  for (auto& t : c.texts) t.words *= 3.0;
  const Corpus once = normalize_corpus(c);
  const Corpus twice = normalize_corpus(once);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_NEAR(once.texts[i].sentence.norm(), 1.0, 1e-15);
    for (int r = 0; r < once.texts[i].word_count; ++r) {
      EXPECT_NEAR(once.texts[i].words.row(r).norm(), 1.0, 1e-15);
    }
    EXPECT_LE((twice.texts[i].words - once.texts[i].words).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((twice.videos[i].frames - once.videos[i].frames).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Normalize, ZeroRowNamesTheItem) {
  GenConfig cfg;
  cfg.num_items = 3;
  Corpus c = gen_synthetic(cfg, 4);
  c.videos[2].frames.row(1).setZero();
  try {
    normalize_corpus(c);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(c.videos[2].id), std::string::npos);
  }
}

TEST(Generator, NoiselessSingleTopicCollapsesToTheTopic) {
  GenConfig cfg;
  cfg.num_items = 5;
  cfg.relevant = 1;
  cfg.n_t = 1;
  cfg.n_v = 1;
  cfg.topics = 4;
  cfg.sigma = 0.0;
  GenTrace trace;
  const Corpus c = gen_synthetic(cfg, 9, &trace);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec topic = trace.topics.row(trace.relevant_topics[i][0]).transpose();
    EXPECT_LE((c.texts[i].sentence - topic).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((c.texts[i].words.row(0).transpose() - topic).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((c.videos[i].frames.row(0).transpose() - topic).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Generator, SameSeedGivesByteIdenticalCorpora) {
  const auto dir = scratch("determinism");
  GenConfig cfg;
  cfg.num_items = 20;
  save_corpus(gen_synthetic(cfg, 11), dir / "a");
  save_corpus(gen_synthetic(cfg, 11), dir / "b");
  save_corpus(gen_synthetic(cfg, 12), dir / "c");
  EXPECT_EQ(slurp(dir / "a" / "manifest.json"), slurp(dir / "b" / "manifest.json"));
  EXPECT_EQ(slurp(dir / "a" / "blobs" / "video_00007.glcc"), slurp(dir / "b" / "blobs" / "video_00007.glcc"));
  EXPECT_NE(slurp(dir / "a" / "blobs" / "video_00007.glcc"), slurp(dir / "c" / "blobs" / "video_00007.glcc"));
}

TEST(Generator, NearestSentenceRecoversPairsFromRelevantFrames) {
  GenConfig cfg;
  cfg.num_items = 64;
  GenTrace trace;
  const Corpus c = gen_synthetic(cfg, 21, &trace);
  int hits = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    Vec mean = Vec::Zero(cfg.dim);
    for (int r : trace.relevant_frames[i]) mean += c.videos[i].frames.row(r).transpose();
    mean.normalize();
    std::size_t best = 0;
    double best_score = -2.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      const double s = c.texts[j].sentence.dot(mean);
      if (s > best_score) {
        best_score = s;
        best = j;
      }
    }
    hits += best == i;
  }
  EXPECT_GE(hits, 61) << "recovered " << hits << " of 64";
}

TEST(Generator, RelevantRowsAreTopicsAndTheRestAreDistractors) {
  GenConfig cfg;
  cfg.num_items = 10;
  cfg.sigma = 0.0;
  GenTrace trace;
  const Corpus c = gen_synthetic(cfg, 3, &trace);
  auto topic_of = [&](const Eigen::Ref<const Vec>& row) {
    for (int k = 0; k < cfg.topics; ++k) {
      if ((trace.topics.row(k).transpose() - row).norm() < 1e-12) return k;
    }
    return -1;
  };
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::set<int> relevant(trace.relevant_topics[i].begin(), trace.relevant_topics[i].end());
    ASSERT_EQ(relevant.size(), static_cast<std::size_t>(cfg.relevant));
    std::multiset<int> frame_topics, word_topics;
    for (int f = 0; f < cfg.n_v; ++f) frame_topics.insert(topic_of(c.videos[i].frames.row(f).transpose()));
    for (int w = 0; w < cfg.n_t; ++w) word_topics.insert(topic_of(c.texts[i].words.row(w).transpose()));
    for (int k : relevant) {
      EXPECT_EQ(frame_topics.count(k), 1u);
      EXPECT_EQ(word_topics.count(k), 1u);
    }
    EXPECT_EQ(frame_topics.count(-1), static_cast<std::size_t>(cfg.n_v - cfg.relevant));
    EXPECT_EQ(word_topics.count(-1), static_cast<std::size_t>(cfg.n_t - cfg.relevant));
    for (int r : trace.relevant_frames[i]) {
      EXPECT_TRUE(relevant.count(topic_of(c.videos[i].frames.row(r).transpose())));
    }
    Vec mean = Vec::Zero(cfg.dim);
    for (int k : relevant) mean += trace.topics.row(k).transpose();
    EXPECT_LE((c.texts[i].sentence - mean.normalized()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Generator, RelevantSubsetsDoNotRepeatWithinACycle) {
  GenConfig cfg;
  cfg.num_items = 120;  // C(16, 2)
  GenTrace trace;
  gen_synthetic(cfg, 8, &trace);
  std::set<std::vector<int>> seen;
  for (auto s : trace.relevant_topics) {
    std::sort(s.begin(), s.end());
    EXPECT_TRUE(seen.insert(s).second);
  }
}

TEST(Generator, InvalidConfigsAreRejected) {
  GenConfig cfg;
  cfg.topics = 3;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = {};
  cfg.relevant = 5;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = {};
  cfg.topics = 6;
  cfg.relevant = 4;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = {};
  cfg.sigma = -1;
  EXPECT_THROW(validate(cfg), ConfigError);
}
