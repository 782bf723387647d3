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

#include "glccl/grad.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "glccl/glim.hpp"
#include "glccl/temporal.hpp"

namespace glccl {

Batch make_batch(const Corpus& aligned, std::span<const std::size_t> pair_indices) {
  Batch b;
  for (auto i : pair_indices) {
    if (i >= aligned.size()) throw DataError("batch index out of range");
    b.texts.push_back(aligned.texts[i]);
    b.videos.push_back(aligned.videos[aligned.pairing[i]]);
  }
  return b;
}

namespace {

struct TextCache {
  Vec sentence_raw;  // projected, before normalization
  Mat words_raw;
};

struct VideoCache {
  Mat frames_in;  // valid input frames
  TemporalCache temporal;
  Mat encoded_raw;  // temporal output, before normalization
};

Vec unit(const Vec& v, const std::string& what) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("zero or non-finite norm in " + what);
  return v / n;
}

Mat unit_rows(Mat m, const std::string& what) {
  if (!normalize_rows(m)) throw NumericError("zero or non-finite row norm in " + what);
  return m;
}

// d/dx of x / |x| applied to dy.
Vec unit_backward(const Vec& raw, const Vec& dy) {
  const double n = raw.norm();
  const Vec y = raw / n;
  return (dy - y * y.dot(dy)) / n;
}

Mat unit_rows_backward(const Mat& raw, const Mat& dy) {
  Mat dx(raw.rows(), raw.cols());
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    dx.row(r) = unit_backward(raw.row(r).transpose(), dy.row(r).transpose()).transpose();
  }
  return dx;
}

void check_params(const Batch& batch, const ModelParams& p) {
  if (batch.size() == 0) throw DataError("empty batch");
  if (batch.texts.size() != batch.videos.size()) throw DataError("batch is not paired");
  const int d_in = p.head.input_dim();
  for (const auto& t : batch.texts) {
    if (t.dim() != d_in) throw DataError("text " + t.id + " does not match the head input dim");
  }
  for (const auto& v : batch.videos) {
    if (v.dim() != d_in) throw DataError("video " + v.id + " does not match the head input dim");
  }
  if (p.temporal.dim() != p.head.output_dim()) {
    throw DataError("temporal encoder width differs from the projection output");
  }
}

EncodedBatch encode(const Batch& batch, const ModelParams& p, std::vector<TextCache>* tcache,
                    std::vector<VideoCache>* vcache) {
  check_params(batch, p);
  EncodedBatch out;
  for (const auto& t : batch.texts) {
    TextCache c;
    c.sentence_raw = p.head.text_matrix.transpose() * t.sentence;
    c.words_raw = t.valid_words() * p.head.text_matrix;
    TextTokens e;
    e.id = t.id;
    e.sentence = unit(c.sentence_raw, "sentence of " + t.id);
    e.words = unit_rows(c.words_raw, "words of " + t.id);
    e.word_count = t.word_count;
    out.texts.push_back(std::move(e));
    if (tcache) tcache->push_back(std::move(c));
  }
  for (const auto& v : batch.videos) {
    VideoCache c;
    c.frames_in = v.valid_frames();
    c.encoded_raw = temporal_forward(c.frames_in * p.head.video_matrix, p.temporal,
                                     vcache ? &c.temporal : nullptr);
    VideoTokens e;
    e.id = v.id;
    e.frames = unit_rows(c.encoded_raw, "frames of " + v.id);
    e.frame_count = v.frame_count;
    out.videos.push_back(std::move(e));
    if (vcache) vcache->push_back(std::move(c));
  }
  return out;
}

LossConfig with_scale(const LossConfig& cfg, const ModelParams& p) {
  LossConfig c = cfg;
  c.logit_scale = p.logit_scale;
  return c;
}

}  // namespace

EncodedBatch encode_batch(const Batch& batch, const ModelParams& params) {
  return encode(batch, params, nullptr, nullptr);
}

PipelineOutput pipeline_forward(const Batch& batch, const ModelParams& params,
                                const PipelineConfig& cfg) {
  const EncodedBatch enc = encode(batch, params, nullptr, nullptr);
  PipelineOutput out;
  out.scores = score_matrix(enc.texts, enc.videos, cfg.score);
  out.report = total_loss(out.scores, cfg.score.grains, with_scale(cfg.loss, params));
  return out;
}

const Mat& GradBundle::at(const std::string& name) const {
  for (const auto& g : grads) {
    if (g.name == name) return g.grad;
  }
  throw ConfigError("no gradient named " + name);
}

bool GradBundle::all_finite() const {
  return std::all_of(grads.begin(), grads.end(), [](const auto& g) { return g.grad.allFinite(); });
}

std::vector<TensorRef> input_tensors(Batch& batch) {
  std::vector<TensorRef> out;
  for (std::size_t i = 0; i < batch.texts.size(); ++i) {
    auto& t = batch.texts[i];
    out.push_back({"text" + std::to_string(i) + ".sentence", t.sentence.data(), t.sentence.size(), 1});
    out.push_back({"text" + std::to_string(i) + ".words", t.words.data(), t.words.rows(), t.words.cols()});
  }
  for (std::size_t j = 0; j < batch.videos.size(); ++j) {
    auto& v = batch.videos[j];
    out.push_back({"video" + std::to_string(j) + ".frames", v.frames.data(), v.frames.rows(),
                   v.frames.cols()});
  }
  return out;
}

GradBundle backward(const Batch& batch, const ModelParams& params, const PipelineConfig& cfg,
                    bool input_grads) {
  std::vector<TextCache> tcache;
  std::vector<VideoCache> vcache;
  const EncodedBatch enc = encode(batch, params, &tcache, &vcache);
  const LossConfig loss_cfg = with_scale(cfg.loss, params);
  const ScoreTensors scores = score_matrix(enc.texts, enc.videos, cfg.score);
  const LossReport report = total_loss(scores, cfg.score.grains, loss_cfg);
  const LossGrad lg = total_loss_backward(scores, cfg.score.grains, loss_cfg);

  const auto b = static_cast<Eigen::Index>(batch.size());
  std::vector<Vec> d_sentence(b);
  std::vector<Mat> d_words(b), d_frames(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    d_sentence[i] = Vec::Zero(enc.texts[i].sentence.size());
    d_words[i] = Mat::Zero(enc.texts[i].words.rows(), enc.texts[i].words.cols());
    d_frames[i] = Mat::Zero(enc.videos[i].frames.rows(), enc.videos[i].frames.cols());
  }

  // Fixed accumulation order: texts outer, videos inner.
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      GrainScores up;
      up.vs = lg.d_scores.vs(i, j);
      up.vw = lg.d_scores.vw(i, j);
      up.sf = lg.d_scores.sf(i, j);
      up.fw = lg.d_scores.fw(i, j);
      if (up.vs == 0.0 && up.vw == 0.0 && up.sf == 0.0 && up.fw == 0.0) continue;
      const PairGrad pg = score_pair_backward(enc.texts[i].sentence, enc.texts[i].words,
                                              enc.videos[j].frames, cfg.score, up);
      d_sentence[i] += pg.d_sentence;
      d_words[i] += pg.d_words;
      d_frames[j] += pg.d_frames;
    }
  }

  ModelParams grad = zeros_like(params);
  std::vector<Vec> d_in_sentence(b);
  std::vector<Mat> d_in_words(b), d_in_frames(b);
  const Mat& wt = params.head.text_matrix;
  const Mat& wv = params.head.video_matrix;
  for (Eigen::Index i = 0; i < b; ++i) {
    const Vec ds = unit_backward(tcache[i].sentence_raw, d_sentence[i]);
    grad.head.text_matrix += batch.texts[i].sentence * ds.transpose();
    d_in_sentence[i] = wt * ds;
    const Mat dw = unit_rows_backward(tcache[i].words_raw, d_words[i]);
    grad.head.text_matrix += batch.texts[i].valid_words().transpose() * dw;
    d_in_words[i] = dw * wt.transpose();
  }
  for (Eigen::Index j = 0; j < b; ++j) {
    const Mat de = unit_rows_backward(vcache[j].encoded_raw, d_frames[j]);
    const Mat dproj = temporal_backward(params.temporal, vcache[j].temporal, de, grad.temporal);
    grad.head.video_matrix += vcache[j].frames_in.transpose() * dproj;
    d_in_frames[j] = dproj * wv.transpose();
  }
  grad.logit_scale = lg.d_logit_scale;

  GradBundle out;
  out.loss = report.total;
  out.report = report;
  for (const auto& t : trainable_tensors(grad, cfg.loss.scale_learnable)) {
    out.grads.push_back({t.name, Mat(t.map())});
  }
  if (input_grads) {
    for (Eigen::Index i = 0; i < b; ++i) {
      const auto& t = batch.texts[i];
      out.grads.push_back({"text" + std::to_string(i) + ".sentence", Mat(d_in_sentence[i])});
      Mat w = Mat::Zero(t.words.rows(), t.words.cols());
      w.topRows(t.word_count) = d_in_words[i];
      out.grads.push_back({"text" + std::to_string(i) + ".words", std::move(w)});
    }
    for (Eigen::Index j = 0; j < b; ++j) {
      const auto& v = batch.videos[j];
      Mat f = Mat::Zero(v.frames.rows(), v.frames.cols());
      f.topRows(v.frame_count) = d_in_frames[j];
      out.grads.push_back({"video" + std::to_string(j) + ".frames", std::move(f)});
    }
  }
  for (const auto& g : out.grads) {
    if (!g.grad.allFinite()) throw NumericError("backward: non-finite gradient for " + g.name);
  }
  return out;
}

// ---------------------------------------------------------------------------

FdReport fd_check_tensors(const std::vector<TensorRef>& tensors, const std::vector<const Mat*>& grads,
                          const std::function<double()>& loss, const FdOptions& opt) {
  if (tensors.size() != grads.size()) throw ConfigError("fd_check: tensor/gradient count mismatch");
  if (!(opt.h >= 1e-7 && opt.h <= 1e-4)) throw ConfigError("fd_check: h must lie in [1e-7, 1e-4]");
  FdReport rep;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    const auto& ref = tensors[t];
    const Mat& g = *grads[t];
    if (g.rows() != ref.rows || g.cols() != ref.cols) {
      throw ConfigError("fd_check: gradient shape mismatch for " + ref.name);
    }
    std::vector<Eigen::Index> coords(static_cast<std::size_t>(ref.size()));
    std::iota(coords.begin(), coords.end(), Eigen::Index{0});
    if (static_cast<Eigen::Index>(opt.samples_per_tensor) < ref.size()) {
      std::mt19937_64 rng(opt.seed * 1000003ULL + t);
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(static_cast<std::size_t>(opt.samples_per_tensor));
      std::sort(coords.begin(), coords.end());
    }
    for (auto k : coords) {
      double& x = ref.data[k];
      const double saved = x;
      x = saved + opt.h;
      const double up = loss();
      x = saved - opt.h;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2.0 * opt.h);
      const double analytic = g.data()[k];
      const double err = std::abs(numeric - analytic) / std::max(1.0, std::abs(analytic));
      ++rep.checked;
      if (rep.worst_index < 0 || !(err <= rep.max_rel_err)) {
        rep.max_rel_err = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
        rep.worst_tensor = ref.name;
        rep.worst_index = k;
        rep.analytic = analytic;
        rep.numeric = numeric;
      }
    }
  }
  rep.passed = rep.max_rel_err <= opt.tol;
  return rep;
}

FdReport fd_check(ModelParams params, Batch batch, const PipelineConfig& cfg, const FdOptions& opt,
                  bool include_inputs) {
  const GradBundle g = backward(batch, params, cfg, include_inputs);
  auto tensors = trainable_tensors(params, cfg.loss.scale_learnable);
  if (include_inputs) {
    for (auto& t : input_tensors(batch)) tensors.push_back(std::move(t));
  }
  std::vector<const Mat*> grads;
  for (const auto& ng : g.grads) grads.push_back(&ng.grad);
  return fd_check_tensors(tensors, grads,
                          [&] { return pipeline_forward(batch, params, cfg).report.total; }, opt);
}

// ---------------------------------------------------------------------------

namespace {

Mat random_unit_rows(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  normalize_rows(m);
  return m;
}

Vec random_unit(Eigen::Index n, std::mt19937_64& rng) {
  return random_unit_rows(1, n, rng).row(0).transpose();
}

Mat random_mat(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

TensorRef view(std::string name, Mat& m) { return {std::move(name), m.data(), m.rows(), m.cols()}; }
TensorRef view(std::string name, Vec& v) { return {std::move(name), v.data(), v.size(), 1}; }

Mat as_col(const Vec& v) { return Mat(v); }

double weighted_sum(const Mat& w, const Mat& m) { return (w.array() * m.array()).sum(); }

template <typename LossFn>
FdReport check(std::vector<TensorRef> tensors, std::vector<Mat> grads, LossFn loss, const FdOptions& opt) {
  std::vector<const Mat*> ptrs;
  for (const auto& g : grads) ptrs.push_back(&g);
  return fd_check_tensors(tensors, ptrs, std::function<double()>(loss), opt);
}

}  // namespace

std::vector<NamedFdReport> run_gradcheck_suite(std::uint64_t seed, const GradcheckShape& shape,
                                               const FdOptions& opt) {
  std::mt19937_64 rng(seed);
  const int nt = shape.n_t, nv = shape.n_v, d = shape.dim, b = shape.batch;
  std::vector<NamedFdReport> out;

  // GLIM, with and without renormalization.
  for (bool renorm : {true, false}) {
    GlimConfig gc;
    gc.renormalize = renorm;
    gc.temperature = renorm ? 1.0 : 0.5;
    Mat text = random_unit_rows(1 + nt, d, rng);
    Mat frames = random_unit_rows(nv, d, rng);
    const Vec wv = random_unit(d, rng);
    const Mat wf = random_mat(nt, d, rng);
    const auto fwd = glim_attend(text, frames, gc);
    const auto g = glim_attend_backward(text, frames, gc, fwd, wv, wf);
    auto loss = [&] {
      const auto r = glim_attend(text, frames, gc);
      return wv.dot(r.video) + weighted_sum(wf, r.frames);
    };
    out.push_back({renorm ? "glim_attend" : "glim_attend[no-renorm,temp=0.5]",
                   check({view("text_rows", text), view("frames", frames)}, {g.d_text_rows, g.d_frames},
                         loss, opt)});
  }

  {
    Vec v = random_unit(d, rng), s = random_unit(d, rng);
    const auto g = score_vs_backward(v, s, 1.0);
    out.push_back({"score_vs", check({view("guided_video", v), view("sentence", s)},
                                     {as_col(g.d_a), as_col(g.d_b)}, [&] { return score_vs(v, s); }, opt)});
  }
  {
    Vec v = random_unit(d, rng);
    Mat w = random_unit_rows(nt, d, rng);
    const auto g = score_vw_backward(v, w, 1.0);
    out.push_back({"score_vw", check({view("guided_video", v), view("words", w)},
                                     {as_col(g.d_vec), g.d_mat}, [&] { return score_vw(v, w); }, opt)});
  }
  {
    Mat f = random_unit_rows(nt, d, rng);
    Vec s = random_unit(d, rng);
    const auto g = score_sf_backward(f, s, 1.0);
    out.push_back({"score_sf", check({view("guided_frames", f), view("sentence", s)},
                                     {g.d_mat, as_col(g.d_vec)}, [&] { return score_sf(f, s); }, opt)});
  }
  {
    Mat f = random_unit_rows(nt, d, rng);
    Mat w = random_unit_rows(nt, d, rng);
    const auto g = score_fw_backward(f, w, 1.0);
    out.push_back({"score_fw", check({view("guided_frames", f), view("words", w)}, {g.d_a, g.d_b},
                                     [&] { return score_fw(f, w); }, opt)});
  }

  ScoreConfig sc;
  {
    Vec s = random_unit(d, rng);
    Mat w = random_unit_rows(nt, d, rng);
    Mat f = random_unit_rows(nv, d, rng);
    const Mat u = random_mat(1, 4, rng);
    GrainScores up{u(0), u(1), u(2), u(3), 0.0};
    const auto g = score_pair_backward(s, w, f, sc, up);
    auto loss = [&] {
      const auto r = score_pair(s, w, f, sc);
      return up.vs * r.vs + up.vw * r.vw + up.sf * r.sf + up.fw * r.fw;
    };
    out.push_back({"score_pair", check({view("sentence", s), view("words", w), view("frames", f)},
                                       {as_col(g.d_sentence), g.d_words, g.d_frames}, loss, opt)});
  }
  {
    // score_matrix: every pair's reverse pass accumulated into shared inputs.
    std::vector<TextTokens> texts(b);
    std::vector<VideoTokens> videos(b);
    for (int i = 0; i < b; ++i) {
      texts[i] = {"t" + std::to_string(i), random_unit(d, rng), random_unit_rows(nt, d, rng), nt};
      videos[i] = {"v" + std::to_string(i), random_unit_rows(nv, d, rng), nv};
    }
    std::vector<Mat> w;
    for (int k = 0; k < 4; ++k) w.push_back(random_mat(b, b, rng));
    std::vector<Mat> grads;
    std::vector<TensorRef> tensors;
    for (int i = 0; i < b; ++i) {
      grads.push_back(Mat::Zero(d, 1));
      grads.push_back(Mat::Zero(nt, d));
      tensors.push_back(view("text" + std::to_string(i) + ".sentence", texts[i].sentence));
      tensors.push_back(view("text" + std::to_string(i) + ".words", texts[i].words));
    }
    for (int j = 0; j < b; ++j) {
      grads.push_back(Mat::Zero(nv, d));
      tensors.push_back(view("video" + std::to_string(j) + ".frames", videos[j].frames));
    }
    for (int i = 0; i < b; ++i) {
      for (int j = 0; j < b; ++j) {
        GrainScores up{w[0](i, j), w[1](i, j), w[2](i, j), w[3](i, j), 0.0};
        const auto g = score_pair_backward(texts[i].sentence, texts[i].words, videos[j].frames, sc, up);
        grads[2 * i] += as_col(g.d_sentence);
        grads[2 * i + 1] += g.d_words;
        grads[2 * b + j] += g.d_frames;
      }
    }
    auto loss = [&] {
      const auto m = score_matrix(texts, videos, sc);
      return weighted_sum(w[0], m.vs) + weighted_sum(w[1], m.vw) + weighted_sum(w[2], m.sf) +
             weighted_sum(w[3], m.fw);
    };
    out.push_back({"score_matrix", check(tensors, grads, loss, opt)});
  }

  {
    auto enc = TemporalEncoder::initialized(nv + 1, d, std::max(1, shape.temporal_depth), 2, seed + 17);
    // Move parameters off their initial values so every path is exercised.
    ModelParams holder;
    holder.head = ProjectionHead::identity(d, d);
    holder.temporal = enc;
    for (auto& t : trainable_tensors(holder, false)) {
      if (t.name.rfind("temporal.", 0) == 0) t.map() += random_mat(t.rows, t.cols, rng, 0.1);
    }
    Mat x = random_mat(nv, d, rng);
    const Mat w = random_mat(nv, d, rng);
    TemporalCache cache;
    temporal_forward(x, holder.temporal, &cache);
    ModelParams grad_holder = zeros_like(holder);
    const Mat dx = temporal_backward(holder.temporal, cache, w, grad_holder.temporal);
    std::vector<TensorRef> tensors{view("input", x)};
    std::vector<Mat> grads{dx};
    auto prefs = trainable_tensors(holder, false);
    auto grefs = trainable_tensors(grad_holder, false);
    for (std::size_t k = 0; k < prefs.size(); ++k) {
      if (prefs[k].name.rfind("temporal.", 0) != 0) continue;
      tensors.push_back(prefs[k]);
      grads.push_back(Mat(grefs[k].map()));
    }
    out.push_back({"temporal_encoder", check(tensors, grads,
                                             [&] { return weighted_sum(w, temporal_forward(x, holder.temporal)); },
                                             opt)});
  }

  LossConfig lc;
  lc.logit_scale = shape.logit_scale;
  {
    Mat agg = random_mat(b, b, rng, 0.3);
    const auto g = infonce_backward(agg, lc);
    LossConfig scale_cfg = lc;
    double scale = lc.logit_scale;
    Mat d_scale(1, 1);
    d_scale(0, 0) = g.d_logit_scale;
    auto loss = [&] {
      scale_cfg.logit_scale = scale;
      return infonce(agg, scale_cfg).l_infonce;
    };
    out.push_back({"infonce", check({view("aggregate", agg), {"logit_scale", &scale, 1, 1}},
                                    {g.d_aggregate, d_scale}, loss, opt)});
  }

  for (auto [variant, mode] : {std::pair{CscVariant::both, VarianceMode::population},
                               std::pair{CscVariant::both, VarianceMode::sample},
                               std::pair{CscVariant::positive_only, VarianceMode::population},
                               std::pair{CscVariant::negative_only, VarianceMode::population}}) {
    LossConfig c = lc;
    c.csc_variant = variant;
    c.variance_mode = mode;
    std::vector<Mat> grains;
    for (int k = 0; k < 4; ++k) grains.push_back(random_mat(b, b, rng, 0.3));
    std::vector<const Mat*> ptrs;
    for (const auto& g : grains) ptrs.push_back(&g);
    const auto g = csc_backward(ptrs, c);
    std::vector<TensorRef> tensors;
    for (int k = 0; k < 4; ++k) tensors.push_back(view(to_string(kAllGrains[k]), grains[k]));
    out.push_back({std::string("csc[") + to_string(variant) + "," + to_string(mode) + "]",
                   check(tensors, g, [&] { return csc(ptrs, c).l_csc; }, opt)});
  }

  for (double eta : {0.1, 0.0}) {
    LossConfig c = lc;
    c.eta = eta;
    ScoreTensors st;
    for (Grain k : kAllGrains) st.grain(k) = random_mat(b, b, rng, 0.3);
    auto refresh = [&] { st.aggregate = (st.vs + st.vw + st.sf + st.fw) / 4.0; };
    refresh();
    const auto g = total_loss_backward(st, GrainSet::all(), c);
    std::vector<TensorRef> tensors;
    std::vector<Mat> grads;
    for (Grain k : kAllGrains) {
      tensors.push_back(view(to_string(k), st.grain(k)));
      grads.push_back(g.d_scores.grain(k));
    }
    out.push_back({"total_loss[eta=" + std::string(eta == 0.0 ? "0" : "0.1") + "]",
                   check(tensors, grads,
                         [&] {
                           refresh();
                           return total_loss(st, GrainSet::all(), c).total;
                         },
                         opt)});
  }

  // End to end: projection heads, temporal encoder, logit scale and raw inputs.
  for (double eta : {0.1, 0.0}) {
    Batch batch;
    for (int i = 0; i < b; ++i) {
      TextTokens t{"t" + std::to_string(i), random_unit(d, rng), Mat::Zero(nt + 1, d), nt};
      t.words.topRows(nt) = random_unit_rows(nt, d, rng);
      VideoTokens v{"v" + std::to_string(i), Mat::Zero(nv + 1, d), nv};
      v.frames.topRows(nv) = random_unit_rows(nv, d, rng);
      batch.texts.push_back(std::move(t));
      batch.videos.push_back(std::move(v));
    }
    ModelParams params;
    params.head = ProjectionHead::random(d, d, seed + 3);
    params.temporal = TemporalEncoder::initialized(nv + 1, d, shape.temporal_depth, 2, seed + 5);
    for (auto& t : trainable_tensors(params, false)) {
      if (t.name.rfind("temporal.", 0) == 0) t.map() += random_mat(t.rows, t.cols, rng, 0.05);
    }
    params.logit_scale = shape.logit_scale;
    PipelineConfig pc;
    pc.loss.eta = eta;
    pc.loss.scale_learnable = true;
    out.push_back({"end_to_end[eta=" + std::string(eta == 0.0 ? "0" : "0.1") + "]",
                   fd_check(params, batch, pc, opt, true)});
  }
  return out;
}

}  // namespace glccl
