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

#include "glccl/config.hpp"

#include <fstream>
#include <set>

namespace glccl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) {
      throw ConfigError("config: unknown key '" + k + "' in section '" + section + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + section + "." + key + "'");
  }
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  reject_unknown(j, "<root>", {"seed", "data", "params", "gen", "model", "loss", "train", "sweep", "gradcheck", "bench"});
  read(j, "seed", c.seed, "<root>");
  read(j, "data", c.data, "<root>");
  read(j, "params", c.params, "<root>");
  c.train.seed = c.seed;

  if (j.contains("gen")) {
    const auto& g = j["gen"];
    reject_unknown(g, "gen", {"num_items", "dim", "topics", "relevant", "n_t", "n_v", "sigma", "version"});
    read(g, "num_items", c.gen.num_items, "gen");
    read(g, "dim", c.gen.dim, "gen");
    read(g, "topics", c.gen.topics, "gen");
    read(g, "relevant", c.gen.relevant, "gen");
    read(g, "n_t", c.gen.n_t, "gen");
    read(g, "n_v", c.gen.n_v, "gen");
    read(g, "sigma", c.gen.sigma, "gen");
    read(g, "version", c.gen.version, "gen");
    if (c.gen.version != GenConfig{}.version) throw ConfigError("config: unsupported gen.version");
  }
  auto& t = c.train;
  if (j.contains("model")) {
    const auto& m = j["model"];
    reject_unknown(m, "model", {"temperature", "renormalize", "variant", "temporal_depth", "ffn_mult",
                                "proj_dim", "head_init", "tile_size", "threads"});
    read(m, "temperature", t.glim.temperature, "model");
    read(m, "renormalize", t.glim.renormalize, "model");
    std::string s;
    if (m.contains("variant")) {
      read(m, "variant", s, "model");
      t.variant = parse_variant(s);
    }
    read(m, "temporal_depth", t.temporal_depth, "model");
    read(m, "ffn_mult", t.ffn_mult, "model");
    read(m, "proj_dim", t.proj_dim, "model");
    if (m.contains("head_init")) {
      read(m, "head_init", s, "model");
      t.head_init = parse_head_init(s);
    }
    read(m, "tile_size", t.tile_size, "model");
    read(m, "threads", t.threads, "model");
  }
  if (j.contains("loss")) {
    const auto& l = j["loss"];
    reject_unknown(l, "loss", {"eta", "logit_scale", "scale_learnable", "csc_variant", "variance_mode", "eps_var"});
    read(l, "eta", t.loss.eta, "loss");
    read(l, "logit_scale", t.loss.logit_scale, "loss");
    read(l, "scale_learnable", t.loss.scale_learnable, "loss");
    std::string s;
    if (l.contains("csc_variant")) {
      read(l, "csc_variant", s, "loss");
      t.loss.csc_variant = parse_csc_variant(s);
    }
    if (l.contains("variance_mode")) {
      read(l, "variance_mode", s, "loss");
      t.loss.variance_mode = parse_variance_mode(s);
    }
    read(l, "eps_var", t.loss.eps_var, "loss");
  }
  if (j.contains("train")) {
    const auto& tr = j["train"];
    reject_unknown(tr, "train", {"epochs", "batch_size", "lr_head", "lr_temporal", "lr_scale",
                                 "warmup_steps", "held_out"});
    read(tr, "epochs", t.epochs, "train");
    read(tr, "batch_size", t.batch_size, "train");
    read(tr, "lr_head", t.lr_head, "train");
    read(tr, "lr_temporal", t.lr_temporal, "train");
    read(tr, "lr_scale", t.lr_scale, "train");
    read(tr, "warmup_steps", t.warmup_steps, "train");
    read(tr, "held_out", t.held_out, "train");
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    reject_unknown(s, "sweep", {"etas"});
    read(s, "etas", c.sweep_etas, "sweep");
  }
  if (j.contains("gradcheck")) {
    const auto& g = j["gradcheck"];
    reject_unknown(g, "gradcheck", {"h", "tol", "samples_per_tensor", "batch", "n_t", "n_v", "dim",
                                    "temporal_depth", "logit_scale"});
    read(g, "h", c.gradcheck.h, "gradcheck");
    read(g, "tol", c.gradcheck.tol, "gradcheck");
    read(g, "samples_per_tensor", c.gradcheck.samples_per_tensor, "gradcheck");
    read(g, "batch", c.gradcheck.shape.batch, "gradcheck");
    read(g, "n_t", c.gradcheck.shape.n_t, "gradcheck");
    read(g, "n_v", c.gradcheck.shape.n_v, "gradcheck");
    read(g, "dim", c.gradcheck.shape.dim, "gradcheck");
    read(g, "temporal_depth", c.gradcheck.shape.temporal_depth, "gradcheck");
    read(g, "logit_scale", c.gradcheck.shape.logit_scale, "gradcheck");
  }
  if (j.contains("bench")) {
    const auto& b = j["bench"];
    reject_unknown(b, "bench", {"reps", "warmup", "corpus_items"});
    read(b, "reps", c.bench.reps, "bench");
    read(b, "warmup", c.bench.warmup, "bench");
    read(b, "corpus_items", c.bench.corpus_items, "bench");
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const GenConfig& g) {
  return {{"num_items", g.num_items}, {"dim", g.dim},   {"topics", g.topics}, {"relevant", g.relevant},
          {"n_t", g.n_t},             {"n_v", g.n_v},   {"sigma", g.sigma},   {"version", g.version}};
}

namespace {

json model_json(const TrainConfig& t) {
  return {{"temperature", t.glim.temperature}, {"renormalize", t.glim.renormalize},
          {"variant", to_string(t.variant)},   {"temporal_depth", t.temporal_depth},
          {"ffn_mult", t.ffn_mult},            {"proj_dim", t.proj_dim},
          {"head_init", to_string(t.head_init)}, {"tile_size", t.tile_size},
          {"threads", t.threads}};
}

json loss_json(const LossConfig& l) {
  return {{"eta", l.eta},
          {"logit_scale", l.logit_scale},
          {"scale_learnable", l.scale_learnable},
          {"csc_variant", to_string(l.csc_variant)},
          {"variance_mode", to_string(l.variance_mode)},
          {"eps_var", l.eps_var}};
}

json train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},           {"batch_size", t.batch_size}, {"lr_head", t.lr_head},
          {"lr_temporal", t.lr_temporal}, {"lr_scale", t.lr_scale},     {"warmup_steps", t.warmup_steps},
          {"held_out", t.held_out}};
}

}  // namespace

json to_json(const TrainConfig& t) {
  return {{"seed", t.seed}, {"model", model_json(t)}, {"loss", loss_json(t.loss)}, {"train", train_json(t)}};
}

json to_json(const RunConfig& c) {
  const auto& g = c.gradcheck;
  return {{"seed", c.seed},
          {"data", c.data},
          {"params", c.params},
          {"gen", to_json(c.gen)},
          {"model", model_json(c.train)},
          {"loss", loss_json(c.train.loss)},
          {"train", train_json(c.train)},
          {"sweep", {{"etas", c.sweep_etas}}},
          {"gradcheck",
           {{"h", g.h},
            {"tol", g.tol},
            {"samples_per_tensor", g.samples_per_tensor},
            {"batch", g.shape.batch},
            {"n_t", g.shape.n_t},
            {"n_v", g.shape.n_v},
            {"dim", g.shape.dim},
            {"temporal_depth", g.shape.temporal_depth},
            {"logit_scale", g.shape.logit_scale}}},
          {"bench", {{"reps", c.bench.reps}, {"warmup", c.bench.warmup}, {"corpus_items", c.bench.corpus_items}}}};
}

json to_json(const LossReport& r) {
  return {{"l_t2v", r.l_t2v},   {"l_v2t", r.l_v2t}, {"l_infonce", r.l_infonce}, {"var_pos", r.var_pos},
          {"var_neg", r.var_neg}, {"l_csc", r.l_csc}, {"eta", r.eta},             {"total", r.total}};
}

json to_json(const RetrievalMetrics& m) {
  auto dir = [](const DirectionMetrics& d) {
    return json{{"R@1", d.r1}, {"R@5", d.r5}, {"R@10", d.r10}, {"MdR", d.median_rank}, {"MnR", d.mean_rank}};
  };
  return {{"t2v", dir(m.t2v)}, {"v2t", dir(m.v2t)}, {"SumR", m.sum_r}};
}

json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"train_loss", to_json(r.train_loss)},
          {"held_out", to_json(r.held_out)},
          {"held_out_var_pos", r.held_out_var_pos},
          {"held_out_var_neg", r.held_out_var_neg},
          {"held_out_var_ratio", r.held_out_var_ratio},
          {"logit_scale", r.logit_scale},
          {"last_lr", r.last_lr}};
}

json to_json(const TrainReport& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs) epochs.push_back(to_json(e));
  return {{"config", to_json(r.config)},
          {"train_size", r.train_size},
          {"held_out_size", r.held_out_size},
          {"steps", r.steps},
          {"degenerate_batches", r.degenerate_batches},
          {"initial", to_json(r.initial)},
          {"epochs", std::move(epochs)},
          {"final_ranks", {{"t2v", r.final_t2v.ranks}, {"v2t", r.final_v2t.ranks}}}};
}

json to_json(const GrainScores& s) {
  return {{"vs", s.vs}, {"vw", s.vw}, {"sf", s.sf}, {"fw", s.fw}, {"aggregate", s.aggregate}};
}

json to_json(const FdReport& r) {
  return {{"max_rel_err", r.max_rel_err}, {"worst_tensor", r.worst_tensor}, {"worst_index", r.worst_index},
          {"analytic", r.analytic},       {"numeric", r.numeric},           {"checked", r.checked},
          {"passed", r.passed}};
}

json to_json(const CostReport& r) {
  return {{"component", r.component},
          {"params", r.params},
          {"flops", r.flops},
          {"per_query_ms", {{"mean", r.per_query_ms.mean}, {"p50", r.per_query_ms.p50}, {"p95", r.per_query_ms.p95}}},
          {"reps", r.reps},
          {"queries", r.queries},
          {"gallery", r.gallery}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void save_params(const ModelParams& p, const fs::path& dir) {
  fs::create_directories(dir);
  ModelParams copy = p;
  json tensors = json::array();
  for (const auto& t : trainable_tensors(copy, false)) {
    const std::string blob = t.name + ".glcc";
    write_blob(dir / blob, Mat(t.map()));
    tensors.push_back({{"name", t.name}, {"blob", blob}, {"rows", t.rows}, {"cols", t.cols}});
  }
  const int hidden = p.temporal.blocks.empty() ? 0 : static_cast<int>(p.temporal.blocks[0].w1.cols());
  write_json(dir / "params.json", {{"input_dim", p.head.input_dim()},
                                   {"dim", p.head.output_dim()},
                                   {"n_v_max", p.temporal.capacity()},
                                   {"temporal_depth", p.temporal.depth()},
                                   {"ffn_hidden", hidden},
                                   {"logit_scale", p.logit_scale},
                                   {"tensors", std::move(tensors)}});
}

ModelParams load_params(const fs::path& dir) {
  std::ifstream in(dir / "params.json");
  if (!in) throw DataError("missing parameter snapshot " + (dir / "params.json").string());
  ModelParams p;
  try {
    const json j = json::parse(in);
    const int d_in = j.at("input_dim").get<int>();
    const int d = j.at("dim").get<int>();
    const int depth = j.at("temporal_depth").get<int>();
    const int hidden = j.at("ffn_hidden").get<int>();
    p.head = {Mat::Zero(d_in, d), Mat::Zero(d_in, d)};
    p.temporal = TemporalEncoder::identity(j.at("n_v_max").get<int>(), d);
    for (int l = 0; l < depth; ++l) p.temporal.blocks.push_back(TransformerBlock::zeros(d, hidden));
    p.logit_scale = j.at("logit_scale").get<double>();
    auto refs = trainable_tensors(p, false);
    const auto& tensors = j.at("tensors");
    if (tensors.size() != refs.size()) throw DataError("parameter snapshot tensor count mismatch");
    for (std::size_t k = 0; k < refs.size(); ++k) {
      if (tensors[k].at("name").get<std::string>() != refs[k].name) {
        throw DataError("parameter snapshot order mismatch at " + refs[k].name);
      }
      const fs::path blob = dir / tensors[k].at("blob").get<std::string>();
      const Mat m = read_blob(blob);
      if (m.rows() != refs[k].rows || m.cols() != refs[k].cols) {
        throw DataError("shape mismatch in parameter blob " + blob.string());
      }
      refs[k].map() = m;
    }
  } catch (const json::exception& e) {
    throw DataError("malformed parameter snapshot in " + dir.string() + ": " + e.what());
  }
  return p;
}

}  // namespace glccl
