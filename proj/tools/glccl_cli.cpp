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

// Command-line front end. Precedence: built-in defaults < --config file <
// individual flags. Every run writes resolved-config.json into --out; feeding
// that file back through --config reproduces the run.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "glccl/bench.hpp"
#include "glccl/config.hpp"
#include "glccl/evaluator.hpp"
#include "glccl/grad.hpp"
#include "glccl/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace glccl;

namespace {

constexpr const char* kFooter = R"(Outputs (under --out):
  resolved-config.json  every knob of the run; pass it back via --config
  report.json           subcommand-specific structured report
  metrics.csv           direction,k,recall rows (k = 1..N, percent) followed by
                        summary,metric,value rows (MdR, MnR per direction, SumR)
  cmc.csv               series,k,fraction: fraction of queries with rank <= k
  scores.csv            (score) text,video,vs,vw,sf,fw,aggregate
  ablation.csv          (ablate-*) arm,t2v_R@1,t2v_R@5,t2v_R@10,v2t_R@1,v2t_R@5,
                        v2t_R@10,SumR,var_ratio
  sweep.csv             (sweep-eta) eta,r1_sum,SumR,var_ratio
  bench.csv             (bench) component,params,flops,mean_ms,p50_ms,p95_ms
  params/               (train) parameter snapshot as GLCC blobs

Exit codes: 0 ok, 1 usage or config error, 2 data error, 3 numeric failure.)";

// Flag values held until the subcommand is known; only flags the user actually
// passed are merged over the config file.
struct Flags {
  std::string config, out, data, params;
  std::map<std::string, std::string> str;
  std::map<std::string, double> num;
  std::map<std::string, long long> integer;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Flags& f, bool needs_data) {
  app->add_option("--config", f.config, "JSON run config")->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "output directory")->required();
  app->add_option("--seed", f.seed, "single source of all randomness");
  if (needs_data) {
    app->add_option("--data", f.data, "corpus manifest.json (default: generate from the gen section)");
  }
}

// Registers a flag whose value is stored under a json pointer.
template <typename T>
void add_override(CLI::App* app, const std::string& flag, const std::string& pointer,
                  std::map<std::string, T>& store, const std::string& help) {
  app->add_option_function<T>(flag, [&store, pointer](const T& v) { store[pointer] = v; }, help);
}

void add_gen_flags(CLI::App* app, Flags& f) {
  add_override(app, "--num-items", "/gen/num_items", f.integer, "pairs to generate");
  add_override(app, "--dim", "/gen/dim", f.integer, "embedding dimension");
  add_override(app, "--topics", "/gen/topics", f.integer, "topic count");
  add_override(app, "--relevant", "/gen/relevant", f.integer, "relevant topics per pair");
  add_override(app, "--n-t", "/gen/n_t", f.integer, "words per text");
  add_override(app, "--n-v", "/gen/n_v", f.integer, "frames per video");
  add_override(app, "--sigma", "/gen/sigma", f.num, "noise scale");
}

void add_model_flags(CLI::App* app, Flags& f) {
  add_override(app, "--variant", "/model/variant", f.str, "global_only | local_only | global_local");
  add_override(app, "--temperature", "/model/temperature", f.num, "GLIM softmax temperature");
  add_override(app, "--temporal-depth", "/model/temporal_depth", f.integer, "temporal transformer blocks");
  add_override(app, "--proj-dim", "/model/proj_dim", f.integer, "projection width (0 = input width)");
  add_override(app, "--head-init", "/model/head_init", f.str, "identity | random");
  add_override(app, "--threads", "/model/threads", f.integer, "scoring worker threads");
}

void add_loss_flags(CLI::App* app, Flags& f) {
  add_override(app, "--eta", "/loss/eta", f.num, "CSC loss weight");
  add_override(app, "--logit-scale", "/loss/logit_scale", f.num, "initial logit scale");
  add_override(app, "--csc-variant", "/loss/csc_variant", f.str, "both | positive_only | negative_only");
  add_override(app, "--variance-mode", "/loss/variance_mode", f.str, "population | sample");
}

void add_train_flags(CLI::App* app, Flags& f) {
  add_override(app, "--epochs", "/train/epochs", f.integer, "training epochs");
  add_override(app, "--batch-size", "/train/batch_size", f.integer, "pairs per batch");
  add_override(app, "--lr-head", "/train/lr_head", f.num, "projection head learning rate");
  add_override(app, "--lr-temporal", "/train/lr_temporal", f.num, "temporal encoder learning rate");
  add_override(app, "--lr-scale", "/train/lr_scale", f.num, "logit scale learning rate");
  add_override(app, "--held-out", "/train/held_out", f.integer, "held-out pairs");
}

RunConfig resolve(const Flags& f) {
  json j = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("malformed config " + f.config + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config " + f.config + " must be a JSON object");
  }
  auto set = [&](const std::string& ptr, const json& v) { j[json::json_pointer(ptr)] = v; };
  if (f.seed) set("/seed", *f.seed);
  if (!f.data.empty()) set("/data", f.data);
  if (!f.params.empty()) set("/params", f.params);
  for (const auto& [k, v] : f.str) set(k, v);
  for (const auto& [k, v] : f.num) set(k, v);
  for (const auto& [k, v] : f.integer) set(k, v);
  RunConfig c = parse_run_config(j);
  validate(c.gen);
  c.train.validate();
  return c;
}

Corpus obtain_corpus(const RunConfig& c) {
  if (!c.data.empty()) return load_corpus(c.data);
  return gen_synthetic(c.gen, c.seed);
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  out << s;
}

void write_rank_outputs(const fs::path& out, const RetrievalMetrics& m, const RankVector& t2v,
                        const RankVector& v2t) {
  std::ofstream metrics(out / "metrics.csv");
  write_metrics_csv(metrics, m, t2v, v2t);
  std::ofstream cmc(out / "cmc.csv");
  write_cmc_csv(cmc, {{"t2v", cmc_curve(t2v)}, {"v2t", cmc_curve(v2t)}});
}

RetrievalMetrics final_metrics(const TrainReport& r) {
  return r.epochs.empty() ? r.initial.held_out : r.epochs.back().held_out;
}

double final_ratio(const TrainReport& r) {
  return r.epochs.empty() ? r.initial.held_out_var_ratio : r.epochs.back().held_out_var_ratio;
}

std::string ablation_line(const std::string& arm, const TrainReport& r) {
  const auto m = final_metrics(r);
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", arm.c_str(),
                m.t2v.r1, m.t2v.r5, m.t2v.r10, m.v2t.r1, m.v2t.r5, m.v2t.r10, m.sum_r, final_ratio(r));
  return buf;
}

constexpr const char* kAblationHeader = "arm,t2v_R@1,t2v_R@5,t2v_R@10,v2t_R@1,v2t_R@5,v2t_R@10,SumR,var_ratio\n";

// Scores every text of the aligned corpus against every video.
PipelineOutput score_corpus(const RunConfig& c, const Corpus& corpus, ModelParams& params) {
  const Corpus aligned = normalize_corpus(corpus.aligned());
  if (c.params.empty()) {
    params = init_params(c.train, aligned.dim, aligned.n_v_max);
  } else {
    params = load_params(c.params);
  }
  if (params.head.input_dim() != aligned.dim) {
    throw DataError("parameter snapshot " + c.params + " does not match corpus dimension");
  }
  std::vector<std::size_t> idx(aligned.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const Batch batch = make_batch(aligned, idx);
  PipelineConfig pc = c.train.pipeline();
  pc.loss.eta = 0.0;
  return pipeline_forward(batch, params, pc);
}

int run_gen(const RunConfig& c, const fs::path& out) {
  GenTrace trace;
  const Corpus corpus = gen_synthetic(c.gen, c.seed, &trace);
  save_corpus(corpus, out);
  write_json(out / "report.json", {{"items", corpus.size()},
                                   {"dim", corpus.dim},
                                   {"manifest", "manifest.json"},
                                   {"relevant_topics", trace.relevant_topics}});
  return 0;
}

int run_train(const RunConfig& c, const fs::path& out) {
  const TrainReport r = train(c.train, obtain_corpus(c));
  write_json(out / "report.json", to_json(r));
  write_rank_outputs(out, final_metrics(r), r.final_t2v, r.final_v2t);
  save_params(r.final_params, out / "params");
  return 0;
}

int run_eval(const RunConfig& c, const fs::path& out) {
  ModelParams params;
  const PipelineOutput o = score_corpus(c, obtain_corpus(c), params);
  const auto t2v = ranks_from_scores(o.scores.aggregate, Direction::t2v);
  const auto v2t = ranks_from_scores(o.scores.aggregate, Direction::v2t);
  const RetrievalMetrics m = evaluate_scores(o.scores.aggregate);
  write_json(out / "report.json", {{"metrics", to_json(m)}, {"loss", to_json(o.report)}});
  write_rank_outputs(out, m, t2v, v2t);
  return 0;
}

int run_score(const RunConfig& c, const fs::path& out) {
  const Corpus corpus = obtain_corpus(c);
  ModelParams params;
  const PipelineOutput o = score_corpus(c, corpus, params);
  const Corpus aligned = corpus.aligned();
  std::string csv = "text,video,vs,vw,sf,fw,aggregate\n";
  char buf[512];
  const auto& s = o.scores;
  for (Eigen::Index i = 0; i < s.aggregate.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.aggregate.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", aligned.texts[i].id.c_str(),
                    aligned.videos[j].id.c_str(), s.vs(i, j), s.vw(i, j), s.sf(i, j), s.fw(i, j),
                    s.aggregate(i, j));
      csv += buf;
    }
  }
  write_text(out / "scores.csv", csv);
  const RetrievalMetrics m = evaluate_scores(s.aggregate);
  write_json(out / "report.json", {{"metrics", to_json(m)}, {"loss", to_json(o.report)}});
  write_rank_outputs(out, m, ranks_from_scores(s.aggregate, Direction::t2v),
                     ranks_from_scores(s.aggregate, Direction::v2t));
  return 0;
}

int run_ablate_interaction(const RunConfig& c, const fs::path& out) {
  const auto rows = ablate_interaction(c.train, obtain_corpus(c));
  std::string csv = kAblationHeader;
  json rep = json::array();
  std::vector<std::pair<std::string, std::vector<double>>> cmc;
  for (const auto& r : rows) {
    csv += ablation_line(r.name, r.report);
    rep.push_back({{"arm", r.name}, {"report", to_json(r.report)}});
    cmc.emplace_back(r.name, cmc_curve(r.report.final_t2v));
  }
  write_text(out / "ablation.csv", csv);
  write_json(out / "report.json", {{"arms", rep}});
  std::ofstream cmc_out(out / "cmc.csv");
  write_cmc_csv(cmc_out, cmc);
  std::ofstream metrics(out / "metrics.csv");
  const auto& best = rows.back().report;
  write_metrics_csv(metrics, final_metrics(best), best.final_t2v, best.final_v2t);
  return 0;
}

int run_ablate_csc(const RunConfig& c, const fs::path& out) {
  const CscAblation a = ablate_csc(c.train, obtain_corpus(c));
  std::string csv = kAblationHeader;
  csv += ablation_line("with_csc", a.with_csc);
  csv += ablation_line("without_csc", a.without_csc);
  json variants = json::array();
  for (const auto& v : a.variants) {
    csv += ablation_line(v.name, v.report);
    variants.push_back({{"arm", v.name}, {"report", to_json(v.report)}});
  }
  write_text(out / "ablation.csv", csv);
  write_json(out / "report.json", {{"with_csc", to_json(a.with_csc)},
                                   {"without_csc", to_json(a.without_csc)},
                                   {"variants", variants}});
  std::ofstream cmc_out(out / "cmc.csv");
  write_cmc_csv(cmc_out, a.cmc);
  std::ofstream metrics(out / "metrics.csv");
  write_metrics_csv(metrics, final_metrics(a.with_csc), a.with_csc.final_t2v, a.with_csc.final_v2t);
  return 0;
}

int run_sweep(const RunConfig& c, const fs::path& out) {
  const auto rows = sweep_eta(c.train, obtain_corpus(c), c.sweep_etas);
  std::string csv = "eta,r1_sum,SumR,var_ratio\n";
  json rep = json::array();
  char buf[256];
  std::size_t best = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.eta, r.r1_sum, r.sum_r, final_ratio(r.report));
    csv += buf;
    rep.push_back({{"eta", r.eta}, {"r1_sum", r.r1_sum}, {"SumR", r.sum_r}, {"report", to_json(r.report)}});
    if (r.r1_sum > rows[best].r1_sum) best = k;
  }
  write_text(out / "sweep.csv", csv);
  write_json(out / "report.json", {{"rows", rep}, {"best_eta", rows.empty() ? 0.0 : rows[best].eta}});
  if (!rows.empty()) {
    const auto& r = rows[best].report;
    write_rank_outputs(out, final_metrics(r), r.final_t2v, r.final_v2t);
  }
  return 0;
}

int run_gradcheck(const RunConfig& c, const fs::path& out) {
  FdOptions opt;
  opt.h = c.gradcheck.h;
  opt.tol = c.gradcheck.tol;
  opt.samples_per_tensor = c.gradcheck.samples_per_tensor;
  opt.seed = c.seed;
  const auto reports = run_gradcheck_suite(c.seed, c.gradcheck.shape, opt);
  double worst = 0.0;
  bool ok = true;
  json rep = json::array();
  for (const auto& r : reports) {
    std::printf("%-40s max_rel_err=%.3e %s\n", r.op.c_str(), r.report.max_rel_err,
                r.report.passed ? "ok" : "FAIL");
    worst = std::max(worst, r.report.max_rel_err);
    ok = ok && r.report.passed;
    rep.push_back({{"op", r.op}, {"result", to_json(r.report)}});
  }
  std::printf("max_rel_err=%.3e\n", worst);
  write_json(out / "report.json", {{"ops", rep}, {"max_rel_err", worst}, {"passed", ok}});
  if (!ok) {
    std::fprintf(stderr, "gradcheck: max_rel_err %.3e exceeds tolerance %.1e\n", worst, opt.tol);
    return 3;
  }
  return 0;
}

int run_bench(const RunConfig& c, const fs::path& out) {
  GenConfig g = c.gen;
  g.num_items = c.bench.corpus_items;
  const Corpus corpus = c.data.empty() ? gen_synthetic(g, c.seed) : load_corpus(c.data);
  ScoreConfig sc;
  sc.glim = c.train.glim;
  sc.grains = grains_for(c.train.variant);
  std::string csv = "component,params,flops,mean_ms,p50_ms,p95_ms\n";
  json rep = json::array();
  char buf[256];
  for (Component comp : {Component::glim, Component::scoring, Component::cross_attention_baseline}) {
    const CostReport r = time_scoring(corpus, c.bench.reps, comp, sc, c.bench.warmup, c.seed);
    std::snprintf(buf, sizeof buf, "%s,%lld,%lld,%.6f,%.6f,%.6f\n", r.component.c_str(),
                  static_cast<long long>(r.params), static_cast<long long>(r.flops), r.per_query_ms.mean,
                  r.per_query_ms.p50, r.per_query_ms.p95);
    csv += buf;
    rep.push_back(to_json(r));
  }
  write_text(out / "bench.csv", csv);
  write_json(out / "report.json", {{"components", rep}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glccl: global-local text-video retrieval over precomputed token embeddings"};
  app.footer(kFooter);
  app.require_subcommand(1);
  Flags f;

  using Runner = int (*)(const RunConfig&, const fs::path&);
  std::vector<std::pair<CLI::App*, Runner>> subs;
  auto sub = [&](const char* name, const char* help, Runner run, bool data) {
    CLI::App* s = app.add_subcommand(name, help);
    s->footer(kFooter);
    add_common(s, f, data);
    subs.emplace_back(s, run);
    return s;
  };

  auto* gen = sub("gen", "generate a synthetic corpus into --out", run_gen, false);
  add_gen_flags(gen, f);

  for (auto [name, help, run] : std::initializer_list<std::tuple<const char*, const char*, Runner>>{
           {"train", "train projection heads and temporal encoder", run_train},
           {"ablate-interaction", "train global_only, local_only and global_local arms", run_ablate_interaction},
           {"ablate-csc", "train with and without CSC and per CSC variant", run_ablate_csc},
           {"sweep-eta", "train once per CSC weight", run_sweep}}) {
    auto* s = sub(name, help, run, true);
    add_gen_flags(s, f);
    add_model_flags(s, f);
    add_loss_flags(s, f);
    add_train_flags(s, f);
  }
  for (auto [name, help, run] : std::initializer_list<std::tuple<const char*, const char*, Runner>>{
           {"eval", "retrieval metrics over all pairs of a corpus", run_eval},
           {"score", "per-grain score matrix over all pairs of a corpus", run_score}}) {
    auto* s = sub(name, help, run, true);
    s->add_option("--params", f.params, "parameter snapshot directory (default: fresh init)");
    add_gen_flags(s, f);
    add_model_flags(s, f);
    add_loss_flags(s, f);
  }
  auto* gc = sub("gradcheck", "finite-difference check of every reverse pass", run_gradcheck, false);
  add_override(gc, "--step", "/gradcheck/h", f.num, "finite-difference step");
  add_override(gc, "--tol", "/gradcheck/tol", f.num, "relative error tolerance");
  auto* bench = sub("bench", "parameter, FLOP and latency comparison", run_bench, true);
  add_override(bench, "--reps", "/bench/reps", f.integer, "timed repetitions (>= 5)");
  add_model_flags(bench, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const RunConfig cfg = resolve(f);
    const fs::path out = f.out;
    if (!cfg.data.empty() && fs::exists(out) &&
        fs::equivalent(out, fs::path(cfg.data).parent_path().empty() ? fs::path(".") : fs::path(cfg.data).parent_path())) {
      throw ConfigError("--out must differ from the corpus directory of " + cfg.data);
    }
    fs::create_directories(out);
    write_json(out / "resolved-config.json", to_json(cfg));
    for (const auto& [s, run] : subs) {
      if (s->parsed()) return run(cfg, out);
    }
    return 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
