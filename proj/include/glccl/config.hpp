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

#include "glccl/bench.hpp"
#include "glccl/features.hpp"
#include "glccl/grad.hpp"
#include "glccl/trainer.hpp"
#include "json.hpp"

namespace glccl {

struct GradcheckConfig {
  double h = 1e-5;
  double tol = 1e-5;
  int samples_per_tensor = 200;
  GradcheckShape shape;
};

struct BenchConfig {
  int reps = 5;
  int warmup = 1;
  int corpus_items = 64;
};

/// Every knob of every subcommand. Sections: seed, gen, model, loss, train,
/// sweep, gradcheck, bench, plus the data and params paths. Unknown keys
/// are rejected.
struct RunConfig {
  std::uint64_t seed = 1;
  // Corpus manifest; empty means generate from the gen section.
  std::string data;
  // Parameter snapshot directory for eval/score; empty means fresh init.
  std::string params;
  GenConfig gen;
  TrainConfig train;  // model, loss and train sections
  std::vector<double> sweep_etas = default_eta_grid();
  GradcheckConfig gradcheck;
  BenchConfig bench;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

nlohmann::json to_json(const GenConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const LossReport& r);
nlohmann::json to_json(const RetrievalMetrics& m);
nlohmann::json to_json(const EpochRecord& r);
nlohmann::json to_json(const TrainReport& r);
nlohmann::json to_json(const GrainScores& s);
nlohmann::json to_json(const FdReport& r);
nlohmann::json to_json(const CostReport& r);

/// Tensors as GLCC blobs plus params.json describing shapes and the logit scale.
void save_params(const ModelParams& p, const std::filesystem::path& dir);
ModelParams load_params(const std::filesystem::path& dir);

/// Writes `j` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace glccl
