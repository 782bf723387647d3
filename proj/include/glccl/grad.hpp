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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "glccl/features.hpp"
#include "glccl/losses.hpp"
#include "glccl/model.hpp"
#include "glccl/scoring.hpp"

namespace glccl {

/// B aligned pairs: text i matches video i.
struct Batch {
  std::vector<TextTokens> texts;
  std::vector<VideoTokens> videos;

  std::size_t size() const { return texts.size(); }
};

/// Builds a batch from an aligned corpus.
Batch make_batch(const Corpus& aligned, std::span<const std::size_t> pair_indices);

struct PipelineConfig {
  ScoreConfig score;
  // logit_scale here is ignored; ModelParams::logit_scale is used instead.
  LossConfig loss;
};

/// Token features after projection, temporal encoding and L2 normalization,
/// ready for GLIM.
struct EncodedBatch {
  std::vector<TextTokens> texts;
  std::vector<VideoTokens> videos;
};

EncodedBatch encode_batch(const Batch& batch, const ModelParams& params);

struct PipelineOutput {
  ScoreTensors scores;
  LossReport report;
};

PipelineOutput pipeline_forward(const Batch& batch, const ModelParams& params,
                                const PipelineConfig& cfg);

struct NamedGrad {
  std::string name;
  Mat grad;
};

struct GradBundle {
  double loss = 0;
  LossReport report;
  std::vector<NamedGrad> grads;  // same order as trainable_tensors (+ inputs)

  const Mat& at(const std::string& name) const;
  bool all_finite() const;
};

/// Exact reverse-mode gradient of the total loss. Parameter gradients come in
/// trainable_tensors order; with `input_grads`, gradients for every input
/// tensor follow in input_tensors order.
GradBundle backward(const Batch& batch, const ModelParams& params, const PipelineConfig& cfg,
                    bool input_grads = false);

/// Sentence, word and frame tensors of every batch item (padding rows included).
std::vector<TensorRef> input_tensors(Batch& batch);

// ---------------------------------------------------------------------------
// Finite-difference verification.

struct FdOptions {
  double h = 1e-5;
  double tol = 1e-5;
  int samples_per_tensor = 200;
  std::uint64_t seed = 0;
};

struct FdReport {
  double max_rel_err = 0;
  std::string worst_tensor;
  Eigen::Index worst_index = -1;
  double analytic = 0;
  double numeric = 0;
  std::size_t checked = 0;
  bool passed = true;
};

/// Central differences on a seeded coordinate sample of every tensor
/// (all coordinates when a tensor has fewer than samples_per_tensor).
/// rel_err = |fd - g| / max(1, |g|).
FdReport fd_check_tensors(const std::vector<TensorRef>& tensors, const std::vector<const Mat*>& grads,
                          const std::function<double()>& loss, const FdOptions& opt);

/// End-to-end check of backward() against the total loss.
FdReport fd_check(ModelParams params, Batch batch, const PipelineConfig& cfg, const FdOptions& opt,
                  bool include_inputs = true);

struct NamedFdReport {
  std::string op;
  FdReport report;
};

struct GradcheckShape {
  int batch = 4;
  int n_t = 3;
  int n_v = 2;
  int dim = 8;
  int temporal_depth = 1;
  double logit_scale = 100.0;
};

/// Checks every differentiable op in isolation, then the end-to-end objective
/// with the consistency term active and with eta = 0.
std::vector<NamedFdReport> run_gradcheck_suite(std::uint64_t seed, const GradcheckShape& shape,
                                               const FdOptions& opt);

}  // namespace glccl
