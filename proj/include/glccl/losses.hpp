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

#include <string>
#include <vector>

#include "glccl/scoring.hpp"
#include "glccl/types.hpp"

namespace glccl {

enum class CscVariant { positive_only, negative_only, both };
enum class VarianceMode { population, sample };

const char* to_string(CscVariant v);
const char* to_string(VarianceMode m);
CscVariant parse_csc_variant(const std::string& s);
VarianceMode parse_variance_mode(const std::string& s);

inline constexpr double kMaxLogitScale = 100.0;
inline constexpr double kMinLogitScale = 1e-4;

struct LossConfig {
  double eta = 0.1;
  double logit_scale = 100.0;
  bool scale_learnable = true;
  CscVariant csc_variant = CscVariant::both;
  VarianceMode variance_mode = VarianceMode::population;
  double eps_var = 1e-12;

  void validate() const;
};

struct InfoNceResult {
  double l_t2v = 0, l_v2t = 0, l_infonce = 0;
};

/// Symmetric cross-entropy over logit_scale * aggregate; the diagonal holds positives.
InfoNceResult infonce(const Mat& aggregate, const LossConfig& cfg);

struct InfoNceGrad {
  Mat d_aggregate;
  double d_logit_scale = 0;
};
/// Gradient of l_infonce.
InfoNceGrad infonce_backward(const Mat& aggregate, const LossConfig& cfg);

struct CscResult {
  double var_pos = 0, var_neg = 0, l_csc = 0;
  // Var_neg fell below eps_var and was clamped.
  bool degenerate = false;
};

/// Variance of the active grain set for every pair, averaged over positives
/// (diagonal) and negatives (off-diagonal), combined per the variant.
CscResult csc(const std::vector<const Mat*>& grains, const LossConfig& cfg);
/// Gradient of l_csc w.r.t. each grain tensor, same order as `grains`.
std::vector<Mat> csc_backward(const std::vector<const Mat*>& grains, const LossConfig& cfg);

/// Variance of a small set of scores under the configured mode; 0 for one element.
double grain_variance(std::span<const double> values, VarianceMode mode);

struct LossReport {
  double l_t2v = 0, l_v2t = 0, l_infonce = 0;
  double var_pos = 0, var_neg = 0, l_csc = 0;
  double eta = 0;
  double total = 0;
  bool csc_degenerate = false;
};

/// total = l_infonce + eta * l_csc over the active grains of `scores`.
LossReport total_loss(const ScoreTensors& scores, const GrainSet& grains, const LossConfig& cfg);

struct LossGrad {
  ScoreTensors d_scores;  // aggregate entry unused; per-grain gradients
  double d_logit_scale = 0;
};
/// Gradient of `total` w.r.t. every grain tensor (through the aggregate mean and CSC).
LossGrad total_loss_backward(const ScoreTensors& scores, const GrainSet& grains,
                             const LossConfig& cfg);

}  // namespace glccl
