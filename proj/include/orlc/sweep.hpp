// Copyright (c) the ORLC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ORLC_SWEEP_HPP_
#define ORLC_SWEEP_HPP_

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "orlc/proxy.hpp"
#include "orlc/train.hpp"

namespace orlc {

// The lambda grids the two objectives are swept over.
inline const std::vector<double> kProposedLambdas = {0.05, 0.02, 0.01, 0.005};
inline const std::vector<double> kHumanLambdas = {0.01, 0.005, 0.002, 0.001};

struct RDPoint {
  std::string objective;
  double lambda = 0.0;
  double bpp = 0.0;         // mean payload bpp over the eval split
  double psnr_full = 0.0;   // mean dB
  double psnr_object = 0.0; // mean dB over object pixels
  double acc_pre = std::numeric_limits<double>::quiet_NaN();  // original-trained proxy
  double acc_ft = std::numeric_limits<double>::quiet_NaN();   // fine-tuned-on-decoded proxy
  uint64_t seed = 0;
  std::string checkpoint;  // file name relative to the sweep output dir
};

struct EvalSummary {
  double bpp = 0.0;
  double psnr_full = 0.0;
  double psnr_object = 0.0;
  uint64_t clamped = 0;
};

// Encodes and decodes every sample of the split with the real coder and
// averages payload bpp / PSNR-full / PSNR-object (saturated values enter the
// mean at their capped 100 dB).
EvalSummary evaluate_checkpoint(const ModelParams& params, const DatasetManifest& val);

struct SweepConfig {
  TrainConfig base;  // objective/lambda/out_dir overridden per run
  std::filesystem::path out_dir;
  bool with_proxy = false;      // fill acc_pre / acc_ft columns
  bool reuse_existing = true;   // load checkpoints already present in out_dir
  ProxyConfig proxy;
};

// Trains (or loads) one checkpoint per (objective, lambda) and evaluates it.
// Writes rd_points.csv under cfg.out_dir; run directories are named
// <objective>_lam<lambda>.
std::vector<RDPoint> rd_sweep(const SweepConfig& cfg, const std::vector<Objective>& objectives,
                              const DatasetManifest& train_data, const DatasetManifest& val_data);

void write_rd_csv(const std::vector<RDPoint>& points, const std::filesystem::path& path);

// Linear interpolation of a PSNR column at a target bpp; points need not be
// sorted. Returns nothing if bpp is outside the curve's span.
std::optional<double> interp_at_bpp(const std::vector<RDPoint>& curve, double bpp,
                                    double RDPoint::*field);

// Lowest bpp covered by both curves, if their spans overlap.
std::optional<double> lowest_overlap_bpp(const std::vector<RDPoint>& a,
                                         const std::vector<RDPoint>& b);

std::string lambda_tag(double lambda);

}  // namespace orlc

#endif  // ORLC_SWEEP_HPP_
