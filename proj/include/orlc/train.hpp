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

#ifndef ORLC_TRAIN_HPP_
#define ORLC_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "orlc/adam.hpp"
#include "orlc/dataset.hpp"
#include "orlc/loss.hpp"
#include "orlc/transforms.hpp"

namespace orlc {

enum class Objective { kHuman, kProposed };

const char* objective_name(Objective o);
Objective objective_from_name(const std::string& name);

struct TrainConfig {
  Objective objective = Objective::kProposed;
  double lambda = 0.01;
  int64_t steps = 15000;
  int64_t batch_size = 8;
  AdamConfig adam;  // lr defaults to 1e-4
  uint64_t param_seed = 1;
  uint64_t noise_seed = 2;
  uint64_t batch_seed = 3;
  int64_t checkpoint_every = 0;  // 0: final checkpoint only
  int64_t log_every = 1;
  MseNorm mse_norm = MseNorm::kTotalPixels;
  ModelConfig model;
  std::filesystem::path out_dir;

  void validate() const;
};

struct TrainResult {
  ModelParams params;
  std::filesystem::path final_checkpoint;
  std::filesystem::path log_path;
  uint64_t skipped_steps = 0;  // non-finite gradient events
};

// Full training loop: analysis -> noisy quantization -> rate estimate ->
// synthesis -> selected objective -> backward -> Adam. Deterministic in the
// three seeds. Writes `train_log.csv` (step,rate_bpp,distortion,total) and
// `model_final.orlc` under out_dir.
TrainResult train_codec(const TrainConfig& config, const DatasetManifest& data);

}  // namespace orlc

#endif  // ORLC_TRAIN_HPP_
