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

#ifndef ORLC_TRANSFORMS_HPP_
#define ORLC_TRANSFORMS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "orlc/tensor.hpp"

namespace orlc {

struct ModelConfig {
  int64_t input_channels = 3;
  int64_t hidden_channels = 64;
  int64_t latent_channels = 48;
  int64_t num_down_layers = 4;   // stride-2 each; image extents must divide 2^L
  int64_t kernel_first = 5;      // first analysis layer
  int64_t kernel_rest = 3;       // remaining analysis layers
  double leaky_alpha = 0.2;

  void validate() const;
  int64_t downscale() const { return int64_t{1} << num_down_layers; }
};

// Synthesis mirrors analysis with stride-2 transposed convs. A kernel of 4
// with pad 1 is the smallest one satisfying (H-1)*2 - 2*pad + K == 2H, i.e.
// the decoder exactly doubles each extent per layer.
inline constexpr int64_t kUpKernel = 4;
inline constexpr int64_t kUpPad = 1;

struct ConvLayer {
  Tensor w;
  Tensor b;
};

// All learnable state: analysis/synthesis conv stacks plus the per-channel
// entropy model parameters (location and log-scale).
struct ModelParams {
  ModelConfig config;
  uint64_t seed = 0;
  std::vector<ConvLayer> analysis;
  std::vector<ConvLayer> synthesis;
  Tensor ent_mu;         // {latent_channels}
  Tensor ent_log_scale;  // {latent_channels}

  // Fixed iteration order; serialization, checksums and the optimizer all
  // depend on it.
  void for_each_param(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each_param(const std::function<void(const std::string&, const Tensor&)>& fn) const;
  void set_requires_grad(bool rg);
  void zero_grads();
  ModelParams clone() const;
};

ModelParams init_params(const ModelConfig& config, uint64_t seed);

// Encoder: Bx3xHxW in [0,1] -> latent BxMx(H/2^L)x(W/2^L).
Tensor analysis(const Tensor& x, const ModelParams& params, Tape* tape);
// Decoder: latent -> Bx3xHxW; unclamped (callers clamp for evaluation).
Tensor synthesis(const Tensor& y_hat, const ModelParams& params, Tape* tape);

// Checkpoint container, magic "ORLC". Round-trips bit-exactly.
std::vector<uint8_t> serialize_params(const ModelParams& params);
ModelParams deserialize_params(const uint8_t* data, size_t size);
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

// Checksum of the serialized parameters; embedded in bitstream headers so a
// decoder can refuse mismatched models.
uint64_t params_checksum(const ModelParams& params);

}  // namespace orlc

#endif  // ORLC_TRANSFORMS_HPP_
