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

#include "orlc/train.hpp"

#include <cmath>
#include <fstream>

#include "orlc/entropy.hpp"
#include "orlc/util.hpp"

namespace orlc {

const char* objective_name(Objective o) {
  return o == Objective::kHuman ? "human" : "proposed";
}

Objective objective_from_name(const std::string& name) {
  if (name == "human") return Objective::kHuman;
  if (name == "proposed") return Objective::kProposed;
  throw ConfigError("unknown objective '" + name + "' (expected human|proposed)");
}

void TrainConfig::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("train: lambda must be > 0");
  if (steps <= 0) throw ConfigError("train: steps must be > 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(adam.lr > 0.0)) throw ConfigError("train: learning rate must be > 0");
  if (log_every < 1) throw ConfigError("train: log_every must be >= 1");
  model.validate();
}

TrainResult train_codec(const TrainConfig& config, const DatasetManifest& data) {
  config.validate();
  if (data.rows.empty()) throw Error("train: empty dataset");

  const SampleCache cache(data);
  if (cache.height() % config.model.downscale() != 0 ||
      cache.width() % config.model.downscale() != 0) {
    throw Error(strfmt("train: dataset extents %lldx%lld not divisible by %lld",
                       static_cast<long long>(cache.height()),
                       static_cast<long long>(cache.width()),
                       static_cast<long long>(config.model.downscale())));
  }

  ModelParams params = init_params(config.model, config.param_seed);
  params.set_requires_grad(true);
  std::vector<Tensor> plist;
  params.for_each_param([&plist](const std::string&, Tensor& t) { plist.push_back(t); });
  AdamState state;
  state.init_like(plist);

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  const std::filesystem::path log_path = config.out_dir / "train_log.csv";
  std::ofstream log(log_path);
  if (!log) throw Error("train: cannot write " + log_path.string());
  log << "step,rate_bpp,distortion,total\n";

  TrainResult result;
  Tape tape;
  int64_t epoch = 0;
  std::vector<std::vector<size_t>> batches = make_batches(data, config.batch_size,
                                                          config.batch_seed, epoch);
  size_t batch_i = 0;

  for (int64_t step = 0; step < config.steps; ++step) {
    if (batch_i >= batches.size()) {
      ++epoch;
      batches = make_batches(data, config.batch_size, config.batch_seed, epoch);
      batch_i = 0;
    }
    const std::vector<size_t>& idx = batches[batch_i++];
    const Tensor x = cache.batch_images(idx);
    const Tensor m = cache.batch_masks(idx);
    const int64_t num_pixels = x.dim(0) * x.dim(2) * x.dim(3);

    const Tensor y = analysis(x, params, &tape);
    const Tensor y_tilde = quantize_train(y, mix64(config.noise_seed, static_cast<uint64_t>(step)),
                                          &tape);
    const Tensor bits = bits_estimate(y_tilde, params.ent_mu, params.ent_log_scale, &tape);
    const Tensor x_hat = synthesis(y_tilde, params, &tape);

    Tensor loss;
    if (config.objective == Objective::kHuman) {
      loss = loss_human(x, x_hat, bits, config.lambda, num_pixels, &tape);
    } else {
      loss = loss_proposed(x, x_hat, m, bits, config.lambda, num_pixels, &tape, config.mse_norm);
    }

    ops::backward(loss, tape);

    std::vector<std::span<const double>> grads;
    grads.reserve(plist.size());
    for (Tensor& p : plist) grads.push_back(p.grad_mutable());

    const bool applied = std::isfinite(loss.item()) && adam_step(plist, grads, state, config.adam);
    if (!applied) ++result.skipped_steps;

    params.zero_grads();
    tape.clear();

    if ((step % config.log_every) == 0 || step + 1 == config.steps) {
      const double rate_bpp = bits.item() / static_cast<double>(num_pixels);
      const double total = loss.item();
      log << strfmt("%lld,%.10g,%.10g,%.10g\n", static_cast<long long>(step), rate_bpp,
                    total - rate_bpp, total);
    }
    if (config.checkpoint_every > 0 && (step + 1) % config.checkpoint_every == 0 &&
        step + 1 != config.steps) {
      save_checkpoint(params, config.out_dir /
                                  strfmt("model_step%08lld.orlc", static_cast<long long>(step + 1)));
    }
  }

  log.close();
  result.final_checkpoint = config.out_dir / "model_final.orlc";
  save_checkpoint(params, result.final_checkpoint);
  result.params = std::move(params);
  result.log_path = log_path;
  return result;
}

}  // namespace orlc
