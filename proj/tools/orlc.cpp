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

// orlc command line: dataset generation, training, encode/decode, evaluation
// and rate-distortion sweeps. Exit codes: 0 success, 2 bad usage or config,
// 1 runtime failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "orlc/bitstream.hpp"
#include "orlc/dataset.hpp"
#include "orlc/image_io.hpp"
#include "orlc/kernels.hpp"
#include "orlc/metrics.hpp"
#include "orlc/sweep.hpp"
#include "orlc/train.hpp"
#include "orlc/util.hpp"

namespace {

using nlohmann::json;
using namespace orlc;

// Values from --config fill in flags the user did not pass on the command
// line; explicit flags always win.
struct ConfigMerge {
  CLI::App* cmd = nullptr;
  json values;

  template <typename T>
  void fill(const std::string& flag, T& var) const {
    if (values.is_null() || !values.contains(flag)) return;
    if (cmd->count("--" + flag) > 0) return;
    var = values.at(flag).get<T>();
  }
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json();
  const auto bytes = read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void echo_config(const std::filesystem::path& out_dir, const json& resolved) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const std::string text = resolved.dump(2) + "\n";
  write_file(out_dir / "config.resolved.json",
             reinterpret_cast<const uint8_t*>(text.data()), text.size());
}

struct CommonModelFlags {
  int64_t hidden = 64;
  int64_t latent = 48;
  int64_t layers = 4;

  void attach(CLI::App* cmd) {
    cmd->add_option("--hidden-channels", hidden, "hidden channels of the transforms");
    cmd->add_option("--latent-channels", latent, "latent channels");
    cmd->add_option("--num-down-layers", layers, "stride-2 layers per transform");
  }
  ModelConfig to_model() const {
    ModelConfig m;
    m.hidden_channels = hidden;
    m.latent_channels = latent;
    m.num_down_layers = layers;
    return m;
  }
  void merge(const ConfigMerge& cm) {
    cm.fill("hidden-channels", hidden);
    cm.fill("latent-channels", latent);
    cm.fill("num-down-layers", layers);
  }
  json to_json() const {
    return {{"hidden-channels", hidden}, {"latent-channels", latent}, {"num-down-layers", layers}};
  }
};

int run(int argc, char** argv) {
  CLI::App app{"orlc: a learned image codec that spends its bits on object regions"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file providing defaults for flags")->expected(1);
  std::string backend;
  app.add_option("--backend", backend, "force kernel backend: scalar|avx2|avx512");

  // gen-data ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "generate the synthetic shapes dataset");
  GenConfig gen_cfg;
  std::string gen_out;
  gen->add_option("--seed", gen_cfg.seed, "generator seed");
  gen->add_option("--n-train", gen_cfg.n_train, "training samples");
  gen->add_option("--n-val", gen_cfg.n_val, "validation samples");
  gen->add_option("--size", gen_cfg.size, "square image size");
  gen->add_option("--num-classes", gen_cfg.num_classes, "shape classes (2 or 3)");
  gen->add_option("--out", gen_out, "output directory")->required();

  // train ------------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "train a codec");
  std::string tr_objective = "proposed";
  double tr_lambda = 0.0;
  std::string tr_data, tr_out, tr_norm = "total";
  TrainConfig tr_cfg;
  CommonModelFlags tr_model;
  tr->add_option("--objective", tr_objective, "human|proposed")->required();
  tr->add_option("--lambda", tr_lambda, "rate-distortion weight")->required();
  tr->add_option("--data", tr_data, "training manifest CSV")->required();
  tr->add_option("--out", tr_out, "output directory")->required();
  tr->add_option("--steps", tr_cfg.steps, "optimizer steps");
  tr->add_option("--batch-size", tr_cfg.batch_size, "batch size");
  tr->add_option("--lr", tr_cfg.adam.lr, "Adam learning rate");
  tr->add_option("--param-seed", tr_cfg.param_seed, "weight init seed");
  tr->add_option("--noise-seed", tr_cfg.noise_seed, "quantization noise seed");
  tr->add_option("--batch-seed", tr_cfg.batch_seed, "batch shuffling seed");
  tr->add_option("--checkpoint-every", tr_cfg.checkpoint_every, "periodic checkpoint cadence");
  tr->add_option("--log-every", tr_cfg.log_every, "log row cadence");
  tr->add_option("--mse-norm", tr_norm, "object MSE denominator: total|object");
  tr_model.attach(tr);

  // encode -----------------------------------------------------------------
  auto* en = app.add_subcommand("encode", "encode a PPM image to a .orlb bitstream");
  std::string en_ckpt, en_input, en_out;
  en->add_option("--ckpt", en_ckpt, "model checkpoint")->required();
  en->add_option("--input", en_input, "input PPM")->required();
  en->add_option("--out", en_out, "output .orlb path")->required();

  // decode -----------------------------------------------------------------
  auto* de = app.add_subcommand("decode", "decode a .orlb bitstream to a PPM image");
  std::string de_ckpt, de_input, de_out;
  de->add_option("--ckpt", de_ckpt, "model checkpoint")->required();
  de->add_option("--input", de_input, "input .orlb")->required();
  de->add_option("--out", de_out, "output PPM path")->required();

  // eval -------------------------------------------------------------------
  auto* ev = app.add_subcommand("eval",
                                "PSNR of an image pair, or codec metrics over a manifest");
  std::string ev_a, ev_b, ev_mask, ev_ckpt, ev_data, ev_out;
  ev->add_option("--image-a", ev_a, "first image (pair mode)");
  ev->add_option("--image-b", ev_b, "second image (pair mode)");
  ev->add_option("--mask", ev_mask, "object mask PGM (pair mode)");
  ev->add_option("--ckpt", ev_ckpt, "model checkpoint (codec mode)");
  ev->add_option("--data", ev_data, "eval manifest CSV (codec mode)");
  ev->add_option("--out", ev_out, "output directory (codec mode)");

  // rd-sweep ---------------------------------------------------------------
  auto* rd = app.add_subcommand("rd-sweep", "train/evaluate the lambda grids of both objectives");
  std::string rd_train, rd_val, rd_out, rd_objectives = "both";
  bool rd_with_proxy = false;
  bool rd_retrain = false;
  TrainConfig rd_base;
  CommonModelFlags rd_model;
  int64_t rd_proxy_steps = 1200;
  rd->add_option("--data-train", rd_train, "training manifest CSV")->required();
  rd->add_option("--data-val", rd_val, "validation manifest CSV")->required();
  rd->add_option("--out", rd_out, "output directory")->required();
  rd->add_option("--objectives", rd_objectives, "both|human|proposed");
  rd->add_option("--steps", rd_base.steps, "training steps per run");
  rd->add_option("--batch-size", rd_base.batch_size, "batch size");
  rd->add_option("--lr", rd_base.adam.lr, "Adam learning rate");
  rd->add_option("--param-seed", rd_base.param_seed, "weight init seed");
  rd->add_option("--noise-seed", rd_base.noise_seed, "quantization noise seed");
  rd->add_option("--batch-seed", rd_base.batch_seed, "batch shuffling seed");
  rd->add_flag("--with-proxy", rd_with_proxy, "also fill proxy accuracy columns");
  rd->add_flag("--retrain", rd_retrain, "ignore checkpoints already in --out");
  rd->add_option("--proxy-steps", rd_proxy_steps, "proxy training steps");
  rd_model.attach(rd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!backend.empty()) {
    if (backend == "scalar") {
      kern::force_backend(kern::Backend::kScalar);
    } else if (backend == "avx2") {
      kern::force_backend(kern::Backend::kAvx2);
    } else if (backend == "avx512") {
      kern::force_backend(kern::Backend::kAvx512);
    } else {
      throw ConfigError("unknown --backend: " + backend);
    }
  }

  const json file_cfg = load_config_file(config_path);

  if (gen->parsed()) {
    ConfigMerge cm{gen, file_cfg};
    cm.fill("seed", gen_cfg.seed);
    cm.fill("n-train", gen_cfg.n_train);
    cm.fill("n-val", gen_cfg.n_val);
    cm.fill("size", gen_cfg.size);
    cm.fill("num-classes", gen_cfg.num_classes);
    gen_cfg.out_dir = gen_out;
    const GeneratedDataset d = gen_synthetic_dataset(gen_cfg);
    echo_config(gen_out, json{{"command", "gen-data"},
                              {"seed", gen_cfg.seed},
                              {"n-train", gen_cfg.n_train},
                              {"n-val", gen_cfg.n_val},
                              {"size", gen_cfg.size},
                              {"num-classes", gen_cfg.num_classes},
                              {"out", gen_out}});
    std::printf("wrote %s and %s\n", d.train_manifest.string().c_str(),
                d.val_manifest.string().c_str());
    return 0;
  }

  if (tr->parsed()) {
    ConfigMerge cm{tr, file_cfg};
    cm.fill("objective", tr_objective);
    cm.fill("lambda", tr_lambda);
    cm.fill("steps", tr_cfg.steps);
    cm.fill("batch-size", tr_cfg.batch_size);
    cm.fill("lr", tr_cfg.adam.lr);
    cm.fill("param-seed", tr_cfg.param_seed);
    cm.fill("noise-seed", tr_cfg.noise_seed);
    cm.fill("batch-seed", tr_cfg.batch_seed);
    cm.fill("checkpoint-every", tr_cfg.checkpoint_every);
    cm.fill("log-every", tr_cfg.log_every);
    cm.fill("mse-norm", tr_norm);
    tr_model.merge(cm);

    tr_cfg.objective = objective_from_name(tr_objective);
    tr_cfg.lambda = tr_lambda;
    if (tr_norm == "total") {
      tr_cfg.mse_norm = MseNorm::kTotalPixels;
    } else if (tr_norm == "object") {
      tr_cfg.mse_norm = MseNorm::kObjectPixels;
    } else {
      throw ConfigError("--mse-norm must be total or object");
    }
    tr_cfg.model = tr_model.to_model();
    tr_cfg.out_dir = tr_out;
    tr_cfg.validate();

    json resolved = {{"command", "train"},
                     {"objective", tr_objective},
                     {"lambda", tr_lambda},
                     {"data", tr_data},
                     {"out", tr_out},
                     {"steps", tr_cfg.steps},
                     {"batch-size", tr_cfg.batch_size},
                     {"lr", tr_cfg.adam.lr},
                     {"param-seed", tr_cfg.param_seed},
                     {"noise-seed", tr_cfg.noise_seed},
                     {"batch-seed", tr_cfg.batch_seed},
                     {"checkpoint-every", tr_cfg.checkpoint_every},
                     {"log-every", tr_cfg.log_every},
                     {"mse-norm", tr_norm}};
    resolved.update(tr_model.to_json());
    echo_config(tr_out, resolved);

    const DatasetManifest data = load_manifest(tr_data);
    const TrainResult r = train_codec(tr_cfg, data);
    std::printf("final checkpoint: %s (skipped steps: %llu)\n",
                r.final_checkpoint.string().c_str(),
                static_cast<unsigned long long>(r.skipped_steps));
    return 0;
  }

  if (en->parsed()) {
    const ModelParams params = load_checkpoint(en_ckpt);
    const Tensor x = load_ppm(en_input);
    const EncodedImage enc = encode_image(x, params);
    write_file(en_out, enc.bytes);
    std::printf("payload_bytes=%llu bpp_payload=%.6f bpp_total=%.6f clamped=%llu\n",
                static_cast<unsigned long long>(enc.payload_bytes), enc.bpp_payload,
                enc.bpp_total, static_cast<unsigned long long>(enc.clamped));
    return 0;
  }

  if (de->parsed()) {
    const ModelParams params = load_checkpoint(de_ckpt);
    const auto bytes = read_file(de_input);
    const Tensor x = decode_image(bytes, params);
    save_ppm(de_out, x);
    std::printf("wrote %s\n", de_out.c_str());
    return 0;
  }

  if (ev->parsed()) {
    const bool pair_mode = !ev_a.empty() || !ev_b.empty();
    if (pair_mode) {
      if (ev_a.empty() || ev_b.empty()) {
        throw ConfigError("pair mode needs both --image-a and --image-b");
      }
      const Tensor a = load_ppm(ev_a);
      const Tensor b = load_ppm(ev_b);
      const PsnrResult full = psnr(a, b);
      std::printf("psnr_full=%.6f saturated=%d", full.db, full.saturated ? 1 : 0);
      if (!ev_mask.empty()) {
        const Tensor m = load_mask_pgm(ev_mask);
        const PsnrResult obj = psnr(a, b, &m);
        std::printf(" psnr_object=%.6f saturated_object=%d", obj.db, obj.saturated ? 1 : 0);
      }
      std::printf("\n");
      return 0;
    }
    if (ev_ckpt.empty() || ev_data.empty() || ev_out.empty()) {
      throw ConfigError("codec mode needs --ckpt, --data and --out");
    }
    const ModelParams params = load_checkpoint(ev_ckpt);
    const DatasetManifest data = load_manifest(ev_data);
    echo_config(ev_out, json{{"command", "eval"},
                             {"ckpt", ev_ckpt},
                             {"data", ev_data},
                             {"out", ev_out}});
    const SampleCache cache(data);
    std::string csv = "id,bpp_payload,psnr_full,psnr_object,saturated_full,saturated_object\n";
    double mean_bpp = 0.0, mean_full = 0.0, mean_obj = 0.0;
    for (size_t i = 0; i < cache.size(); ++i) {
      const Tensor x = cache.image(i);
      const Tensor m = cache.mask(i);
      const EncodedImage enc = encode_image(x, params);
      const Tensor dec = decode_image(enc.bytes, params);
      const PsnrResult full = psnr(x, dec);
      const PsnrResult obj = psnr(x, dec, &m);
      csv += strfmt("%s,%.10g,%.10g,%.10g,%d,%d\n", data.rows[i].id.c_str(), enc.bpp_payload,
                    full.db, obj.db, full.saturated ? 1 : 0, obj.saturated ? 1 : 0);
      mean_bpp += enc.bpp_payload;
      mean_full += full.db;
      mean_obj += obj.db;
    }
    const double n = static_cast<double>(cache.size());
    write_file(std::filesystem::path(ev_out) / "eval.csv",
               reinterpret_cast<const uint8_t*>(csv.data()), csv.size());
    std::printf("n=%zu mean_bpp=%.6f mean_psnr_full=%.4f mean_psnr_object=%.4f\n", cache.size(),
                mean_bpp / n, mean_full / n, mean_obj / n);
    return 0;
  }

  if (rd->parsed()) {
    ConfigMerge cm{rd, file_cfg};
    cm.fill("objectives", rd_objectives);
    cm.fill("steps", rd_base.steps);
    cm.fill("batch-size", rd_base.batch_size);
    cm.fill("lr", rd_base.adam.lr);
    cm.fill("param-seed", rd_base.param_seed);
    cm.fill("noise-seed", rd_base.noise_seed);
    cm.fill("batch-seed", rd_base.batch_seed);
    cm.fill("proxy-steps", rd_proxy_steps);
    rd_model.merge(cm);

    std::vector<Objective> objectives;
    if (rd_objectives == "both") {
      objectives = {Objective::kHuman, Objective::kProposed};
    } else {
      objectives = {objective_from_name(rd_objectives)};
    }
    SweepConfig cfg;
    cfg.base = rd_base;
    cfg.base.model = rd_model.to_model();
    cfg.out_dir = rd_out;
    cfg.with_proxy = rd_with_proxy;
    cfg.reuse_existing = !rd_retrain;
    cfg.proxy.steps = rd_proxy_steps;

    json resolved = {{"command", "rd-sweep"},
                     {"data-train", rd_train},
                     {"data-val", rd_val},
                     {"out", rd_out},
                     {"objectives", rd_objectives},
                     {"steps", cfg.base.steps},
                     {"batch-size", cfg.base.batch_size},
                     {"lr", cfg.base.adam.lr},
                     {"param-seed", cfg.base.param_seed},
                     {"noise-seed", cfg.base.noise_seed},
                     {"batch-seed", cfg.base.batch_seed},
                     {"with-proxy", rd_with_proxy},
                     {"proxy-steps", rd_proxy_steps}};
    resolved.update(rd_model.to_json());
    echo_config(rd_out, resolved);

    const DatasetManifest train_data = load_manifest(rd_train);
    const DatasetManifest val_data = load_manifest(rd_val);
    const auto points = rd_sweep(cfg, objectives, train_data, val_data);
    for (const RDPoint& p : points) {
      std::printf("%s lambda=%g bpp=%.5f psnr_full=%.3f psnr_object=%.3f\n", p.objective.c_str(),
                  p.lambda, p.bpp, p.psnr_full, p.psnr_object);
    }
    std::printf("wrote %s\n", (cfg.out_dir / "rd_points.csv").string().c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const orlc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
