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

#include "orlc/transforms.hpp"

#include <cmath>
#include <cstring>

#include "orlc/util.hpp"

namespace orlc {

namespace {

constexpr char kMagic[4] = {'O', 'R', 'L', 'C'};
constexpr uint32_t kVersion = 1;

struct LayerSpec {
  int64_t in_ch, out_ch, kernel, stride, pad;
};

std::vector<LayerSpec> analysis_spec(const ModelConfig& c) {
  std::vector<LayerSpec> spec;
  for (int64_t i = 0; i < c.num_down_layers; ++i) {
    const int64_t in = i == 0 ? c.input_channels : c.hidden_channels;
    const int64_t out = i == c.num_down_layers - 1 ? c.latent_channels : c.hidden_channels;
    const int64_t k = i == 0 ? c.kernel_first : c.kernel_rest;
    spec.push_back({in, out, k, 2, k / 2});
  }
  return spec;
}

std::vector<LayerSpec> synthesis_spec(const ModelConfig& c) {
  std::vector<LayerSpec> spec;
  for (int64_t i = 0; i < c.num_down_layers; ++i) {
    const int64_t in = i == 0 ? c.latent_channels : c.hidden_channels;
    const int64_t out = i == c.num_down_layers - 1 ? c.input_channels : c.hidden_channels;
    spec.push_back({in, out, kUpKernel, 2, kUpPad});
  }
  return spec;
}

}  // namespace

void ModelConfig::validate() const {
  if (input_channels <= 0 || hidden_channels <= 0 || latent_channels <= 0) {
    throw ConfigError("model config: channel counts must be positive");
  }
  if (num_down_layers <= 0 || num_down_layers > 16) {
    throw ConfigError("model config: num_down_layers must be in [1, 16]");
  }
  if (kernel_first < 1 || kernel_rest < 1) {
    throw ConfigError("model config: kernel sizes must be >= 1");
  }
  if ((kernel_first % 2) == 0 || (kernel_rest % 2) == 0) {
    throw ConfigError("model config: analysis kernels must be odd so stride-2 halves exactly");
  }
  if (!(leaky_alpha >= 0.0 && leaky_alpha < 1.0)) {
    throw ConfigError("model config: leaky_alpha must be in [0, 1)");
  }
}

void ModelParams::for_each_param(const std::function<void(const std::string&, Tensor&)>& fn) {
  for (size_t i = 0; i < analysis.size(); ++i) {
    fn("ana" + std::to_string(i) + ".w", analysis[i].w);
    fn("ana" + std::to_string(i) + ".b", analysis[i].b);
  }
  for (size_t i = 0; i < synthesis.size(); ++i) {
    fn("syn" + std::to_string(i) + ".w", synthesis[i].w);
    fn("syn" + std::to_string(i) + ".b", synthesis[i].b);
  }
  fn("ent.mu", ent_mu);
  fn("ent.log_scale", ent_log_scale);
}

void ModelParams::for_each_param(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
  const_cast<ModelParams*>(this)->for_each_param(
      [&fn](const std::string& name, Tensor& t) { fn(name, t); });
}

void ModelParams::set_requires_grad(bool rg) {
  for_each_param([rg](const std::string&, Tensor& t) { t.set_requires_grad(rg); });
}

void ModelParams::zero_grads() {
  for_each_param([](const std::string&, Tensor& t) { t.zero_grad(); });
}

ModelParams ModelParams::clone() const {
  ModelParams out;
  out.config = config;
  out.seed = seed;
  for (const ConvLayer& l : analysis) out.analysis.push_back({l.w.clone(), l.b.clone()});
  for (const ConvLayer& l : synthesis) out.synthesis.push_back({l.w.clone(), l.b.clone()});
  out.ent_mu = ent_mu.clone();
  out.ent_log_scale = ent_log_scale.clone();
  return out;
}

ModelParams init_params(const ModelConfig& config, uint64_t seed) {
  config.validate();
  ModelParams p;
  p.config = config;
  p.seed = seed;
  Rng rng(mix64(seed, 0x70617261u));  // parameter stream

  for (const LayerSpec& l : analysis_spec(config)) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(l.in_ch * l.kernel * l.kernel));
    ConvLayer layer;
    layer.w = Tensor::uniform({l.out_ch, l.in_ch, l.kernel, l.kernel}, rng, -limit, limit);
    layer.b = Tensor::zeros({l.out_ch});
    p.analysis.push_back(std::move(layer));
  }
  for (const LayerSpec& l : synthesis_spec(config)) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(l.in_ch * l.kernel * l.kernel));
    ConvLayer layer;
    layer.w = Tensor::uniform({l.in_ch, l.out_ch, l.kernel, l.kernel}, rng, -limit, limit);
    layer.b = Tensor::zeros({l.out_ch});
    p.synthesis.push_back(std::move(layer));
  }
  p.ent_mu = Tensor::zeros({config.latent_channels});
  p.ent_log_scale = Tensor::zeros({config.latent_channels});
  return p;
}

Tensor analysis(const Tensor& x, const ModelParams& params, Tape* tape) {
  const ModelConfig& c = params.config;
  if (x.rank() != 4 || x.dim(1) != c.input_channels) {
    throw Error(strfmt("analysis: expected Bx%lldxHxW input, got %s",
                       static_cast<long long>(c.input_channels), x.shape_str().c_str()));
  }
  const int64_t div = c.downscale();
  if (x.dim(2) % div != 0 || x.dim(3) % div != 0) {
    throw Error(strfmt("analysis: image extents %lldx%lld must be divisible by %lld",
                       static_cast<long long>(x.dim(2)), static_cast<long long>(x.dim(3)),
                       static_cast<long long>(div)));
  }
  Tensor h = x;
  const auto spec = analysis_spec(c);
  for (size_t i = 0; i < spec.size(); ++i) {
    h = ops::conv2d(h, params.analysis[i].w, params.analysis[i].b, spec[i].stride, spec[i].pad,
                    tape);
    if (i + 1 < spec.size()) h = ops::leaky_relu(h, c.leaky_alpha, tape);
  }
  return h;
}

Tensor synthesis(const Tensor& y_hat, const ModelParams& params, Tape* tape) {
  const ModelConfig& c = params.config;
  if (y_hat.rank() != 4 || y_hat.dim(1) != c.latent_channels) {
    throw Error(strfmt("synthesis: expected Bx%lldxhxw latent, got %s",
                       static_cast<long long>(c.latent_channels), y_hat.shape_str().c_str()));
  }
  Tensor h = y_hat;
  const auto spec = synthesis_spec(c);
  for (size_t i = 0; i < spec.size(); ++i) {
    h = ops::conv2d_transpose(h, params.synthesis[i].w, params.synthesis[i].b, spec[i].stride,
                              spec[i].pad, tape);
    if (i + 1 < spec.size()) h = ops::leaky_relu(h, c.leaky_alpha, tape);
  }
  return h;
}

std::vector<uint8_t> serialize_params(const ModelParams& params) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(params.config.input_channels));
  put_u32(out, static_cast<uint32_t>(params.config.hidden_channels));
  put_u32(out, static_cast<uint32_t>(params.config.latent_channels));
  put_u32(out, static_cast<uint32_t>(params.config.num_down_layers));
  put_u32(out, static_cast<uint32_t>(params.config.kernel_first));
  put_u32(out, static_cast<uint32_t>(params.config.kernel_rest));
  put_f64(out, params.config.leaky_alpha);
  put_u64(out, params.seed);

  uint32_t count = 0;
  params.for_each_param([&count](const std::string&, const Tensor&) { ++count; });
  put_u32(out, count);
  params.for_each_param([&out](const std::string& name, const Tensor& t) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<uint32_t>(t.rank()));
    for (int64_t d : t.shape()) put_u64(out, static_cast<uint64_t>(d));
    for (double v : t.values()) put_f64(out, v);
  });
  return out;
}

ModelParams deserialize_params(const uint8_t* data, size_t size) {
  ByteReader r(data, size);
  char magic[4];
  r.bytes(reinterpret_cast<uint8_t*>(magic), 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error("checkpoint: bad magic");
  const uint32_t version = r.u32();
  if (version != kVersion) {
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  }
  ModelConfig c;
  c.input_channels = r.u32();
  c.hidden_channels = r.u32();
  c.latent_channels = r.u32();
  c.num_down_layers = r.u32();
  c.kernel_first = r.u32();
  c.kernel_rest = r.u32();
  c.leaky_alpha = r.f64();
  c.validate();
  const uint64_t seed = r.u64();

  // Build the expected structure, then fill tensors by name.
  ModelParams p = init_params(c, seed);
  const uint32_t count = r.u32();
  uint32_t expected = 0;
  p.for_each_param([&expected](const std::string&, Tensor&) { ++expected; });
  if (count != expected) {
    throw Error(strfmt("checkpoint: expected %u tensors, found %u", expected, count));
  }
  p.for_each_param([&r](const std::string& name, Tensor& t) {
    const uint32_t name_len = r.u32();
    std::string got(name_len, '\0');
    r.bytes(reinterpret_cast<uint8_t*>(got.data()), name_len);
    if (got != name) throw Error("checkpoint: tensor order mismatch: expected " + name + ", found " + got);
    const uint32_t rank = r.u32();
    if (rank != t.rank()) throw Error("checkpoint: rank mismatch for " + name);
    for (size_t i = 0; i < rank; ++i) {
      const uint64_t d = r.u64();
      if (static_cast<int64_t>(d) != t.dim(i)) {
        throw Error("checkpoint: extent mismatch for " + name);
      }
    }
    for (double& v : t.values()) v = r.f64();
  });
  if (!r.at_end()) throw Error("checkpoint: trailing bytes");
  return p;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  write_file(path, serialize_params(params));
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  const std::vector<uint8_t> data = read_file(path);
  try {
    return deserialize_params(data.data(), data.size());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

uint64_t params_checksum(const ModelParams& params) {
  const std::vector<uint8_t> bytes = serialize_params(params);
  return fnv1a64(bytes.data(), bytes.size());
}

}  // namespace orlc
