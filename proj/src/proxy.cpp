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

#include "orlc/proxy.hpp"

#include <cmath>

#include "orlc/adam.hpp"
#include "orlc/bitstream.hpp"
#include "orlc/image_io.hpp"
#include "orlc/util.hpp"

namespace orlc {

void ProxyModel::for_each_param(const std::function<void(Tensor&)>& fn) {
  fn(c1w);
  fn(c1b);
  fn(c2w);
  fn(c2b);
  fn(fw);
  fn(fb);
}

std::vector<Tensor> ProxyModel::param_list() {
  std::vector<Tensor> out;
  for_each_param([&out](Tensor& t) { out.push_back(t); });
  return out;
}

ProxyModel init_proxy(const ProxyConfig& config, uint64_t seed) {
  if (config.num_classes < 2) throw ConfigError("proxy: num_classes must be >= 2");
  ProxyModel m;
  m.config = config;
  Rng rng(mix64(seed, 0x70727879u));
  auto limit = [](int64_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };
  m.c1w = Tensor::uniform({config.ch1, 3, 5, 5}, rng, -limit(75), limit(75));
  m.c1b = Tensor::zeros({config.ch1});
  m.c2w = Tensor::uniform({config.ch2, config.ch1, 5, 5}, rng, -limit(config.ch1 * 25),
                          limit(config.ch1 * 25));
  m.c2b = Tensor::zeros({config.ch2});
  // head sees the features pooled onto a 4x4 grid
  m.fw = Tensor::uniform({config.num_classes, config.ch2 * 16}, rng, -limit(config.ch2 * 16),
                         limit(config.ch2 * 16));
  m.fb = Tensor::zeros({config.num_classes});
  return m;
}

Tensor proxy_forward(const ProxyModel& model, const Tensor& images, Tape* tape) {
  // center pixel values
  Tensor h = ops::add(images, Tensor::full(images.shape(), -0.5), tape);
  h = ops::conv2d(h, model.c1w, model.c1b, 2, 2, tape);
  h = ops::leaky_relu(h, model.config.leaky_alpha, tape);
  h = ops::conv2d(h, model.c2w, model.c2b, 2, 2, tape);
  h = ops::leaky_relu(h, model.config.leaky_alpha, tape);
  if (h.dim(2) % 4 != 0 || h.dim(3) % 4 != 0) {
    throw Error("proxy_forward: image extents must leave features divisible by 4");
  }
  if (h.dim(2) > 4) h = ops::avg_pool2d(h, h.dim(2) / 4, tape);
  h = ops::flatten2d(h, tape);
  return ops::linear(h, model.fw, model.fb, tape);
}

ImageSet::ImageSet(const SampleCache& cache) {
  h_ = cache.height();
  w_ = cache.width();
  labels_ = cache.labels();
  images_.reserve(cache.size());
  for (size_t i = 0; i < cache.size(); ++i) {
    images_.push_back(image_to_u8(cache.image(i)));
  }
}

ImageSet::ImageSet(const SampleCache& cache, const ModelParams& codec) {
  h_ = cache.height();
  w_ = cache.width();
  labels_ = cache.labels();
  images_.reserve(cache.size());
  for (size_t i = 0; i < cache.size(); ++i) {
    const EncodedImage enc = encode_image(cache.image(i), codec);
    const Tensor dec = decode_image(enc.bytes, codec);
    images_.push_back(image_to_u8(dec));
  }
}

Tensor ImageSet::batch(const std::vector<size_t>& idx) const {
  const int64_t B = static_cast<int64_t>(idx.size());
  Tensor t = Tensor::zeros({B, 3, h_, w_});
  double* dst = t.values().data();
  const int64_t chw = 3 * h_ * w_;
  for (int64_t b = 0; b < B; ++b) {
    const auto& src = images_.at(idx[static_cast<size_t>(b)]);
    for (int64_t p = 0; p < chw; ++p) {
      dst[b * chw + p] = static_cast<double>(src[static_cast<size_t>(p)]) / 255.0;
    }
  }
  return t;
}

ProxyModel train_proxy(const ImageSet& data, const ProxyConfig& config, const ProxyModel* init) {
  if (data.size() == 0) throw Error("train_proxy: empty image set");
  ProxyModel model = init_proxy(config, config.seed);
  if (init != nullptr) {
    ProxyModel warm = *init;
    model.c1w = warm.c1w.clone();
    model.c1b = warm.c1b.clone();
    model.c2w = warm.c2w.clone();
    model.c2b = warm.c2b.clone();
    model.fw = warm.fw.clone();
    model.fb = warm.fb.clone();
    model.config = config;
  }
  model.for_each_param([](Tensor& t) { t.set_requires_grad(true); });
  std::vector<Tensor> plist = model.param_list();
  AdamState state;
  state.init_like(plist);
  AdamConfig adam;
  adam.lr = config.lr;

  Rng shuffle_rng(mix64(config.seed, 0x73687566u));
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  size_t cursor = order.size();  // trigger shuffle on first use

  Tape tape;
  for (int64_t step = 0; step < config.steps; ++step) {
    std::vector<size_t> idx;
    std::vector<int> labels;
    for (int64_t k = 0; k < config.batch_size; ++k) {
      if (cursor >= order.size()) {
        shuffle_rng.shuffle(order);
        cursor = 0;
      }
      idx.push_back(order[cursor]);
      labels.push_back(data.labels()[order[cursor]]);
      ++cursor;
    }
    const Tensor x = data.batch(idx);
    const Tensor logits = proxy_forward(model, x, &tape);
    const Tensor loss = ops::softmax_cross_entropy(logits, labels, &tape);
    ops::backward(loss, tape);
    std::vector<std::span<const double>> grads;
    for (Tensor& p : plist) grads.push_back(p.grad_mutable());
    adam_step(plist, grads, state, adam);
    for (Tensor& p : plist) p.zero_grad();
    tape.clear();
  }
  model.for_each_param([](Tensor& t) { t.set_requires_grad(false); });
  return model;
}

double eval_proxy(const ProxyModel& model, const ImageSet& data) {
  if (data.size() == 0) throw Error("eval_proxy: empty image set");
  const int C = model.config.num_classes;
  for (int label : data.labels()) {
    if (label >= C) {
      throw Error(strfmt("eval_proxy: label %d exceeds model classes %d", label, C));
    }
  }
  size_t correct = 0;
  const size_t kChunk = 64;
  for (size_t start = 0; start < data.size(); start += kChunk) {
    std::vector<size_t> idx;
    for (size_t i = start; i < data.size() && i < start + kChunk; ++i) idx.push_back(i);
    const Tensor logits = proxy_forward(model, data.batch(idx), nullptr);
    for (size_t b = 0; b < idx.size(); ++b) {
      int best = 0;
      double best_v = logits.values()[b * C];
      for (int j = 1; j < C; ++j) {
        const double v = logits.values()[b * C + j];
        if (v > best_v) {
          best_v = v;
          best = j;
        }
      }
      if (best == data.labels()[idx[b]]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace orlc
