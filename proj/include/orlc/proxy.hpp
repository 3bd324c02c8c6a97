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

#ifndef ORLC_PROXY_HPP_
#define ORLC_PROXY_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "orlc/dataset.hpp"
#include "orlc/tensor.hpp"

namespace orlc {

// Small recognizer standing in for a full detection stack: two stride-2 conv
// blocks, global average pooling, linear head.
struct ProxyConfig {
  int num_classes = 3;
  int64_t ch1 = 16;
  int64_t ch2 = 32;
  double leaky_alpha = 0.2;
  double lr = 1e-3;
  int64_t batch_size = 16;
  int64_t steps = 1200;
  uint64_t seed = 11;
};

struct ProxyModel {
  ProxyConfig config;
  Tensor c1w, c1b, c2w, c2b, fw, fb;

  void for_each_param(const std::function<void(Tensor&)>& fn);
  std::vector<Tensor> param_list();
};

ProxyModel init_proxy(const ProxyConfig& config, uint64_t seed);

// Logits BxC for a batch of images.
Tensor proxy_forward(const ProxyModel& model, const Tensor& images, Tape* tape);

// Image source for proxy training/eval: original pixels or pixels decoded
// through a codec checkpoint. Decoded images are quantized to 8 bits, the
// same representation a saved file would have.
class ImageSet {
 public:
  // originals
  explicit ImageSet(const SampleCache& cache);
  // decoded through the codec
  ImageSet(const SampleCache& cache, const struct ModelParams& codec);

  size_t size() const { return images_.size(); }
  int64_t height() const { return h_; }
  int64_t width() const { return w_; }
  const std::vector<int>& labels() const { return labels_; }
  Tensor batch(const std::vector<size_t>& idx) const;

 private:
  int64_t h_ = 0, w_ = 0;
  std::vector<std::vector<uint8_t>> images_;
  std::vector<int> labels_;
};

// Cross-entropy training on the given image set; deterministic in seed.
// When init is non-null, training warm-starts from those weights.
ProxyModel train_proxy(const ImageSet& data, const ProxyConfig& config,
                       const ProxyModel* init = nullptr);

// Top-1 accuracy.
double eval_proxy(const ProxyModel& model, const ImageSet& data);

}  // namespace orlc

#endif  // ORLC_PROXY_HPP_
