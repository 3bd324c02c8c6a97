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

#include "orlc/entropy.hpp"

#include <cmath>

#include "orlc/mathfn.hpp"
#include "orlc/util.hpp"

namespace orlc {

namespace {

constexpr double kLn2 = 0.6931471805599453094;

using math::exp_d;
using math::log2_d;
using math::logistic_d;

}  // namespace

double channel_bin_prob(double mu, double s, double v) {
  const double a = (v + 0.5 - mu) / s;
  const double b = (v - 0.5 - mu) / s;
  // Difference of CDFs; both arguments on the same side of 0 are evaluated in
  // the small tail to avoid cancellation against 1.
  if (b > 0.0) return logistic_d(-b) - logistic_d(-a);
  return logistic_d(a) - logistic_d(b);
}

Tensor quantize_train(const Tensor& y, uint64_t seed, Tape* tape) {
  Rng rng(mix64(seed, 0x6e6f6973u));  // noise stream
  Tensor noise = Tensor::zeros(y.shape());
  for (double& v : noise.values()) v = rng.uniform() - 0.5;
  return ops::add(y, noise, tape);
}

Tensor quantize_infer(const Tensor& y) {
  Tensor out = Tensor::zeros(y.shape());
  auto src = y.values();
  auto dst = out.values();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = std::round(src[i]);
  return out;
}

namespace {

struct BitsNode : OpNode {
  Tensor y, mu, log_scale, out;
  // Per-element derivatives of the bit count (zero where the floor is active).
  std::vector<double> dv, dmu, drho;
  int64_t channels = 0, per_channel = 0, chw = 0;

  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty()) return;
    const double gs = g[0];
    const size_t n = dv.size();
    if (y.requires_grad()) {
      double* gy = adj.get(y.handle()).data();
      for (size_t i = 0; i < n; ++i) gy[i] = std::fma(gs, dv[i], gy[i]);
    }
    if (mu.requires_grad()) {
      double* gm = adj.get(mu.handle()).data();
      for (size_t i = 0; i < n; ++i) {
        const int64_t c = (static_cast<int64_t>(i) % chw) / per_channel;
        gm[c] = std::fma(gs, dmu[i], gm[c]);
      }
    }
    if (log_scale.requires_grad()) {
      double* gr = adj.get(log_scale.handle()).data();
      for (size_t i = 0; i < n; ++i) {
        const int64_t c = (static_cast<int64_t>(i) % chw) / per_channel;
        gr[c] = std::fma(gs, drho[i], gr[c]);
      }
    }
  }
};

}  // namespace

Tensor bits_estimate(const Tensor& y_tilde, const Tensor& mu, const Tensor& log_scale,
                     Tape* tape) {
  if (y_tilde.rank() != 4) throw Error("bits_estimate: expected BxMxhxw latent");
  const int64_t M = y_tilde.dim(1);
  if (mu.numel() != M || log_scale.numel() != M) {
    throw Error(strfmt("bits_estimate: entropy params sized %lld/%lld do not match %lld channels",
                       static_cast<long long>(mu.numel()),
                       static_cast<long long>(log_scale.numel()), static_cast<long long>(M)));
  }
  const int64_t per_channel = y_tilde.dim(2) * y_tilde.dim(3);
  const int64_t chw = M * per_channel;
  const size_t n = y_tilde.values().size();
  const bool grad = tape != nullptr &&
                    (y_tilde.requires_grad() || mu.requires_grad() || log_scale.requires_grad());

  std::vector<double> scales(static_cast<size_t>(M));
  for (int64_t c = 0; c < M; ++c) scales[c] = exp_d(log_scale.values()[static_cast<size_t>(c)]);

  auto node = grad ? std::make_unique<BitsNode>() : nullptr;
  if (node) {
    node->dv.assign(n, 0.0);
    node->dmu.assign(n, 0.0);
    node->drho.assign(n, 0.0);
  }

  double total = 0.0;
  const double* v = y_tilde.values().data();
  for (size_t i = 0; i < n; ++i) {
    const int64_t c = (static_cast<int64_t>(i) % chw) / per_channel;
    const double m = mu.values()[static_cast<size_t>(c)];
    const double s = scales[static_cast<size_t>(c)];
    const double a = (v[i] + 0.5 - m) / s;
    const double b = (v[i] - 0.5 - m) / s;
    const double p = channel_bin_prob(m, s, v[i]);
    if (p > kProbFloor) {
      total += -log2_d(p);
      if (node) {
        const double sa = logistic_d(a);
        const double sb = logistic_d(b);
        const double da = sa * (1.0 - sa);
        const double db = sb * (1.0 - sb);
        const double dbits_dp = -1.0 / (p * kLn2);
        node->dv[i] = dbits_dp * (da - db) / s;
        node->dmu[i] = -node->dv[i];  // the bin is a function of v - mu
        node->drho[i] = dbits_dp * (-(a * da - b * db));
      }
    } else {
      total += -log2_d(kProbFloor);
      // floor active: constant bits, zero gradient
    }
  }
  Tensor out = Tensor::scalar(total);
  if (node) {
    out.set_requires_grad(true);
    node->y = y_tilde;
    node->mu = mu;
    node->log_scale = log_scale;
    node->out = out;
    node->channels = M;
    node->per_channel = per_channel;
    node->chw = chw;
    tape->push(std::move(node), out);
  }
  return out;
}

}  // namespace orlc
