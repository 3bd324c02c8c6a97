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

#include "orlc/tensor.hpp"

#include <cmath>
#include <numeric>

#include "orlc/kernels.hpp"
#include "orlc/mathfn.hpp"
#include "orlc/util.hpp"

namespace orlc {

namespace {

int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0) throw Error("tensor extents must be positive, got " + std::to_string(d));
    n *= d;
  }
  return n;
}

std::string shape_to_str(const std::vector<int64_t>& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out.empty() ? "scalar" : out;
}

}  // namespace

Tensor Tensor::zeros(std::vector<int64_t> shape, bool requires_grad) {
  auto impl = std::make_shared<TensorImpl>();
  const int64_t n = shape_numel(shape);
  impl->shape = std::move(shape);
  impl->values.assign(static_cast<size_t>(n), 0.0);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::full(std::vector<int64_t> shape, double v, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.values().begin(), t.values().end(), v);
  return t;
}

Tensor Tensor::from(std::vector<int64_t> shape, std::vector<double> values, bool requires_grad) {
  const int64_t n = shape_numel(shape);
  if (n != static_cast<int64_t>(values.size())) {
    throw Error(strfmt("tensor of shape %s needs %lld values, got %zu",
                       shape_to_str(shape).c_str(), static_cast<long long>(n), values.size()));
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->values = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double v, bool requires_grad) { return from({1}, {v}, requires_grad); }

Tensor Tensor::uniform(std::vector<int64_t> shape, Rng& rng, double lo, double hi,
                       bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

std::string Tensor::shape_str() const { return shape_to_str(impl_->shape); }

double Tensor::item() const {
  if (numel() != 1) throw Error("item() requires a scalar tensor, got shape " + shape_str());
  return impl_->values[0];
}

double Tensor::at(std::initializer_list<int64_t> idx) const {
  if (idx.size() != rank()) throw Error("at(): index rank mismatch");
  int64_t off = 0;
  size_t i = 0;
  for (int64_t v : idx) {
    off = off * impl_->shape[i] + v;
    ++i;
  }
  return impl_->values[static_cast<size_t>(off)];
}

std::span<const double> Tensor::grad() const {
  if (impl_->grad.empty()) {
    static const std::vector<double> kEmpty;
    return kEmpty;
  }
  return impl_->grad;
}

std::span<double> Tensor::grad_mutable() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
  return impl_->grad;
}

Tensor Tensor::clone() const {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = impl_->shape;
  impl->values = impl_->values;
  impl->requires_grad = impl_->requires_grad;
  return Tensor(std::move(impl));
}

void AdjointMap::seed(const std::shared_ptr<TensorImpl>& t, double v) {
  auto& e = map_[t.get()];
  if (e.buf.empty()) {
    e.tensor = t;
    e.buf.assign(t->values.size(), 0.0);
  }
  for (double& x : e.buf) x += v;
}

std::span<double> AdjointMap::get(const std::shared_ptr<TensorImpl>& t) {
  auto& e = map_[t.get()];
  if (e.buf.empty()) {
    e.tensor = t;
    e.buf.assign(t->values.size(), 0.0);
  }
  return e.buf;
}

std::span<const double> AdjointMap::find(const TensorImpl* t) const {
  auto it = map_.find(t);
  if (it == map_.end()) return {};
  return it->second.buf;
}

void AdjointMap::flush_to_grads() {
  for (auto& [ptr, e] : map_) {
    if (!e.tensor->requires_grad) continue;
    if (e.tensor->grad.empty()) e.tensor->grad.assign(e.tensor->values.size(), 0.0);
    kern::active().ew_acc(e.buf.data(), e.tensor->grad.data(), e.buf.size());
  }
}

void Tape::push(std::unique_ptr<OpNode> node, const Tensor& output) {
  nodes_.push_back(std::move(node));
  outputs_.insert(output.impl());
}

void Tape::clear() {
  nodes_.clear();
  outputs_.clear();
}

namespace ops {

namespace {

bool want_grad(Tape* tape, std::initializer_list<const Tensor*> inputs) {
  if (tape == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->defined() && t->requires_grad()) return true;
  }
  return false;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw Error(strfmt("%s: shape mismatch %s vs %s", op, a.shape_str().c_str(),
                       b.shape_str().c_str()));
  }
}

kern::ConvShape conv_shape(const Tensor& in, int64_t out_ch, int64_t k, int64_t stride,
                           int64_t pad, int64_t out_h, int64_t out_w) {
  kern::ConvShape s;
  s.batch = in.dim(0);
  s.in_ch = in.dim(1);
  s.in_h = in.dim(2);
  s.in_w = in.dim(3);
  s.out_ch = out_ch;
  s.kernel = k;
  s.stride = stride;
  s.pad = pad;
  s.out_h = out_h;
  s.out_w = out_w;
  return s;
}

struct Conv2dNode : OpNode {
  Tensor in, w, bias, out;
  kern::ConvShape s;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty()) return;
    if (in.requires_grad()) {
      // Gradient w.r.t. the input is the transposed conv of the output
      // gradient with the same weights, on the original input canvas.
      kern::ConvShape ts;
      ts.batch = s.batch;
      ts.in_ch = s.out_ch;
      ts.in_h = s.out_h;
      ts.in_w = s.out_w;
      ts.out_ch = s.in_ch;
      ts.kernel = s.kernel;
      ts.stride = s.stride;
      ts.pad = s.pad;
      ts.out_h = s.in_h;
      ts.out_w = s.in_w;
      kern::active().convt_fwd(g.data(), w.values().data(), nullptr,
                               adj.get(in.handle()).data(), ts, /*accumulate=*/true);
    }
    if (w.requires_grad() || bias.requires_grad()) {
      double* gw = w.requires_grad() ? adj.get(w.handle()).data() : nullptr;
      double* gb = bias.defined() && bias.requires_grad() ? adj.get(bias.handle()).data() : nullptr;
      if (gw != nullptr) {
        kern::active().conv2d_grad_w(g.data(), in.values().data(), gw, gb, s);
      } else if (gb != nullptr) {
        // Bias-only: sum the output gradient per channel.
        const int64_t n_out = s.out_h * s.out_w;
        for (int64_t b = 0; b < s.batch; ++b) {
          for (int64_t o = 0; o < s.out_ch; ++o) {
            gb[o] += kern::active().sum_all(g.data() + (b * s.out_ch + o) * n_out,
                                            static_cast<size_t>(n_out));
          }
        }
      }
    }
  }
};

struct ConvT2dNode : OpNode {
  Tensor in, w, bias, out;
  kern::ConvShape s;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty()) return;
    if (in.requires_grad()) {
      // Adjoint of the transposed conv is a plain conv with the same weights.
      kern::ConvShape cs;
      cs.batch = s.batch;
      cs.in_ch = s.out_ch;
      cs.in_h = s.out_h;
      cs.in_w = s.out_w;
      cs.out_ch = s.in_ch;
      cs.kernel = s.kernel;
      cs.stride = s.stride;
      cs.pad = s.pad;
      cs.out_h = s.in_h;
      cs.out_w = s.in_w;
      kern::active().conv2d_fwd(g.data(), w.values().data(), nullptr,
                                adj.get(in.handle()).data(), cs, /*accumulate=*/true);
    }
    if (w.requires_grad() || (bias.defined() && bias.requires_grad())) {
      double* gw = w.requires_grad() ? adj.get(w.handle()).data() : nullptr;
      double* gb = bias.defined() && bias.requires_grad() ? adj.get(bias.handle()).data() : nullptr;
      if (gw != nullptr) {
        kern::active().convt_grad_w(g.data(), in.values().data(), gw, gb, s);
      } else if (gb != nullptr) {
        const int64_t n_out = s.out_h * s.out_w;
        for (int64_t b = 0; b < s.batch; ++b) {
          for (int64_t o = 0; o < s.out_ch; ++o) {
            gb[o] += kern::active().sum_all(g.data() + (b * s.out_ch + o) * n_out,
                                            static_cast<size_t>(n_out));
          }
        }
      }
    }
  }
};

enum class BinKind { kAdd, kSub, kMul };

struct BinNode : OpNode {
  Tensor a, b, out;
  BinKind kind;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty()) return;
    const size_t n = g.size();
    const auto& k = kern::active();
    if (a.requires_grad()) {
      double* ga = adj.get(a.handle()).data();
      if (kind == BinKind::kMul) {
        k.ew_mul_acc(g.data(), b.values().data(), ga, n);
      } else {
        k.ew_acc(g.data(), ga, n);
      }
    }
    if (b.requires_grad()) {
      double* gb = adj.get(b.handle()).data();
      switch (kind) {
        case BinKind::kAdd:
          k.ew_acc(g.data(), gb, n);
          break;
        case BinKind::kSub:
          k.ew_axpy(-1.0, g.data(), gb, n);
          break;
        case BinKind::kMul:
          k.ew_mul_acc(g.data(), a.values().data(), gb, n);
          break;
      }
    }
  }
};

struct ScaleNode : OpNode {
  Tensor a, out;
  double c;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty() || !a.requires_grad()) return;
    kern::active().ew_axpy(c, g.data(), adj.get(a.handle()).data(), g.size());
  }
};

struct LreluNode : OpNode {
  Tensor a, out;
  double alpha;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty() || !a.requires_grad()) return;
    kern::active().lrelu_bwd(a.values().data(), g.data(), alpha, adj.get(a.handle()).data(),
                             g.size());
  }
};

struct ClampNode : OpNode {
  Tensor a, out;
  double lo, hi;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty() || !a.requires_grad()) return;
    kern::active().clamp_bwd(a.values().data(), g.data(), lo, hi, adj.get(a.handle()).data(),
                             g.size());
  }
};

struct MsdNode : OpNode {
  Tensor a, b, out;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty()) return;
    const size_t n = a.values().size();
    const double c = 2.0 * g[0] / static_cast<double>(n);
    if (a.requires_grad()) {
      kern::active().ew_diff_axpy(c, a.values().data(), b.values().data(),
                                  adj.get(a.handle()).data(), n);
    }
    if (b.requires_grad()) {
      kern::active().ew_diff_axpy(-c, a.values().data(), b.values().data(),
                                  adj.get(b.handle()).data(), n);
    }
  }
};

struct GapNode : OpNode {
  Tensor a, out;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty() || !a.requires_grad()) return;
    const int64_t planes = a.dim(0) * a.dim(1);
    const int64_t hw = a.dim(2) * a.dim(3);
    double* ga = adj.get(a.handle()).data();
    for (int64_t p = 0; p < planes; ++p) {
      const double gp = g[static_cast<size_t>(p)] / static_cast<double>(hw);
      double* dst = ga + p * hw;
      for (int64_t i = 0; i < hw; ++i) dst[i] += gp;
    }
  }
};

struct AvgPoolNode : OpNode {
  Tensor a, out;
  int64_t k;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty() || !a.requires_grad()) return;
    const int64_t planes = a.dim(0) * a.dim(1);
    const int64_t H = a.dim(2), W = a.dim(3);
    const int64_t oh = H / k, ow = W / k;
    const double inv = 1.0 / static_cast<double>(k * k);
    double* ga = adj.get(a.handle()).data();
    for (int64_t p = 0; p < planes; ++p) {
      for (int64_t y = 0; y < oh; ++y) {
        for (int64_t x = 0; x < ow; ++x) {
          const double gv = g[static_cast<size_t>((p * oh + y) * ow + x)] * inv;
          for (int64_t dy = 0; dy < k; ++dy) {
            double* row = ga + (p * H + y * k + dy) * W + x * k;
            for (int64_t dx = 0; dx < k; ++dx) row[dx] += gv;
          }
        }
      }
    }
  }
};

struct FlattenNode : OpNode {
  Tensor a, out;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty() || !a.requires_grad()) return;
    kern::active().ew_acc(g.data(), adj.get(a.handle()).data(), g.size());
  }
};

struct LinearNode : OpNode {
  Tensor x, w, bias, out;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty()) return;
    const int64_t B = x.dim(0), N = x.dim(1), C = w.dim(0);
    if (x.requires_grad()) {
      double* gx = adj.get(x.handle()).data();
      for (int64_t b = 0; b < B; ++b) {
        for (int64_t j = 0; j < C; ++j) {
          const double gj = g[static_cast<size_t>(b * C + j)];
          const double* wr = w.values().data() + j * N;
          double* gxr = gx + b * N;
          for (int64_t i = 0; i < N; ++i) gxr[i] = std::fma(gj, wr[i], gxr[i]);
        }
      }
    }
    if (w.requires_grad()) {
      double* gw = adj.get(w.handle()).data();
      for (int64_t b = 0; b < B; ++b) {
        const double* xr = x.values().data() + b * N;
        for (int64_t j = 0; j < C; ++j) {
          const double gj = g[static_cast<size_t>(b * C + j)];
          double* gwr = gw + j * N;
          for (int64_t i = 0; i < N; ++i) gwr[i] = std::fma(gj, xr[i], gwr[i]);
        }
      }
    }
    if (bias.defined() && bias.requires_grad()) {
      double* gb = adj.get(bias.handle()).data();
      for (int64_t b = 0; b < B; ++b) {
        for (int64_t j = 0; j < C; ++j) gb[j] += g[static_cast<size_t>(b * C + j)];
      }
    }
  }
};

struct CeNode : OpNode {
  Tensor logits, out;
  Tensor probs;  // saved softmax, BxC
  std::vector<int> labels;
  void backward(AdjointMap& adj) const override {
    auto g = adj.find(out.impl());
    if (g.empty() || !logits.requires_grad()) return;
    const int64_t B = logits.dim(0), C = logits.dim(1);
    const double gs = g[0] / static_cast<double>(B);
    double* gl = adj.get(logits.handle()).data();
    const double* p = probs.values().data();
    for (int64_t b = 0; b < B; ++b) {
      for (int64_t j = 0; j < C; ++j) {
        const double onehot = (j == labels[static_cast<size_t>(b)]) ? 1.0 : 0.0;
        gl[b * C + j] += gs * (p[b * C + j] - onehot);
      }
    }
  }
};

}  // namespace

Tensor conv2d(const Tensor& in, const Tensor& w, const Tensor& bias, int64_t stride, int64_t pad,
              Tape* tape) {
  if (in.rank() != 4 || w.rank() != 4) {
    throw Error(strfmt("conv2d: expected rank-4 input and weight, got %s and %s",
                       in.shape_str().c_str(), w.shape_str().c_str()));
  }
  if (in.dim(1) != w.dim(1)) {
    throw Error(strfmt("conv2d: input channels do not match weight channels: input %s, weight %s",
                       in.shape_str().c_str(), w.shape_str().c_str()));
  }
  if (w.dim(2) != w.dim(3)) throw Error("conv2d: only square kernels supported");
  if (stride < 1 || pad < 0) throw Error("conv2d: stride must be >= 1 and pad >= 0");
  const int64_t K = w.dim(2);
  if (in.dim(2) + 2 * pad < K || in.dim(3) + 2 * pad < K) {
    throw Error(strfmt("conv2d: kernel %lld too large for padded input %s (pad %lld)",
                       static_cast<long long>(K), in.shape_str().c_str(),
                       static_cast<long long>(pad)));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != w.dim(0))) {
    throw Error(strfmt("conv2d: bias shape %s does not match output channels of weight %s",
                       bias.shape_str().c_str(), w.shape_str().c_str()));
  }
  const int64_t out_h = (in.dim(2) + 2 * pad - K) / stride + 1;
  const int64_t out_w = (in.dim(3) + 2 * pad - K) / stride + 1;
  kern::ConvShape s = conv_shape(in, w.dim(0), K, stride, pad, out_h, out_w);
  Tensor out = Tensor::zeros({s.batch, s.out_ch, out_h, out_w});
  kern::active().conv2d_fwd(in.values().data(), w.values().data(),
                            bias.defined() ? bias.values().data() : nullptr, out.values().data(),
                            s, false);
  if (want_grad(tape, {&in, &w, &bias})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<Conv2dNode>();
    node->in = in;
    node->w = w;
    node->bias = bias;
    node->out = out;
    node->s = s;
    tape->push(std::move(node), out);
  }
  return out;
}

Tensor conv2d_transpose(const Tensor& in, const Tensor& w, const Tensor& bias, int64_t stride,
                        int64_t pad, Tape* tape) {
  if (in.rank() != 4 || w.rank() != 4) {
    throw Error(strfmt("conv2d_transpose: expected rank-4 input and weight, got %s and %s",
                       in.shape_str().c_str(), w.shape_str().c_str()));
  }
  if (in.dim(1) != w.dim(0)) {
    throw Error(strfmt(
        "conv2d_transpose: input channels do not match weight channels: input %s, weight %s",
        in.shape_str().c_str(), w.shape_str().c_str()));
  }
  if (w.dim(2) != w.dim(3)) throw Error("conv2d_transpose: only square kernels supported");
  if (stride < 1 || pad < 0) throw Error("conv2d_transpose: stride must be >= 1 and pad >= 0");
  const int64_t K = w.dim(2);
  const int64_t out_h = (in.dim(2) - 1) * stride - 2 * pad + K;
  const int64_t out_w = (in.dim(3) - 1) * stride - 2 * pad + K;
  if (out_h <= 0 || out_w <= 0) {
    throw Error(strfmt("conv2d_transpose: computed output extent %lldx%lld is not positive",
                       static_cast<long long>(out_h), static_cast<long long>(out_w)));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != w.dim(1))) {
    throw Error(strfmt("conv2d_transpose: bias shape %s does not match output channels %lld",
                       bias.shape_str().c_str(), static_cast<long long>(w.dim(1))));
  }
  kern::ConvShape s = conv_shape(in, w.dim(1), K, stride, pad, out_h, out_w);
  Tensor out = Tensor::zeros({s.batch, s.out_ch, out_h, out_w});
  kern::active().convt_fwd(in.values().data(), w.values().data(),
                           bias.defined() ? bias.values().data() : nullptr, out.values().data(), s,
                           false);
  if (want_grad(tape, {&in, &w, &bias})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<ConvT2dNode>();
    node->in = in;
    node->w = w;
    node->bias = bias;
    node->out = out;
    node->s = s;
    tape->push(std::move(node), out);
  }
  return out;
}

namespace {

Tensor binary_op(const Tensor& a, const Tensor& b, BinKind kind, const char* name, Tape* tape) {
  require_same_shape(a, b, name);
  Tensor out = Tensor::zeros(a.shape());
  const auto& k = kern::active();
  const size_t n = a.values().size();
  switch (kind) {
    case BinKind::kAdd:
      k.ew_add(a.values().data(), b.values().data(), out.values().data(), n);
      break;
    case BinKind::kSub:
      k.ew_sub(a.values().data(), b.values().data(), out.values().data(), n);
      break;
    case BinKind::kMul:
      k.ew_mul(a.values().data(), b.values().data(), out.values().data(), n);
      break;
  }
  if (want_grad(tape, {&a, &b})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<BinNode>();
    node->a = a;
    node->b = b;
    node->out = out;
    node->kind = kind;
    tape->push(std::move(node), out);
  }
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b, Tape* tape) {
  return binary_op(a, b, BinKind::kAdd, "add", tape);
}
Tensor sub(const Tensor& a, const Tensor& b, Tape* tape) {
  return binary_op(a, b, BinKind::kSub, "sub", tape);
}
Tensor mul(const Tensor& a, const Tensor& b, Tape* tape) {
  return binary_op(a, b, BinKind::kMul, "mul", tape);
}

Tensor scale(const Tensor& a, double c, Tape* tape) {
  Tensor out = Tensor::zeros(a.shape());
  kern::active().ew_scale(a.values().data(), c, out.values().data(), a.values().size());
  if (want_grad(tape, {&a})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<ScaleNode>();
    node->a = a;
    node->out = out;
    node->c = c;
    tape->push(std::move(node), out);
  }
  return out;
}

Tensor leaky_relu(const Tensor& a, double alpha, Tape* tape) {
  Tensor out = Tensor::zeros(a.shape());
  kern::active().lrelu_fwd(a.values().data(), alpha, out.values().data(), a.values().size());
  if (want_grad(tape, {&a})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<LreluNode>();
    node->a = a;
    node->out = out;
    node->alpha = alpha;
    tape->push(std::move(node), out);
  }
  return out;
}

Tensor clamp(const Tensor& a, double lo, double hi, Tape* tape) {
  if (!(lo <= hi)) throw Error("clamp: lo must be <= hi");
  Tensor out = Tensor::zeros(a.shape());
  kern::active().clamp_fwd(a.values().data(), lo, hi, out.values().data(), a.values().size());
  if (want_grad(tape, {&a})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<ClampNode>();
    node->a = a;
    node->out = out;
    node->lo = lo;
    node->hi = hi;
    tape->push(std::move(node), out);
  }
  return out;
}

Tensor reduce_mean_square_diff(const Tensor& a, const Tensor& b, Tape* tape) {
  require_same_shape(a, b, "reduce_mean_square_diff");
  const size_t n = a.values().size();
  const double sum = kern::active().sq_diff_sum(a.values().data(), b.values().data(), n);
  Tensor out = Tensor::scalar(sum / static_cast<double>(n));
  if (want_grad(tape, {&a, &b})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<MsdNode>();
    node->a = a;
    node->b = b;
    node->out = out;
    tape->push(std::move(node), out);
  }
  return out;
}

Tensor global_avg_pool(const Tensor& a, Tape* tape) {
  if (a.rank() != 4) throw Error("global_avg_pool: expected rank-4 input, got " + a.shape_str());
  const int64_t planes = a.dim(0) * a.dim(1);
  const int64_t hw = a.dim(2) * a.dim(3);
  Tensor out = Tensor::zeros({a.dim(0), a.dim(1)});
  for (int64_t p = 0; p < planes; ++p) {
    out.values()[static_cast<size_t>(p)] =
        kern::active().sum_all(a.values().data() + p * hw, static_cast<size_t>(hw)) /
        static_cast<double>(hw);
  }
  if (want_grad(tape, {&a})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<GapNode>();
    node->a = a;
    node->out = out;
    tape->push(std::move(node), out);
  }
  return out;
}

Tensor avg_pool2d(const Tensor& a, int64_t k, Tape* tape) {
  if (a.rank() != 4) throw Error("avg_pool2d: expected rank-4 input, got " + a.shape_str());
  if (k < 1 || a.dim(2) % k != 0 || a.dim(3) % k != 0) {
    throw Error(strfmt("avg_pool2d: extents %s must divide the window %lld",
                       a.shape_str().c_str(), static_cast<long long>(k)));
  }
  const int64_t planes = a.dim(0) * a.dim(1);
  const int64_t H = a.dim(2), W = a.dim(3);
  const int64_t oh = H / k, ow = W / k;
  Tensor out = Tensor::zeros({a.dim(0), a.dim(1), oh, ow});
  const double inv = 1.0 / static_cast<double>(k * k);
  const double* src = a.values().data();
  double* dst = out.values().data();
  for (int64_t p = 0; p < planes; ++p) {
    for (int64_t y = 0; y < oh; ++y) {
      for (int64_t x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (int64_t dy = 0; dy < k; ++dy) {
          const double* row = src + (p * H + y * k + dy) * W + x * k;
          for (int64_t dx = 0; dx < k; ++dx) acc += row[dx];
        }
        dst[(p * oh + y) * ow + x] = acc * inv;
      }
    }
  }
  if (want_grad(tape, {&a})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<AvgPoolNode>();
    node->a = a;
    node->out = out;
    node->k = k;
    tape->push(std::move(node), out);
  }
  return out;
}

Tensor flatten2d(const Tensor& a, Tape* tape) {
  if (a.rank() != 4) throw Error("flatten2d: expected rank-4 input, got " + a.shape_str());
  Tensor out = Tensor::from({a.dim(0), a.dim(1) * a.dim(2) * a.dim(3)},
                            std::vector<double>(a.values().begin(), a.values().end()));
  if (want_grad(tape, {&a})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<FlattenNode>();
    node->a = a;
    node->out = out;
    tape->push(std::move(node), out);
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias, Tape* tape) {
  if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(1)) {
    throw Error(strfmt("linear: incompatible shapes x=%s w=%s", x.shape_str().c_str(),
                       w.shape_str().c_str()));
  }
  const int64_t B = x.dim(0), N = x.dim(1), C = w.dim(0);
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != C)) {
    throw Error("linear: bias shape mismatch");
  }
  Tensor out = Tensor::zeros({B, C});
  for (int64_t b = 0; b < B; ++b) {
    const double* xr = x.values().data() + b * N;
    for (int64_t j = 0; j < C; ++j) {
      double acc = bias.defined() ? bias.values()[static_cast<size_t>(j)] : 0.0;
      const double* wr = w.values().data() + j * N;
      for (int64_t i = 0; i < N; ++i) acc = std::fma(xr[i], wr[i], acc);
      out.values()[static_cast<size_t>(b * C + j)] = acc;
    }
  }
  if (want_grad(tape, {&x, &w, &bias})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<LinearNode>();
    node->x = x;
    node->w = w;
    node->bias = bias;
    node->out = out;
    tape->push(std::move(node), out);
  }
  return out;
}

Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels, Tape* tape) {
  if (logits.rank() != 2) throw Error("softmax_cross_entropy: expected BxC logits");
  const int64_t B = logits.dim(0), C = logits.dim(1);
  if (static_cast<int64_t>(labels.size()) != B) {
    throw Error("softmax_cross_entropy: label count does not match batch");
  }
  Tensor probs = Tensor::zeros({B, C});
  double total = 0.0;
  for (int64_t b = 0; b < B; ++b) {
    const double* l = logits.values().data() + b * C;
    const int label = labels[static_cast<size_t>(b)];
    if (label < 0 || label >= C) throw Error("softmax_cross_entropy: label out of range");
    double m = l[0];
    for (int64_t j = 1; j < C; ++j) m = l[j] > m ? l[j] : m;
    double z = 0.0;
    double* p = probs.values().data() + b * C;
    for (int64_t j = 0; j < C; ++j) {
      p[j] = math::exp_d(l[j] - m);
      z += p[j];
    }
    for (int64_t j = 0; j < C; ++j) p[j] /= z;
    total += math::log_d(z) + m - l[label];
  }
  Tensor out = Tensor::scalar(total / static_cast<double>(B));
  if (want_grad(tape, {&logits})) {
    out.set_requires_grad(true);
    auto node = std::make_unique<CeNode>();
    node->logits = logits;
    node->out = out;
    node->probs = probs;
    node->labels = labels;
    tape->push(std::move(node), out);
  }
  return out;
}

void backward(const Tensor& loss, Tape& tape) {
  if (!loss.defined() || loss.numel() != 1) {
    throw Error("backward: loss must be a scalar tensor");
  }
  if (!tape.recorded(loss)) {
    throw Error("backward: loss was not produced under this tape");
  }
  AdjointMap adj;
  adj.seed(loss.handle(), 1.0);
  const auto& nodes = tape.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    (*it)->backward(adj);
  }
  adj.flush_to_grads();
}

}  // namespace ops
}  // namespace orlc
