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

#ifndef ORLC_TENSOR_HPP_
#define ORLC_TENSOR_HPP_

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "orlc/rng.hpp"

namespace orlc {

// Dense double tensor. Copies are shallow (shared storage); tensors are
// treated as immutable once built, except for gradient accumulation.
struct TensorImpl {
  std::vector<int64_t> shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until backward populates it
  bool requires_grad = false;
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int64_t> shape, bool requires_grad = false);
  static Tensor full(std::vector<int64_t> shape, double v, bool requires_grad = false);
  static Tensor from(std::vector<int64_t> shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);  // shape {1}
  static Tensor uniform(std::vector<int64_t> shape, Rng& rng, double lo, double hi,
                        bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<int64_t>& shape() const { return impl_->shape; }
  int64_t dim(size_t i) const { return impl_->shape[i]; }
  size_t rank() const { return impl_->shape.size(); }
  int64_t numel() const { return static_cast<int64_t>(impl_->values.size()); }
  bool same_shape(const Tensor& o) const { return impl_->shape == o.impl_->shape; }
  std::string shape_str() const;

  // Spans alias the tensor's storage; binding them to a temporary would
  // dangle, so rvalue access is disallowed.
  std::span<const double> values() const& { return impl_->values; }
  std::span<double> values() & { return impl_->values; }
  std::span<const double> values() const&& = delete;
  std::span<double> values() && = delete;
  double item() const;  // scalar tensors only
  double at(std::initializer_list<int64_t> idx) const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool rg) { impl_->requires_grad = rg; }
  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const double> grad() const;
  std::span<double> grad_mutable();
  void zero_grad() { impl_->grad.clear(); }

  // Deep copy of values (fresh storage, no grad, requires_grad preserved).
  Tensor clone() const;

  TensorImpl* impl() const { return impl_.get(); }
  const std::shared_ptr<TensorImpl>& handle() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl> impl_;
};

// Per-backward adjoint buffers, keyed by tensor identity. Kept separate from
// Tensor::grad so that running backward twice on one tape accumulates exactly
// twice the gradient.
class AdjointMap {
 public:
  void seed(const std::shared_ptr<TensorImpl>& t, double v);
  // Adjoint buffer for t, created zero-filled on first use.
  std::span<double> get(const std::shared_ptr<TensorImpl>& t);
  // Existing adjoint or empty span.
  std::span<const double> find(const TensorImpl* t) const;
  void flush_to_grads();

 private:
  struct Entry {
    std::shared_ptr<TensorImpl> tensor;
    std::vector<double> buf;
  };
  std::unordered_map<const TensorImpl*, Entry> map_;
};

// One recorded operation. Nodes hold shared handles to their operands, so a
// tape keeps every intermediate alive until cleared.
struct OpNode {
  virtual ~OpNode() = default;
  virtual void backward(AdjointMap& adj) const = 0;
};

// Ordered record of one forward pass.
class Tape {
 public:
  void push(std::unique_ptr<OpNode> node, const Tensor& output);
  void clear();
  size_t size() const { return nodes_.size(); }
  bool recorded(const Tensor& t) const { return outputs_.count(t.impl()) != 0; }
  const std::vector<std::unique_ptr<OpNode>>& nodes() const { return nodes_; }

 private:
  std::vector<std::unique_ptr<OpNode>> nodes_;
  std::unordered_set<const TensorImpl*> outputs_;
};

namespace ops {

// All ops record onto the tape when one is given; with tape == nullptr they
// run inference-only and the output does not require grad.

Tensor conv2d(const Tensor& in, const Tensor& w, const Tensor& bias, int64_t stride, int64_t pad,
              Tape* tape);
Tensor conv2d_transpose(const Tensor& in, const Tensor& w, const Tensor& bias, int64_t stride,
                        int64_t pad, Tape* tape);

Tensor add(const Tensor& a, const Tensor& b, Tape* tape);
Tensor sub(const Tensor& a, const Tensor& b, Tape* tape);
Tensor mul(const Tensor& a, const Tensor& b, Tape* tape);
Tensor scale(const Tensor& a, double c, Tape* tape);  // scalar-mul
Tensor leaky_relu(const Tensor& a, double alpha, Tape* tape);
Tensor clamp(const Tensor& a, double lo, double hi, Tape* tape);

// Mean of (a-b)^2 over all elements; scalar output.
Tensor reduce_mean_square_diff(const Tensor& a, const Tensor& b, Tape* tape);

// BxCxHxW -> BxC spatial mean.
Tensor global_avg_pool(const Tensor& a, Tape* tape);
// Non-overlapping k x k mean pooling; extents must divide k.
Tensor avg_pool2d(const Tensor& a, int64_t k, Tape* tape);
// BxCxHxW -> Bx(C*H*W).
Tensor flatten2d(const Tensor& a, Tape* tape);
// x: BxN, w: CxN, bias: C -> BxC
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias, Tape* tape);
// Mean cross-entropy with integrated softmax; labels are class indices.
Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels, Tape* tape);

void backward(const Tensor& loss, Tape& tape);

}  // namespace ops
}  // namespace orlc

#endif  // ORLC_TENSOR_HPP_
