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

#include "orlc/loss.hpp"

#include "orlc/util.hpp"

namespace orlc {

void validate_binary_mask(const Tensor& mask) {
  for (double v : mask.values()) {
    if (v != 0.0 && v != 1.0) {
      throw Error(strfmt("mask is not binary: found value %.17g", v));
    }
  }
}

double mask_coverage(const Tensor& mask) {
  double ones = 0.0;
  for (double v : mask.values()) ones += v;
  return ones / static_cast<double>(mask.numel());
}

namespace {

// Returns the mask replicated across the image's channel dimension, or the
// mask itself when shapes already agree. The result never requires grad.
Tensor broadcast_mask(const Tensor& image, const Tensor& mask) {
  if (mask.same_shape(image)) return mask;
  if (image.rank() != 4 || mask.rank() != 4 || mask.dim(1) != 1 || mask.dim(0) != image.dim(0) ||
      mask.dim(2) != image.dim(2) || mask.dim(3) != image.dim(3)) {
    throw Error(strfmt("mask_apply: mask %s does not match image %s", mask.shape_str().c_str(),
                       image.shape_str().c_str()));
  }
  const int64_t B = image.dim(0), C = image.dim(1), HW = image.dim(2) * image.dim(3);
  Tensor out = Tensor::zeros(image.shape());
  const double* src = mask.values().data();
  double* dst = out.values().data();
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t c = 0; c < C; ++c) {
      std::copy(src + b * HW, src + (b + 1) * HW, dst + (b * C + c) * HW);
    }
  }
  return out;
}

}  // namespace

Tensor mask_apply(const Tensor& image, const Tensor& mask, Tape* tape) {
  validate_binary_mask(mask);
  Tensor m = broadcast_mask(image, mask);
  m.set_requires_grad(false);
  return ops::mul(image, m, tape);
}

Tensor object_mse(const Tensor& b, const Tensor& c, const Tensor& mask_b, const Tensor& mask_c,
                  Tape* tape, MseNorm norm) {
  if (!b.same_shape(c)) {
    throw Error(strfmt("object_mse: image shapes differ: %s vs %s", b.shape_str().c_str(),
                       c.shape_str().c_str()));
  }
  Tensor mb = mask_apply(b, mask_b, tape);
  Tensor mc = mask_apply(c, mask_c, tape);
  Tensor mse = ops::reduce_mean_square_diff(mb, mc, tape);
  if (norm == MseNorm::kTotalPixels) return mse;

  // Object normalization: rescale so the denominator is the number of
  // elements covered by either mask.
  const Tensor eb = broadcast_mask(b, mask_b);
  const Tensor ec = broadcast_mask(c, mask_c);
  int64_t covered = 0;
  for (int64_t i = 0; i < eb.numel(); ++i) {
    if (eb.values()[static_cast<size_t>(i)] != 0.0 || ec.values()[static_cast<size_t>(i)] != 0.0) {
      ++covered;
    }
  }
  if (covered == 0) throw Error("object_mse: object normalization with empty masks");
  return ops::scale(mse, static_cast<double>(b.numel()) / static_cast<double>(covered), tape);
}

Tensor loss_human(const Tensor& x, const Tensor& x_hat, const Tensor& bits, double lambda,
                  int64_t num_pixels, Tape* tape) {
  if (!(lambda > 0.0)) throw Error("loss: lambda must be positive");
  if (num_pixels <= 0) throw Error("loss: num_pixels must be positive");
  Tensor rate = ops::scale(bits, 1.0 / static_cast<double>(num_pixels), tape);
  Tensor mse = ops::reduce_mean_square_diff(x, x_hat, tape);
  Tensor dist = ops::scale(mse, lambda * kPixelScaleSq, tape);
  return ops::add(rate, dist, tape);
}

Tensor loss_proposed(const Tensor& x, const Tensor& x_hat, const Tensor& mask, const Tensor& bits,
                     double lambda, int64_t num_pixels, Tape* tape, MseNorm norm) {
  if (!(lambda > 0.0)) throw Error("loss: lambda must be positive");
  if (num_pixels <= 0) throw Error("loss: num_pixels must be positive");
  Tensor rate = ops::scale(bits, 1.0 / static_cast<double>(num_pixels), tape);
  Tensor omse = object_mse(x, x_hat, mask, mask, tape, norm);
  Tensor dist = ops::scale(omse, lambda * kPixelScaleSq, tape);
  return ops::add(rate, dist, tape);
}

}  // namespace orlc
