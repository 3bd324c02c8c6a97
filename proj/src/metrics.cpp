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

#include "orlc/metrics.hpp"

#include "orlc/mathfn.hpp"
#include "orlc/util.hpp"

namespace orlc {

PsnrResult psnr(const Tensor& a, const Tensor& b, const Tensor* mask) {
  if (!a.same_shape(b)) {
    throw Error(strfmt("psnr: shape mismatch %s vs %s", a.shape_str().c_str(),
                       b.shape_str().c_str()));
  }
  double sum = 0.0;
  int64_t count = 0;
  if (mask == nullptr) {
    for (int64_t i = 0; i < a.numel(); ++i) {
      const double d = a.values()[static_cast<size_t>(i)] - b.values()[static_cast<size_t>(i)];
      sum += d * d;
    }
    count = a.numel();
  } else {
    if (a.rank() != 3) throw Error("psnr: masked variant expects CxHxW images");
    const int64_t C = a.dim(0), hw = a.dim(1) * a.dim(2);
    if (mask->numel() != hw) {
      throw Error(strfmt("psnr: mask %s does not match image %s", mask->shape_str().c_str(),
                         a.shape_str().c_str()));
    }
    for (int64_t p = 0; p < hw; ++p) {
      if (mask->values()[static_cast<size_t>(p)] == 0.0) continue;
      for (int64_t c = 0; c < C; ++c) {
        const double d = a.values()[static_cast<size_t>(c * hw + p)] -
                         b.values()[static_cast<size_t>(c * hw + p)];
        sum += d * d;
        ++count;
      }
    }
    if (count == 0) throw Error("psnr: mask has zero coverage");
  }
  const double mse = sum / static_cast<double>(count);
  PsnrResult r;
  if (mse < 1e-10) {
    r.db = 100.0;
    r.saturated = true;
  } else {
    r.db = 10.0 * math::log10_d(1.0 / mse);
  }
  return r;
}

}  // namespace orlc
