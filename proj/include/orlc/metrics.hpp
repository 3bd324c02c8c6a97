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

#ifndef ORLC_METRICS_HPP_
#define ORLC_METRICS_HPP_

#include "orlc/tensor.hpp"

namespace orlc {

struct PsnrResult {
  double db = 0.0;
  bool saturated = false;  // MSE below 1e-10; db reported as 100
};

// PSNR on [0,1] pixels: 10*log10(1/MSE). With a mask (1xHxW, coverage > 0),
// the squared error is averaged over object pixels only.
PsnrResult psnr(const Tensor& a, const Tensor& b, const Tensor* mask = nullptr);

}  // namespace orlc

#endif  // ORLC_METRICS_HPP_
