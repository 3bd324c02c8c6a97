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

#ifndef ORLC_LOSS_HPP_
#define ORLC_LOSS_HPP_

#include "orlc/tensor.hpp"

namespace orlc {

// Distortion is measured on a 0..255 pixel scale while tensors hold [0,1]
// values, so squared errors are scaled by 255^2. The lambda grids assume
// this convention.
inline constexpr double kPixelScaleSq = 255.0 * 255.0;

// How the masked mean squared error is normalized: by the full element count
// (the literal composition MSE(phi(b), phi(c))) or by masked elements only.
enum class MseNorm { kTotalPixels, kObjectPixels };

// Throws unless every mask value is exactly 0.0 or 1.0.
void validate_binary_mask(const Tensor& mask);
// Fraction of 1-pixels.
double mask_coverage(const Tensor& mask);

// Hadamard product image * mask, the mask (Bx1xHxW) broadcast across the
// image's channels. Differentiable w.r.t. the image only.
Tensor mask_apply(const Tensor& image, const Tensor& mask, Tape* tape);

// MSE between the masked images; masks may differ per side.
Tensor object_mse(const Tensor& b, const Tensor& c, const Tensor& mask_b, const Tensor& mask_c,
                  Tape* tape, MseNorm norm = MseNorm::kTotalPixels);

// rate/num_pixels + lambda * 255^2 * MSE(x, x_hat)
Tensor loss_human(const Tensor& x, const Tensor& x_hat, const Tensor& bits, double lambda,
                  int64_t num_pixels, Tape* tape);

// rate/num_pixels + lambda * 255^2 * object_mse(x, x_hat, m, m)
Tensor loss_proposed(const Tensor& x, const Tensor& x_hat, const Tensor& mask, const Tensor& bits,
                     double lambda, int64_t num_pixels, Tape* tape,
                     MseNorm norm = MseNorm::kTotalPixels);

}  // namespace orlc

#endif  // ORLC_LOSS_HPP_
