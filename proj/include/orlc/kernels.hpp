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

#ifndef ORLC_KERNELS_HPP_
#define ORLC_KERNELS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

namespace orlc::kern {

// Hot inner loops (convolutions, elementwise maps, big reductions) exist in a
// scalar reference version and SIMD variants picked at runtime. The contract
// is stronger than "numerically close": every backend evaluates the same
// floating-point operations in the same order per output element, so results
// are BIT-IDENTICAL across backends and therefore across machines. Rules that
// make this hold:
//   - one vector lane == one independent output element; a single output's
//     accumulation never spans lanes except through the fixed 8-slot scheme;
//   - reductions run on 8 interleaved accumulators (element i goes to slot
//     i mod 8) and collapse as ((a0+a1)+(a2+a3)) + ((a4+a5)+(a6+a7));
//   - multiply-accumulate is always fma, in the scalar code too.
// The equivalence suite in tests/ asserts exact equality between backends.

enum class Backend { kScalar = 0, kAvx2 = 1, kAvx512 = 2 };

const char* backend_name(Backend b);

// Geometry shared by the convolution kernels. For conv2d_fwd the "in" fields
// describe the input and out_h/out_w the (precomputed) output extents. For
// convt_fwd the output extents are explicit because callers may request a
// larger canvas than the minimal transposed-conv formula yields (needed when
// it acts as the gradient of a strided conv2d).
struct ConvShape {
  int64_t batch = 1;
  int64_t in_ch = 0;
  int64_t in_h = 0;
  int64_t in_w = 0;
  int64_t out_ch = 0;
  int64_t kernel = 0;
  int64_t stride = 1;
  int64_t pad = 0;
  int64_t out_h = 0;
  int64_t out_w = 0;
};

struct Kernels {
  // out[b,o,y,x] (+)= bias[o] + sum_{c,ky,kx} in[b,c,y*s+ky-p,x*s+kx-p] * w[o,c,ky,kx]
  // Cross-correlation, zero padding. bias may be null. accumulate=true adds
  // into the existing out instead of overwriting (used on the gradient path).
  void (*conv2d_fwd)(const double* in, const double* w, const double* bias, double* out,
                     const ConvShape& s, bool accumulate);

  // Transposed convolution, gather form; exact adjoint of conv2d_fwd in its
  // linear part. w is laid out [in_ch][out_ch][k][k].
  void (*convt_fwd)(const double* in, const double* w, const double* bias, double* out,
                    const ConvShape& s, bool accumulate);

  // gw[o,c,ky,kx] += sum_{b,y,x} gout[b,o,y,x] * in[b,c,y*s+ky-p,x*s+kx-p]
  // gbias[o]      += sum_{b,y,x} gout[b,o,y,x]            (gbias may be null)
  void (*conv2d_grad_w)(const double* gout, const double* in, double* gw, double* gbias,
                        const ConvShape& s);

  // Weight/bias gradient of convt_fwd. Shape fields mirror the forward call.
  // gw[c,o,ky,kx] += sum_{b,iy,ix} in[b,c,iy,ix] * gout[b,o,iy*s-p+ky,ix*s-p+kx]
  void (*convt_grad_w)(const double* gout, const double* in, double* gw, double* gbias,
                       const ConvShape& s);

  void (*ew_add)(const double* a, const double* b, double* out, size_t n);
  void (*ew_sub)(const double* a, const double* b, double* out, size_t n);
  void (*ew_mul)(const double* a, const double* b, double* out, size_t n);
  void (*ew_scale)(const double* a, double c, double* out, size_t n);
  void (*ew_acc)(const double* a, double* dst, size_t n);              // dst += a
  void (*ew_axpy)(double c, const double* a, double* dst, size_t n);   // dst += c*a
  void (*ew_mul_acc)(const double* a, const double* b, double* dst, size_t n);  // dst += a*b
  // dst += c*(a-b); the mean-square-diff backward.
  void (*ew_diff_axpy)(double c, const double* a, const double* b, double* dst, size_t n);
  void (*lrelu_fwd)(const double* a, double alpha, double* out, size_t n);
  void (*lrelu_bwd)(const double* x, const double* gout, double alpha, double* gin, size_t n);
  void (*clamp_fwd)(const double* a, double lo, double hi, double* out, size_t n);
  void (*clamp_bwd)(const double* x, const double* gout, double lo, double hi, double* gin,
                    size_t n);

  double (*sum_all)(const double* a, size_t n);
  double (*sq_diff_sum)(const double* a, const double* b, size_t n);
};

extern const Kernels kScalarKernels;
#if defined(__x86_64__) || defined(_M_X64)
extern const Kernels kAvx2Kernels;
extern const Kernels kAvx512Kernels;
#endif

bool backend_available(Backend b);

// Active table. Defaults to the best available backend; the ORLC_BACKEND
// environment variable (scalar|avx2|avx512) overrides at startup.
const Kernels& active();
Backend active_backend();
const Kernels& table(Backend b);

// Test hook. Throws if the backend is unavailable on this machine.
void force_backend(Backend b);

}  // namespace orlc::kern

#endif  // ORLC_KERNELS_HPP_
