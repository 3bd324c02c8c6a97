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

// Scalar reference kernels. These define the canonical arithmetic order that
// the SIMD backends reproduce bit-exactly; see the contract in kernels.hpp.

#include <cmath>
#include <cstring>

#include "conv_pad.hpp"
#include "orlc/kernels.hpp"

namespace orlc::kern {
namespace {

using detail::conv_margins;
using detail::convt_gradw_margins;
using detail::convt_margins;
using detail::pad_planes;
using detail::PaddedPlanes;
using detail::reduce8;

void conv2d_fwd_scalar(const double* in, const double* w, const double* bias, double* out,
                       const ConvShape& s, bool accumulate) {
  const PaddedPlanes P = pad_planes(in, s.batch * s.in_ch, s.in_h, s.in_w, conv_margins(s));
  const int64_t K = s.kernel;
  for (int64_t b = 0; b < s.batch; ++b) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      double* oplane = out + (b * s.out_ch + o) * s.out_h * s.out_w;
      for (int64_t y = 0; y < s.out_h; ++y) {
        for (int64_t x = 0; x < s.out_w; ++x) {
          double acc = accumulate ? oplane[y * s.out_w + x] : 0.0;
          if (bias != nullptr) acc += bias[o];
          for (int64_t c = 0; c < s.in_ch; ++c) {
            // origin() points at image (0,0); row y*s+ky-p is in-buffer by
            // construction of the margins.
            const double* plane = P.origin(b * s.in_ch + c);
            const double* wrow = w + ((o * s.in_ch + c) * K) * K;
            for (int64_t ky = 0; ky < K; ++ky) {
              const double* row = plane + (y * s.stride + ky - s.pad) * P.w + x * s.stride - s.pad;
              for (int64_t kx = 0; kx < K; ++kx) {
                acc = std::fma(row[kx], wrow[ky * K + kx], acc);
              }
            }
          }
          oplane[y * s.out_w + x] = acc;
        }
      }
    }
  }
}

void convt_fwd_scalar(const double* in, const double* w, const double* bias, double* out,
                      const ConvShape& s, bool accumulate) {
  const PaddedPlanes P = pad_planes(in, s.batch * s.in_ch, s.in_h, s.in_w, convt_margins(s));
  const int64_t K = s.kernel;
  for (int64_t b = 0; b < s.batch; ++b) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      double* oplane = out + (b * s.out_ch + o) * s.out_h * s.out_w;
      for (int64_t y = 0; y < s.out_h; ++y) {
        const int64_t ky0 = (y + s.pad) % s.stride;
        for (int64_t x = 0; x < s.out_w; ++x) {
          const int64_t kx0 = (x + s.pad) % s.stride;
          double acc = accumulate ? oplane[y * s.out_w + x] : 0.0;
          if (bias != nullptr) acc += bias[o];
          for (int64_t c = 0; c < s.in_ch; ++c) {
            const double* plane = P.origin(b * s.in_ch + c);
            const double* wbase = w + ((c * s.out_ch + o) * K) * K;
            for (int64_t ky = ky0; ky < K; ky += s.stride) {
              const int64_t iy = (y + s.pad - ky) / s.stride;
              const double* row = plane + iy * P.w;
              for (int64_t kx = kx0; kx < K; kx += s.stride) {
                const int64_t ix = (x + s.pad - kx) / s.stride;
                acc = std::fma(row[ix], wbase[ky * K + kx], acc);
              }
            }
          }
          oplane[y * s.out_w + x] = acc;
        }
      }
    }
  }
}

void conv2d_grad_w_scalar(const double* gout, const double* in, double* gw, double* gbias,
                          const ConvShape& s) {
  const PaddedPlanes P = pad_planes(in, s.batch * s.in_ch, s.in_h, s.in_w, conv_margins(s));
  const int64_t K = s.kernel;
  const int64_t n_out = s.out_h * s.out_w;
  if (gbias != nullptr) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
      for (int64_t b = 0; b < s.batch; ++b) {
        const double* g = gout + (b * s.out_ch + o) * n_out;
        for (int64_t i = 0; i < n_out; ++i) acc[i % 8] += g[i];
      }
      gbias[o] += reduce8(acc);
    }
  }
  for (int64_t o = 0; o < s.out_ch; ++o) {
    for (int64_t c = 0; c < s.in_ch; ++c) {
      for (int64_t ky = 0; ky < K; ++ky) {
        for (int64_t kx = 0; kx < K; ++kx) {
          double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
          for (int64_t b = 0; b < s.batch; ++b) {
            const double* g = gout + (b * s.out_ch + o) * n_out;
            const double* plane = P.origin(b * s.in_ch + c);
            for (int64_t y = 0; y < s.out_h; ++y) {
              const double* grow = g + y * s.out_w;
              const double* irow = plane + (y * s.stride + ky - s.pad) * P.w + kx - s.pad;
              for (int64_t x = 0; x < s.out_w; ++x) {
                acc[x % 8] = std::fma(grow[x], irow[x * s.stride], acc[x % 8]);
              }
            }
          }
          gw[((o * s.in_ch + c) * K + ky) * K + kx] += reduce8(acc);
        }
      }
    }
  }
}

void convt_grad_w_scalar(const double* gout, const double* in, double* gw, double* gbias,
                         const ConvShape& s) {
  const PaddedPlanes P =
      pad_planes(gout, s.batch * s.out_ch, s.out_h, s.out_w, convt_gradw_margins(s));
  const int64_t K = s.kernel;
  const int64_t n_out = s.out_h * s.out_w;
  if (gbias != nullptr) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
      for (int64_t b = 0; b < s.batch; ++b) {
        const double* g = gout + (b * s.out_ch + o) * n_out;
        for (int64_t i = 0; i < n_out; ++i) acc[i % 8] += g[i];
      }
      gbias[o] += reduce8(acc);
    }
  }
  for (int64_t c = 0; c < s.in_ch; ++c) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      for (int64_t ky = 0; ky < K; ++ky) {
        for (int64_t kx = 0; kx < K; ++kx) {
          double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
          for (int64_t b = 0; b < s.batch; ++b) {
            const double* iplane = in + (b * s.in_ch + c) * s.in_h * s.in_w;
            const double* gplane = P.origin(b * s.out_ch + o);
            for (int64_t iy = 0; iy < s.in_h; ++iy) {
              const double* irow = iplane + iy * s.in_w;
              const double* grow = gplane + (iy * s.stride - s.pad + ky) * P.w + kx - s.pad;
              for (int64_t ix = 0; ix < s.in_w; ++ix) {
                acc[ix % 8] = std::fma(irow[ix], grow[ix * s.stride], acc[ix % 8]);
              }
            }
          }
          gw[((c * s.out_ch + o) * K + ky) * K + kx] += reduce8(acc);
        }
      }
    }
  }
}

void ew_add_scalar(const double* a, const double* b, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}
void ew_sub_scalar(const double* a, const double* b, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}
void ew_mul_scalar(const double* a, const double* b, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}
void ew_scale_scalar(const double* a, double c, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] * c;
}
void ew_acc_scalar(const double* a, double* dst, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] += a[i];
}
void ew_axpy_scalar(double c, const double* a, double* dst, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = std::fma(c, a[i], dst[i]);
}
void ew_mul_acc_scalar(const double* a, const double* b, double* dst, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = std::fma(a[i], b[i], dst[i]);
}
void ew_diff_axpy_scalar(double c, const double* a, const double* b, double* dst, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = std::fma(c, a[i] - b[i], dst[i]);
}
void lrelu_fwd_scalar(const double* a, double alpha, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] >= 0.0 ? a[i] : alpha * a[i];
}
void lrelu_bwd_scalar(const double* x, const double* gout, double alpha, double* gin, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const double slope = x[i] >= 0.0 ? 1.0 : alpha;
    gin[i] = std::fma(gout[i], slope, gin[i]);
  }
}
void clamp_fwd_scalar(const double* a, double lo, double hi, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    double v = a[i] < lo ? lo : a[i];
    out[i] = v > hi ? hi : v;
  }
}
void clamp_bwd_scalar(const double* x, const double* gout, double lo, double hi, double* gin,
                      size_t n) {
  for (size_t i = 0; i < n; ++i) {
    if (x[i] >= lo && x[i] <= hi) gin[i] += gout[i];
  }
}

double sum_all_scalar(const double* a, size_t n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  for (size_t i = 0; i < n; ++i) acc[i % 8] += a[i];
  return reduce8(acc);
}

double sq_diff_sum_scalar(const double* a, const double* b, size_t n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  for (size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc[i % 8] = std::fma(d, d, acc[i % 8]);
  }
  return reduce8(acc);
}

}  // namespace

const Kernels kScalarKernels = {
    conv2d_fwd_scalar,    convt_fwd_scalar,    conv2d_grad_w_scalar, convt_grad_w_scalar,
    ew_add_scalar,        ew_sub_scalar,       ew_mul_scalar,        ew_scale_scalar,
    ew_acc_scalar,        ew_axpy_scalar,      ew_mul_acc_scalar,    ew_diff_axpy_scalar,
    lrelu_fwd_scalar,     lrelu_bwd_scalar,    clamp_fwd_scalar,     clamp_bwd_scalar,
    sum_all_scalar,       sq_diff_sum_scalar,
};

}  // namespace orlc::kern
