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

// AVX2+FMA variants; same bit-exactness contract as avx512.cpp. The 8-slot
// reduction scheme maps onto a pair of 256-bit accumulators.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

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

constexpr int64_t kW = 4;  // lanes

struct EvenOdd {
  __m256d even, odd;
};

// Splits 8 consecutive doubles into even/odd-index lanes.
inline EvenOdd deinterleave(const double* p) {
  const __m256d pa = _mm256_permute4x64_pd(_mm256_loadu_pd(p), 0xD8);
  const __m256d pb = _mm256_permute4x64_pd(_mm256_loadu_pd(p + 4), 0xD8);
  return {_mm256_permute2f128_pd(pa, pb, 0x20), _mm256_permute2f128_pd(pa, pb, 0x31)};
}

inline __m256d load_even(const double* p) { return deinterleave(p).even; }

inline __m256d load_stride(const double* p, int64_t stride) {
  return stride == 1 ? _mm256_loadu_pd(p) : load_even(p);
}

// Lane-count masks for maskload / blendv tails.
inline __m256i tail_mask(int64_t k) {
  alignas(32) int64_t m[4] = {0, 0, 0, 0};
  for (int64_t i = 0; i < k; ++i) m[i] = -1;
  return _mm256_load_si256(reinterpret_cast<const __m256i*>(m));
}

struct Acc8 {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();

  void add_block(const double* p) {
    lo = _mm256_add_pd(lo, _mm256_loadu_pd(p));
    hi = _mm256_add_pd(hi, _mm256_loadu_pd(p + 4));
  }
  // Adds k (< 8) trailing elements into slots 0..k-1, preserving the rest.
  void add_tail(const double* p, int64_t k) {
    const int64_t klo = k < 4 ? k : 4;
    if (klo > 0) {
      const __m256i m = tail_mask(klo);
      const __m256d v = _mm256_maskload_pd(p, m);
      lo = _mm256_blendv_pd(lo, _mm256_add_pd(lo, v), _mm256_castsi256_pd(m));
    }
    if (k > 4) {
      const __m256i m = tail_mask(k - 4);
      const __m256d v = _mm256_maskload_pd(p + 4, m);
      hi = _mm256_blendv_pd(hi, _mm256_add_pd(hi, v), _mm256_castsi256_pd(m));
    }
  }
  double reduce() const {
    alignas(32) double a[8];
    _mm256_store_pd(a, lo);
    _mm256_store_pd(a + 4, hi);
    return reduce8(a);
  }
};

inline double conv_cell(const PaddedPlanes& P, const double* w, int64_t b, int64_t y, int64_t x,
                        int64_t o, const ConvShape& s, double init) {
  double acc = init;
  const int64_t K = s.kernel;
  for (int64_t c = 0; c < s.in_ch; ++c) {
    const double* plane = P.origin(b * s.in_ch + c);
    const double* wrow = w + ((o * s.in_ch + c) * K) * K;
    for (int64_t ky = 0; ky < K; ++ky) {
      const double* row = plane + (y * s.stride + ky - s.pad) * P.w + x * s.stride - s.pad;
      for (int64_t kx = 0; kx < K; ++kx) acc = std::fma(row[kx], wrow[ky * K + kx], acc);
    }
  }
  return acc;
}

void conv2d_fwd_avx2(const double* in, const double* w, const double* bias, double* out,
                     const ConvShape& s, bool accumulate) {
  if (s.stride != 1 && s.stride != 2) {
    kScalarKernels.conv2d_fwd(in, w, bias, out, s, accumulate);
    return;
  }
  const PaddedPlanes P = pad_planes(in, s.batch * s.in_ch, s.in_h, s.in_w, conv_margins(s));
  const int64_t K = s.kernel;
  constexpr int64_t kOB = 4;
  for (int64_t b = 0; b < s.batch; ++b) {
    for (int64_t o0 = 0; o0 < s.out_ch; o0 += kOB) {
      const int64_t ob = std::min(kOB, s.out_ch - o0);
      for (int64_t y = 0; y < s.out_h; ++y) {
        int64_t x0 = 0;
        for (; x0 + kW <= s.out_w; x0 += kW) {
          __m256d acc[kOB];
          for (int64_t j = 0; j < ob; ++j) {
            double* orow = out + ((b * s.out_ch + o0 + j) * s.out_h + y) * s.out_w;
            acc[j] = accumulate ? _mm256_loadu_pd(orow + x0) : _mm256_setzero_pd();
            if (bias != nullptr) acc[j] = _mm256_add_pd(acc[j], _mm256_set1_pd(bias[o0 + j]));
          }
          for (int64_t c = 0; c < s.in_ch; ++c) {
            const double* plane = P.origin(b * s.in_ch + c);
            for (int64_t ky = 0; ky < K; ++ky) {
              const double* row =
                  plane + (y * s.stride + ky - s.pad) * P.w + x0 * s.stride - s.pad;
              for (int64_t kx = 0; kx < K; ++kx) {
                const __m256d v = load_stride(row + kx, s.stride);
                for (int64_t j = 0; j < ob; ++j) {
                  const double wj = w[(((o0 + j) * s.in_ch + c) * K + ky) * K + kx];
                  acc[j] = _mm256_fmadd_pd(v, _mm256_set1_pd(wj), acc[j]);
                }
              }
            }
          }
          for (int64_t j = 0; j < ob; ++j) {
            double* orow = out + ((b * s.out_ch + o0 + j) * s.out_h + y) * s.out_w;
            _mm256_storeu_pd(orow + x0, acc[j]);
          }
        }
        for (int64_t x = x0; x < s.out_w; ++x) {
          for (int64_t j = 0; j < ob; ++j) {
            double* orow = out + ((b * s.out_ch + o0 + j) * s.out_h + y) * s.out_w;
            double init = accumulate ? orow[x] : 0.0;
            if (bias != nullptr) init += bias[o0 + j];
            orow[x] = conv_cell(P, w, b, y, x, o0 + j, s, init);
          }
        }
      }
    }
  }
}

inline double convt_cell(const PaddedPlanes& P, const double* w, int64_t b, int64_t y, int64_t x,
                         int64_t o, const ConvShape& s, double init) {
  double acc = init;
  const int64_t K = s.kernel;
  const int64_t ky0 = (y + s.pad) % s.stride;
  const int64_t kx0 = (x + s.pad) % s.stride;
  for (int64_t c = 0; c < s.in_ch; ++c) {
    const double* plane = P.origin(b * s.in_ch + c);
    const double* wbase = w + ((c * s.out_ch + o) * K) * K;
    for (int64_t ky = ky0; ky < K; ky += s.stride) {
      const double* row = plane + ((y + s.pad - ky) / s.stride) * P.w;
      for (int64_t kx = kx0; kx < K; kx += s.stride) {
        acc = std::fma(row[(x + s.pad - kx) / s.stride], wbase[ky * K + kx], acc);
      }
    }
  }
  return acc;
}

void convt_fwd_avx2(const double* in, const double* w, const double* bias, double* out,
                    const ConvShape& s, bool accumulate) {
  if (s.stride != 1 && s.stride != 2) {
    kScalarKernels.convt_fwd(in, w, bias, out, s, accumulate);
    return;
  }
  const PaddedPlanes P = pad_planes(in, s.batch * s.in_ch, s.in_h, s.in_w, convt_margins(s));
  const int64_t K = s.kernel;

  if (s.stride == 1) {
    for (int64_t b = 0; b < s.batch; ++b) {
      for (int64_t o = 0; o < s.out_ch; ++o) {
        double* oplane = out + (b * s.out_ch + o) * s.out_h * s.out_w;
        for (int64_t y = 0; y < s.out_h; ++y) {
          double* orow = oplane + y * s.out_w;
          int64_t x0 = 0;
          for (; x0 + kW <= s.out_w; x0 += kW) {
            __m256d acc = accumulate ? _mm256_loadu_pd(orow + x0) : _mm256_setzero_pd();
            if (bias != nullptr) acc = _mm256_add_pd(acc, _mm256_set1_pd(bias[o]));
            for (int64_t c = 0; c < s.in_ch; ++c) {
              const double* plane = P.origin(b * s.in_ch + c);
              const double* wbase = w + ((c * s.out_ch + o) * K) * K;
              for (int64_t ky = 0; ky < K; ++ky) {
                const double* row = plane + (y + s.pad - ky) * P.w;
                for (int64_t kx = 0; kx < K; ++kx) {
                  acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + x0 + s.pad - kx),
                                        _mm256_set1_pd(wbase[ky * K + kx]), acc);
                }
              }
            }
            _mm256_storeu_pd(orow + x0, acc);
          }
          for (int64_t x = x0; x < s.out_w; ++x) {
            double init = accumulate ? orow[x] : 0.0;
            if (bias != nullptr) init += bias[o];
            orow[x] = convt_cell(P, w, b, y, x, o, s, init);
          }
        }
      }
    }
    return;
  }

  // stride 2 parity decomposition; see avx512.cpp.
  for (int64_t b = 0; b < s.batch; ++b) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      double* oplane = out + (b * s.out_ch + o) * s.out_h * s.out_w;
      for (int64_t y = 0; y < s.out_h; ++y) {
        double* orow = oplane + y * s.out_w;
        const int64_t ky0 = (y + s.pad) % 2;
        int64_t x0 = 0;
        for (; x0 + 2 * kW <= s.out_w; x0 += 2 * kW) {
          __m256d acc_e, acc_o;
          if (accumulate) {
            const EvenOdd eo = deinterleave(orow + x0);
            acc_e = eo.even;
            acc_o = eo.odd;
          } else {
            acc_e = _mm256_setzero_pd();
            acc_o = _mm256_setzero_pd();
          }
          if (bias != nullptr) {
            const __m256d bv = _mm256_set1_pd(bias[o]);
            acc_e = _mm256_add_pd(acc_e, bv);
            acc_o = _mm256_add_pd(acc_o, bv);
          }
          for (int64_t c = 0; c < s.in_ch; ++c) {
            const double* plane = P.origin(b * s.in_ch + c);
            const double* wbase = w + ((c * s.out_ch + o) * K) * K;
            for (int64_t ky = ky0; ky < K; ky += 2) {
              const double* row = plane + ((y + s.pad - ky) / 2) * P.w;
              for (int64_t kx = (x0 + s.pad) % 2; kx < K; kx += 2) {
                const __m256d v = _mm256_loadu_pd(row + (x0 + s.pad - kx) / 2);
                acc_e = _mm256_fmadd_pd(v, _mm256_set1_pd(wbase[ky * K + kx]), acc_e);
              }
              for (int64_t kx = (x0 + 1 + s.pad) % 2; kx < K; kx += 2) {
                const __m256d v = _mm256_loadu_pd(row + (x0 + 1 + s.pad - kx) / 2);
                acc_o = _mm256_fmadd_pd(v, _mm256_set1_pd(wbase[ky * K + kx]), acc_o);
              }
            }
          }
          const __m256d lo = _mm256_unpacklo_pd(acc_e, acc_o);
          const __m256d hi = _mm256_unpackhi_pd(acc_e, acc_o);
          _mm256_storeu_pd(orow + x0, _mm256_permute2f128_pd(lo, hi, 0x20));
          _mm256_storeu_pd(orow + x0 + kW, _mm256_permute2f128_pd(lo, hi, 0x31));
        }
        for (int64_t x = x0; x < s.out_w; ++x) {
          double init = accumulate ? orow[x] : 0.0;
          if (bias != nullptr) init += bias[o];
          orow[x] = convt_cell(P, w, b, y, x, o, s, init);
        }
      }
    }
  }
}

// Tail-preserving fused accumulate: slots 0..k-1 get a*b, others unchanged.
inline __m256d masked_fma(__m256d a, __m256d b, __m256d acc, const __m256i m) {
  return _mm256_blendv_pd(acc, _mm256_fmadd_pd(a, b, acc), _mm256_castsi256_pd(m));
}

void conv2d_grad_w_avx2(const double* gout, const double* in, double* gw, double* gbias,
                        const ConvShape& s) {
  if (s.stride != 1 && s.stride != 2) {
    kScalarKernels.conv2d_grad_w(gout, in, gw, gbias, s);
    return;
  }
  const PaddedPlanes P = pad_planes(in, s.batch * s.in_ch, s.in_h, s.in_w, conv_margins(s));
  const int64_t K = s.kernel;
  const int64_t n_out = s.out_h * s.out_w;
  if (gbias != nullptr) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      Acc8 acc;
      for (int64_t b = 0; b < s.batch; ++b) {
        const double* g = gout + (b * s.out_ch + o) * n_out;
        int64_t i = 0;
        for (; i + 8 <= n_out; i += 8) acc.add_block(g + i);
        if (i < n_out) acc.add_tail(g + i, n_out - i);
      }
      gbias[o] += acc.reduce();
    }
  }
  for (int64_t o = 0; o < s.out_ch; ++o) {
    for (int64_t c = 0; c < s.in_ch; ++c) {
      for (int64_t ky = 0; ky < K; ++ky) {
        for (int64_t kx = 0; kx < K; ++kx) {
          __m256d acc_lo = _mm256_setzero_pd();
          __m256d acc_hi = _mm256_setzero_pd();
          for (int64_t b = 0; b < s.batch; ++b) {
            const double* g = gout + (b * s.out_ch + o) * n_out;
            const double* plane = P.origin(b * s.in_ch + c);
            for (int64_t y = 0; y < s.out_h; ++y) {
              const double* grow = g + y * s.out_w;
              const double* irow = plane + (y * s.stride + ky - s.pad) * P.w + kx - s.pad;
              int64_t x = 0;
              for (; x + 8 <= s.out_w; x += 8) {
                acc_lo = _mm256_fmadd_pd(_mm256_loadu_pd(grow + x),
                                         load_stride(irow + x * s.stride, s.stride), acc_lo);
                acc_hi = _mm256_fmadd_pd(_mm256_loadu_pd(grow + x + 4),
                                         load_stride(irow + (x + 4) * s.stride, s.stride), acc_hi);
              }
              const int64_t rem = s.out_w - x;
              if (rem > 0) {
                const int64_t klo = rem < 4 ? rem : 4;
                const __m256i mlo = tail_mask(klo);
                acc_lo = masked_fma(_mm256_maskload_pd(grow + x, mlo),
                                    load_stride(irow + x * s.stride, s.stride), acc_lo, mlo);
                if (rem > 4) {
                  const __m256i mhi = tail_mask(rem - 4);
                  acc_hi = masked_fma(_mm256_maskload_pd(grow + x + 4, mhi),
                                      load_stride(irow + (x + 4) * s.stride, s.stride), acc_hi, mhi);
                }
              }
            }
          }
          alignas(32) double a[8];
          _mm256_store_pd(a, acc_lo);
          _mm256_store_pd(a + 4, acc_hi);
          gw[((o * s.in_ch + c) * K + ky) * K + kx] += reduce8(a);
        }
      }
    }
  }
}

void convt_grad_w_avx2(const double* gout, const double* in, double* gw, double* gbias,
                       const ConvShape& s) {
  if (s.stride != 1 && s.stride != 2) {
    kScalarKernels.convt_grad_w(gout, in, gw, gbias, s);
    return;
  }
  const PaddedPlanes P =
      pad_planes(gout, s.batch * s.out_ch, s.out_h, s.out_w, convt_gradw_margins(s));
  const int64_t K = s.kernel;
  const int64_t n_out = s.out_h * s.out_w;
  if (gbias != nullptr) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      Acc8 acc;
      for (int64_t b = 0; b < s.batch; ++b) {
        const double* g = gout + (b * s.out_ch + o) * n_out;
        int64_t i = 0;
        for (; i + 8 <= n_out; i += 8) acc.add_block(g + i);
        if (i < n_out) acc.add_tail(g + i, n_out - i);
      }
      gbias[o] += acc.reduce();
    }
  }
  for (int64_t c = 0; c < s.in_ch; ++c) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      for (int64_t ky = 0; ky < K; ++ky) {
        for (int64_t kx = 0; kx < K; ++kx) {
          __m256d acc_lo = _mm256_setzero_pd();
          __m256d acc_hi = _mm256_setzero_pd();
          for (int64_t b = 0; b < s.batch; ++b) {
            const double* iplane = in + (b * s.in_ch + c) * s.in_h * s.in_w;
            const double* gplane = P.origin(b * s.out_ch + o);
            for (int64_t iy = 0; iy < s.in_h; ++iy) {
              const double* irow = iplane + iy * s.in_w;
              const double* grow = gplane + (iy * s.stride - s.pad + ky) * P.w + kx - s.pad;
              int64_t ix = 0;
              for (; ix + 8 <= s.in_w; ix += 8) {
                acc_lo = _mm256_fmadd_pd(_mm256_loadu_pd(irow + ix),
                                         load_stride(grow + ix * s.stride, s.stride), acc_lo);
                acc_hi = _mm256_fmadd_pd(_mm256_loadu_pd(irow + ix + 4),
                                         load_stride(grow + (ix + 4) * s.stride, s.stride), acc_hi);
              }
              const int64_t rem = s.in_w - ix;
              if (rem > 0) {
                const int64_t klo = rem < 4 ? rem : 4;
                const __m256i mlo = tail_mask(klo);
                acc_lo = masked_fma(_mm256_maskload_pd(irow + ix, mlo),
                                    load_stride(grow + ix * s.stride, s.stride), acc_lo, mlo);
                if (rem > 4) {
                  const __m256i mhi = tail_mask(rem - 4);
                  acc_hi = masked_fma(_mm256_maskload_pd(irow + ix + 4, mhi),
                                      load_stride(grow + (ix + 4) * s.stride, s.stride), acc_hi, mhi);
                }
              }
            }
          }
          alignas(32) double a[8];
          _mm256_store_pd(a, acc_lo);
          _mm256_store_pd(a + 4, acc_hi);
          gw[((c * s.out_ch + o) * K + ky) * K + kx] += reduce8(a);
        }
      }
    }
  }
}

void ew_add_avx2(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}
void ew_sub_avx2(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}
void ew_mul_avx2(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}
void ew_scale_avx2(const double* a, double c, double* out, size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), cv));
  for (; i < n; ++i) out[i] = a[i] * c;
}
void ew_acc_avx2(const double* a, double* dst, size_t n) {
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), _mm256_loadu_pd(a + i)));
  for (; i < n; ++i) dst[i] += a[i];
}
void ew_axpy_avx2(double c, const double* a, double* dst, size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(cv, _mm256_loadu_pd(a + i), _mm256_loadu_pd(dst + i)));
  for (; i < n; ++i) dst[i] = std::fma(c, a[i], dst[i]);
}
void ew_mul_acc_avx2(const double* a, const double* b, double* dst, size_t n) {
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                                              _mm256_loadu_pd(dst + i)));
  for (; i < n; ++i) dst[i] = std::fma(a[i], b[i], dst[i]);
}
void ew_diff_axpy_avx2(double c, const double* a, const double* b, double* dst, size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  size_t i = 0;
  for (; i + kW <= n; i += kW) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(cv, d, _mm256_loadu_pd(dst + i)));
  }
  for (; i < n; ++i) dst[i] = std::fma(c, a[i] - b[i], dst[i]);
}
void lrelu_fwd_avx2(const double* a, double alpha, double* out, size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + kW <= n; i += kW) {
    const __m256d v = _mm256_loadu_pd(a + i);
    const __m256d ge = _mm256_cmp_pd(v, zero, _CMP_GE_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(_mm256_mul_pd(av, v), v, ge));
  }
  for (; i < n; ++i) out[i] = a[i] >= 0.0 ? a[i] : alpha * a[i];
}
void lrelu_bwd_avx2(const double* x, const double* gout, double alpha, double* gin, size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + kW <= n; i += kW) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d slope = _mm256_blendv_pd(av, one, _mm256_cmp_pd(xv, zero, _CMP_GE_OQ));
    _mm256_storeu_pd(gin + i,
                     _mm256_fmadd_pd(_mm256_loadu_pd(gout + i), slope, _mm256_loadu_pd(gin + i)));
  }
  for (; i < n; ++i) gin[i] = std::fma(gout[i], x[i] >= 0.0 ? 1.0 : alpha, gin[i]);
}
void clamp_fwd_avx2(const double* a, double lo, double hi, double* out, size_t n) {
  const __m256d lov = _mm256_set1_pd(lo);
  const __m256d hiv = _mm256_set1_pd(hi);
  size_t i = 0;
  for (; i + kW <= n; i += kW) {
    _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_max_pd(_mm256_loadu_pd(a + i), lov), hiv));
  }
  for (; i < n; ++i) {
    double v = a[i] < lo ? lo : a[i];
    out[i] = v > hi ? hi : v;
  }
}
void clamp_bwd_avx2(const double* x, const double* gout, double lo, double hi, double* gin,
                    size_t n) {
  const __m256d lov = _mm256_set1_pd(lo);
  const __m256d hiv = _mm256_set1_pd(hi);
  size_t i = 0;
  for (; i + kW <= n; i += kW) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d inside = _mm256_and_pd(_mm256_cmp_pd(xv, lov, _CMP_GE_OQ),
                                         _mm256_cmp_pd(xv, hiv, _CMP_LE_OQ));
    const __m256d gv = _mm256_loadu_pd(gin + i);
    const __m256d sum = _mm256_add_pd(gv, _mm256_loadu_pd(gout + i));
    _mm256_storeu_pd(gin + i, _mm256_blendv_pd(gv, sum, inside));
  }
  for (; i < n; ++i) {
    if (x[i] >= lo && x[i] <= hi) gin[i] += gout[i];
  }
}

double sum_all_avx2(const double* a, size_t n) {
  Acc8 acc;
  size_t i = 0;
  for (; i + 8 <= n; i += 8) acc.add_block(a + i);
  if (i < n) acc.add_tail(a + i, static_cast<int64_t>(n - i));
  return acc.reduce();
}

double sq_diff_sum_avx2(const double* a, const double* b, size_t n) {
  __m256d acc_lo = _mm256_setzero_pd();
  __m256d acc_hi = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc_lo = _mm256_fmadd_pd(d0, d0, acc_lo);
    acc_hi = _mm256_fmadd_pd(d1, d1, acc_hi);
  }
  const int64_t rem = static_cast<int64_t>(n - i);
  if (rem > 0) {
    const int64_t klo = rem < 4 ? rem : 4;
    const __m256i mlo = tail_mask(klo);
    const __m256d d =
        _mm256_sub_pd(_mm256_maskload_pd(a + i, mlo), _mm256_maskload_pd(b + i, mlo));
    acc_lo = masked_fma(d, d, acc_lo, mlo);
    if (rem > 4) {
      const __m256i mhi = tail_mask(rem - 4);
      const __m256d d1 =
          _mm256_sub_pd(_mm256_maskload_pd(a + i + 4, mhi), _mm256_maskload_pd(b + i + 4, mhi));
      acc_hi = masked_fma(d1, d1, acc_hi, mhi);
    }
  }
  alignas(32) double s8[8];
  _mm256_store_pd(s8, acc_lo);
  _mm256_store_pd(s8 + 4, acc_hi);
  return reduce8(s8);
}

}  // namespace

const Kernels kAvx2Kernels = {
    conv2d_fwd_avx2,    convt_fwd_avx2,    conv2d_grad_w_avx2, convt_grad_w_avx2,
    ew_add_avx2,        ew_sub_avx2,       ew_mul_avx2,        ew_scale_avx2,
    ew_acc_avx2,        ew_axpy_avx2,      ew_mul_acc_avx2,    ew_diff_axpy_avx2,
    lrelu_fwd_avx2,     lrelu_bwd_avx2,    clamp_fwd_avx2,     clamp_bwd_avx2,
    sum_all_avx2,       sq_diff_sum_avx2,
};

}  // namespace orlc::kern

#endif  // x86_64
