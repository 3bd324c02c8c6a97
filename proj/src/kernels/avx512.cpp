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

// AVX-512 variants. Bit-identical to the scalar reference by construction:
// lanes hold independent outputs, strided loads are deinterleaved shuffles of
// full loads (the padding slack keeps them in-buffer), and masked tail lanes
// only ever receive +0 contributions, which cannot perturb an accumulator.

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

constexpr int64_t kW = 8;  // lanes

// Lanes l -> p[2*l]; reads 16 doubles, covered by the pad slack.
inline __m512d load_even(const double* p) {
  const __m512i idx = _mm512_setr_epi64(0, 2, 4, 6, 8, 10, 12, 14);
  return _mm512_permutex2var_pd(_mm512_loadu_pd(p), idx, _mm512_loadu_pd(p + 8));
}

inline __m512d load_stride(const double* p, int64_t stride) {
  return stride == 1 ? _mm512_loadu_pd(p) : load_even(p);
}

inline double hsum8(__m512d v) {
  alignas(64) double a[8];
  _mm512_store_pd(a, v);
  return reduce8(a);
}

// Scalar per-element fallback identical to the reference kernel, used for
// ragged output tails. Reads the same padded buffer.
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

void conv2d_fwd_avx512(const double* in, const double* w, const double* bias, double* out,
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
          __m512d acc[kOB];
          for (int64_t j = 0; j < ob; ++j) {
            double* orow = out + ((b * s.out_ch + o0 + j) * s.out_h + y) * s.out_w;
            acc[j] = accumulate ? _mm512_loadu_pd(orow + x0) : _mm512_setzero_pd();
            if (bias != nullptr) acc[j] = _mm512_add_pd(acc[j], _mm512_set1_pd(bias[o0 + j]));
          }
          for (int64_t c = 0; c < s.in_ch; ++c) {
            const double* plane = P.origin(b * s.in_ch + c);
            for (int64_t ky = 0; ky < K; ++ky) {
              const double* row =
                  plane + (y * s.stride + ky - s.pad) * P.w + x0 * s.stride - s.pad;
              for (int64_t kx = 0; kx < K; ++kx) {
                const __m512d v = load_stride(row + kx, s.stride);
                for (int64_t j = 0; j < ob; ++j) {
                  const double wj = w[(((o0 + j) * s.in_ch + c) * K + ky) * K + kx];
                  acc[j] = _mm512_fmadd_pd(v, _mm512_set1_pd(wj), acc[j]);
                }
              }
            }
          }
          for (int64_t j = 0; j < ob; ++j) {
            double* orow = out + ((b * s.out_ch + o0 + j) * s.out_h + y) * s.out_w;
            _mm512_storeu_pd(orow + x0, acc[j]);
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

void convt_fwd_avx512(const double* in, const double* w, const double* bias, double* out,
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
            __m512d acc = accumulate ? _mm512_loadu_pd(orow + x0) : _mm512_setzero_pd();
            if (bias != nullptr) acc = _mm512_add_pd(acc, _mm512_set1_pd(bias[o]));
            for (int64_t c = 0; c < s.in_ch; ++c) {
              const double* plane = P.origin(b * s.in_ch + c);
              const double* wbase = w + ((c * s.out_ch + o) * K) * K;
              for (int64_t ky = 0; ky < K; ++ky) {
                const double* row = plane + (y + s.pad - ky) * P.w;
                for (int64_t kx = 0; kx < K; ++kx) {
                  acc = _mm512_fmadd_pd(_mm512_loadu_pd(row + x0 + s.pad - kx),
                                        _mm512_set1_pd(wbase[ky * K + kx]), acc);
                }
              }
            }
            _mm512_storeu_pd(orow + x0, acc);
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

  // stride 2: split output columns into even/odd parity classes; within a
  // class the source columns are contiguous. Tap order per output matches the
  // reference (valid ky, kx ascending).
  const __m512i kIlvLo = _mm512_setr_epi64(0, 8, 1, 9, 2, 10, 3, 11);
  const __m512i kIlvHi = _mm512_setr_epi64(4, 12, 5, 13, 6, 14, 7, 15);
  for (int64_t b = 0; b < s.batch; ++b) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      double* oplane = out + (b * s.out_ch + o) * s.out_h * s.out_w;
      for (int64_t y = 0; y < s.out_h; ++y) {
        double* orow = oplane + y * s.out_w;
        const int64_t ky0 = (y + s.pad) % 2;
        int64_t x0 = 0;
        for (; x0 + 2 * kW <= s.out_w; x0 += 2 * kW) {
          __m512d acc_e, acc_o;
          if (accumulate) {
            const __m512d lo = _mm512_loadu_pd(orow + x0);
            const __m512d hi = _mm512_loadu_pd(orow + x0 + kW);
            const __m512i eidx = _mm512_setr_epi64(0, 2, 4, 6, 8, 10, 12, 14);
            const __m512i oidx = _mm512_setr_epi64(1, 3, 5, 7, 9, 11, 13, 15);
            acc_e = _mm512_permutex2var_pd(lo, eidx, hi);
            acc_o = _mm512_permutex2var_pd(lo, oidx, hi);
          } else {
            acc_e = _mm512_setzero_pd();
            acc_o = _mm512_setzero_pd();
          }
          if (bias != nullptr) {
            const __m512d bv = _mm512_set1_pd(bias[o]);
            acc_e = _mm512_add_pd(acc_e, bv);
            acc_o = _mm512_add_pd(acc_o, bv);
          }
          for (int64_t c = 0; c < s.in_ch; ++c) {
            const double* plane = P.origin(b * s.in_ch + c);
            const double* wbase = w + ((c * s.out_ch + o) * K) * K;
            for (int64_t ky = ky0; ky < K; ky += 2) {
              const double* row = plane + ((y + s.pad - ky) / 2) * P.w;
              for (int64_t kx = (x0 + s.pad) % 2; kx < K; kx += 2) {
                const __m512d v = _mm512_loadu_pd(row + (x0 + s.pad - kx) / 2);
                acc_e = _mm512_fmadd_pd(v, _mm512_set1_pd(wbase[ky * K + kx]), acc_e);
              }
              for (int64_t kx = (x0 + 1 + s.pad) % 2; kx < K; kx += 2) {
                const __m512d v = _mm512_loadu_pd(row + (x0 + 1 + s.pad - kx) / 2);
                acc_o = _mm512_fmadd_pd(v, _mm512_set1_pd(wbase[ky * K + kx]), acc_o);
              }
            }
          }
          _mm512_storeu_pd(orow + x0, _mm512_permutex2var_pd(acc_e, kIlvLo, acc_o));
          _mm512_storeu_pd(orow + x0 + kW, _mm512_permutex2var_pd(acc_e, kIlvHi, acc_o));
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

void conv2d_grad_w_avx512(const double* gout, const double* in, double* gw, double* gbias,
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
      __m512d acc = _mm512_setzero_pd();
      for (int64_t b = 0; b < s.batch; ++b) {
        const double* g = gout + (b * s.out_ch + o) * n_out;
        int64_t i = 0;
        for (; i + kW <= n_out; i += kW) acc = _mm512_add_pd(acc, _mm512_loadu_pd(g + i));
        if (i < n_out) {
          const __mmask8 m = static_cast<__mmask8>((1u << (n_out - i)) - 1);
          acc = _mm512_mask_add_pd(acc, m, acc, _mm512_maskz_loadu_pd(m, g + i));
        }
      }
      gbias[o] += hsum8(acc);
    }
  }
  for (int64_t o = 0; o < s.out_ch; ++o) {
    for (int64_t c = 0; c < s.in_ch; ++c) {
      for (int64_t ky = 0; ky < K; ++ky) {
        for (int64_t kx = 0; kx < K; ++kx) {
          __m512d acc = _mm512_setzero_pd();
          for (int64_t b = 0; b < s.batch; ++b) {
            const double* g = gout + (b * s.out_ch + o) * n_out;
            const double* plane = P.origin(b * s.in_ch + c);
            for (int64_t y = 0; y < s.out_h; ++y) {
              const double* grow = g + y * s.out_w;
              const double* irow = plane + (y * s.stride + ky - s.pad) * P.w + kx - s.pad;
              int64_t x = 0;
              for (; x + kW <= s.out_w; x += kW) {
                acc = _mm512_fmadd_pd(_mm512_loadu_pd(grow + x),
                                      load_stride(irow + x * s.stride, s.stride), acc);
              }
              if (x < s.out_w) {
                const __mmask8 m = static_cast<__mmask8>((1u << (s.out_w - x)) - 1);
                const __m512d gv = _mm512_maskz_loadu_pd(m, grow + x);
                const __m512d iv = load_stride(irow + x * s.stride, s.stride);
                acc = _mm512_mask3_fmadd_pd(gv, iv, acc, m);
              }
            }
          }
          gw[((o * s.in_ch + c) * K + ky) * K + kx] += hsum8(acc);
        }
      }
    }
  }
}

void convt_grad_w_avx512(const double* gout, const double* in, double* gw, double* gbias,
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
      __m512d acc = _mm512_setzero_pd();
      for (int64_t b = 0; b < s.batch; ++b) {
        const double* g = gout + (b * s.out_ch + o) * n_out;
        int64_t i = 0;
        for (; i + kW <= n_out; i += kW) acc = _mm512_add_pd(acc, _mm512_loadu_pd(g + i));
        if (i < n_out) {
          const __mmask8 m = static_cast<__mmask8>((1u << (n_out - i)) - 1);
          acc = _mm512_mask_add_pd(acc, m, acc, _mm512_maskz_loadu_pd(m, g + i));
        }
      }
      gbias[o] += hsum8(acc);
    }
  }
  for (int64_t c = 0; c < s.in_ch; ++c) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      for (int64_t ky = 0; ky < K; ++ky) {
        for (int64_t kx = 0; kx < K; ++kx) {
          __m512d acc = _mm512_setzero_pd();
          for (int64_t b = 0; b < s.batch; ++b) {
            const double* iplane = in + (b * s.in_ch + c) * s.in_h * s.in_w;
            const double* gplane = P.origin(b * s.out_ch + o);
            for (int64_t iy = 0; iy < s.in_h; ++iy) {
              const double* irow = iplane + iy * s.in_w;
              const double* grow = gplane + (iy * s.stride - s.pad + ky) * P.w + kx - s.pad;
              int64_t ix = 0;
              for (; ix + kW <= s.in_w; ix += kW) {
                acc = _mm512_fmadd_pd(_mm512_loadu_pd(irow + ix),
                                      load_stride(grow + ix * s.stride, s.stride), acc);
              }
              if (ix < s.in_w) {
                const __mmask8 m = static_cast<__mmask8>((1u << (s.in_w - ix)) - 1);
                const __m512d iv = _mm512_maskz_loadu_pd(m, irow + ix);
                const __m512d gv = load_stride(grow + ix * s.stride, s.stride);
                acc = _mm512_mask3_fmadd_pd(iv, gv, acc, m);
              }
            }
          }
          gw[((c * s.out_ch + o) * K + ky) * K + kx] += hsum8(acc);
        }
      }
    }
  }
}

void ew_add_avx512(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm512_storeu_pd(out + i, _mm512_add_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}
void ew_sub_avx512(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm512_storeu_pd(out + i, _mm512_sub_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}
void ew_mul_avx512(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm512_storeu_pd(out + i, _mm512_mul_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}
void ew_scale_avx512(const double* a, double c, double* out, size_t n) {
  const __m512d cv = _mm512_set1_pd(c);
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm512_storeu_pd(out + i, _mm512_mul_pd(_mm512_loadu_pd(a + i), cv));
  for (; i < n; ++i) out[i] = a[i] * c;
}
void ew_acc_avx512(const double* a, double* dst, size_t n) {
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm512_storeu_pd(dst + i, _mm512_add_pd(_mm512_loadu_pd(dst + i), _mm512_loadu_pd(a + i)));
  for (; i < n; ++i) dst[i] += a[i];
}
void ew_axpy_avx512(double c, const double* a, double* dst, size_t n) {
  const __m512d cv = _mm512_set1_pd(c);
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm512_storeu_pd(dst + i, _mm512_fmadd_pd(cv, _mm512_loadu_pd(a + i), _mm512_loadu_pd(dst + i)));
  for (; i < n; ++i) dst[i] = std::fma(c, a[i], dst[i]);
}
void ew_mul_acc_avx512(const double* a, const double* b, double* dst, size_t n) {
  size_t i = 0;
  for (; i + kW <= n; i += kW)
    _mm512_storeu_pd(dst + i, _mm512_fmadd_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i),
                                              _mm512_loadu_pd(dst + i)));
  for (; i < n; ++i) dst[i] = std::fma(a[i], b[i], dst[i]);
}
void ew_diff_axpy_avx512(double c, const double* a, const double* b, double* dst, size_t n) {
  const __m512d cv = _mm512_set1_pd(c);
  size_t i = 0;
  for (; i + kW <= n; i += kW) {
    const __m512d d = _mm512_sub_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i));
    _mm512_storeu_pd(dst + i, _mm512_fmadd_pd(cv, d, _mm512_loadu_pd(dst + i)));
  }
  for (; i < n; ++i) dst[i] = std::fma(c, a[i] - b[i], dst[i]);
}
void lrelu_fwd_avx512(const double* a, double alpha, double* out, size_t n) {
  const __m512d av = _mm512_set1_pd(alpha);
  const __m512d zero = _mm512_setzero_pd();
  size_t i = 0;
  for (; i + kW <= n; i += kW) {
    const __m512d v = _mm512_loadu_pd(a + i);
    const __mmask8 ge = _mm512_cmp_pd_mask(v, zero, _CMP_GE_OQ);
    _mm512_storeu_pd(out + i, _mm512_mask_mov_pd(_mm512_mul_pd(av, v), ge, v));
  }
  for (; i < n; ++i) out[i] = a[i] >= 0.0 ? a[i] : alpha * a[i];
}
void lrelu_bwd_avx512(const double* x, const double* gout, double alpha, double* gin, size_t n) {
  const __m512d av = _mm512_set1_pd(alpha);
  const __m512d one = _mm512_set1_pd(1.0);
  const __m512d zero = _mm512_setzero_pd();
  size_t i = 0;
  for (; i + kW <= n; i += kW) {
    const __m512d xv = _mm512_loadu_pd(x + i);
    const __mmask8 ge = _mm512_cmp_pd_mask(xv, zero, _CMP_GE_OQ);
    const __m512d slope = _mm512_mask_mov_pd(av, ge, one);
    _mm512_storeu_pd(gin + i,
                     _mm512_fmadd_pd(_mm512_loadu_pd(gout + i), slope, _mm512_loadu_pd(gin + i)));
  }
  for (; i < n; ++i) gin[i] = std::fma(gout[i], x[i] >= 0.0 ? 1.0 : alpha, gin[i]);
}
void clamp_fwd_avx512(const double* a, double lo, double hi, double* out, size_t n) {
  const __m512d lov = _mm512_set1_pd(lo);
  const __m512d hiv = _mm512_set1_pd(hi);
  size_t i = 0;
  for (; i + kW <= n; i += kW) {
    const __m512d v = _mm512_min_pd(_mm512_max_pd(_mm512_loadu_pd(a + i), lov), hiv);
    _mm512_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) {
    double v = a[i] < lo ? lo : a[i];
    out[i] = v > hi ? hi : v;
  }
}
void clamp_bwd_avx512(const double* x, const double* gout, double lo, double hi, double* gin,
                      size_t n) {
  const __m512d lov = _mm512_set1_pd(lo);
  const __m512d hiv = _mm512_set1_pd(hi);
  size_t i = 0;
  for (; i + kW <= n; i += kW) {
    const __m512d xv = _mm512_loadu_pd(x + i);
    const __mmask8 inside = _mm512_cmp_pd_mask(xv, lov, _CMP_GE_OQ) &
                            _mm512_cmp_pd_mask(xv, hiv, _CMP_LE_OQ);
    const __m512d gv = _mm512_loadu_pd(gin + i);
    _mm512_storeu_pd(gin + i, _mm512_mask_add_pd(gv, inside, gv, _mm512_loadu_pd(gout + i)));
  }
  for (; i < n; ++i) {
    if (x[i] >= lo && x[i] <= hi) gin[i] += gout[i];
  }
}

double sum_all_avx512(const double* a, size_t n) {
  __m512d acc = _mm512_setzero_pd();
  size_t i = 0;
  for (; i + kW <= n; i += kW) acc = _mm512_add_pd(acc, _mm512_loadu_pd(a + i));
  if (i < n) {
    const __mmask8 m = static_cast<__mmask8>((1u << (n - i)) - 1);
    acc = _mm512_mask_add_pd(acc, m, acc, _mm512_maskz_loadu_pd(m, a + i));
  }
  return hsum8(acc);
}

double sq_diff_sum_avx512(const double* a, const double* b, size_t n) {
  __m512d acc = _mm512_setzero_pd();
  size_t i = 0;
  for (; i + kW <= n; i += kW) {
    const __m512d d = _mm512_sub_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i));
    acc = _mm512_fmadd_pd(d, d, acc);
  }
  if (i < n) {
    const __mmask8 m = static_cast<__mmask8>((1u << (n - i)) - 1);
    const __m512d d =
        _mm512_sub_pd(_mm512_maskz_loadu_pd(m, a + i), _mm512_maskz_loadu_pd(m, b + i));
    acc = _mm512_mask3_fmadd_pd(d, d, acc, m);
  }
  return hsum8(acc);
}

}  // namespace

const Kernels kAvx512Kernels = {
    conv2d_fwd_avx512,    convt_fwd_avx512,    conv2d_grad_w_avx512, convt_grad_w_avx512,
    ew_add_avx512,        ew_sub_avx512,       ew_mul_avx512,        ew_scale_avx512,
    ew_acc_avx512,        ew_axpy_avx512,      ew_mul_acc_avx512,    ew_diff_axpy_avx512,
    lrelu_fwd_avx512,     lrelu_bwd_avx512,    clamp_fwd_avx512,     clamp_bwd_avx512,
    sum_all_avx512,       sq_diff_sum_avx512,
};

}  // namespace orlc::kern

#endif  // x86_64
