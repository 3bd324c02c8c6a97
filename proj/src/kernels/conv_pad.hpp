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

#ifndef ORLC_SRC_KERNELS_CONV_PAD_HPP_
#define ORLC_SRC_KERNELS_CONV_PAD_HPP_

#include <algorithm>
#include <cstdint>
#include <vector>

#include "orlc/kernels.hpp"

// Zero-padded working copies shared by all kernel backends. Padding is pure
// data movement: it cannot affect the bit-exactness contract. Every read a
// kernel performs lands inside the padded buffer; out-of-image taps read
// zeros, which contribute exactly nothing to an fma chain.

namespace orlc::kern::detail {

inline int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

struct Margins {
  int64_t top = 0, bottom = 0, left = 0, right = 0;
};

// SIMD loads may touch a few doubles past the last needed column/row.
constexpr int64_t kPadSlack = 16;

// Access pattern of conv2d_fwd (and conv2d_grad_w): row = y*s + ky - p.
inline Margins conv_margins(const ConvShape& s) {
  Margins m;
  m.top = std::max<int64_t>(0, s.pad);
  m.left = std::max<int64_t>(0, s.pad);
  m.bottom = std::max<int64_t>(0, (s.out_h - 1) * s.stride + s.kernel - 1 - s.pad - (s.in_h - 1)) + kPadSlack;
  m.right = std::max<int64_t>(0, (s.out_w - 1) * s.stride + s.kernel - 1 - s.pad - (s.in_w - 1)) + kPadSlack;
  return m;
}

// Access pattern of convt_fwd: row = (y + p - ky)/s for y in [0, out_h).
inline Margins convt_margins(const ConvShape& s) {
  Margins m;
  m.top = std::max<int64_t>(0, -floor_div(s.pad - (s.kernel - 1), s.stride));
  m.left = m.top;
  m.bottom = std::max<int64_t>(0, floor_div(s.out_h - 1 + s.pad, s.stride) - (s.in_h - 1)) + kPadSlack;
  m.right = std::max<int64_t>(0, floor_div(s.out_w - 1 + s.pad, s.stride) - (s.in_w - 1)) + kPadSlack;
  return m;
}

// Access pattern of convt_grad_w (reads gout): row = iy*s - p + ky.
inline Margins convt_gradw_margins(const ConvShape& s) {
  Margins m;
  m.top = std::max<int64_t>(0, s.pad);
  m.left = std::max<int64_t>(0, s.pad);
  m.bottom = std::max<int64_t>(0, (s.in_h - 1) * s.stride - s.pad + s.kernel - 1 - (s.out_h - 1)) + kPadSlack;
  m.right = std::max<int64_t>(0, (s.in_w - 1) * s.stride - s.pad + s.kernel - 1 - (s.out_w - 1)) + kPadSlack;
  return m;
}

struct PaddedPlanes {
  std::vector<double> buf;
  int64_t planes = 0;   // batch * channels
  int64_t h = 0, w = 0; // padded extents
  int64_t top = 0, left = 0;

  const double* plane(int64_t p) const { return buf.data() + p * h * w; }
  // Pointer to (row, col) = (0,0) of the unpadded image within the plane.
  const double* origin(int64_t p) const { return plane(p) + top * w + left; }
};

inline PaddedPlanes pad_planes(const double* src, int64_t planes, int64_t h, int64_t w,
                               const Margins& m) {
  PaddedPlanes out;
  out.planes = planes;
  out.h = h + m.top + m.bottom;
  out.w = w + m.left + m.right;
  out.top = m.top;
  out.left = m.left;
  out.buf.assign(static_cast<size_t>(planes * out.h * out.w), 0.0);
  for (int64_t p = 0; p < planes; ++p) {
    const double* s = src + p * h * w;
    double* d = out.buf.data() + p * out.h * out.w + m.top * out.w + m.left;
    for (int64_t r = 0; r < h; ++r) {
      std::copy(s + r * w, s + (r + 1) * w, d + r * out.w);
    }
  }
  return out;
}

// Canonical collapse of the 8 reduction slots. Shared by every backend; the
// tree shape is part of the kernel contract.
inline double reduce8(const double* a) {
  return ((a[0] + a[1]) + (a[2] + a[3])) + ((a[4] + a[5]) + (a[6] + a[7]));
}

}  // namespace orlc::kern::detail

#endif  // ORLC_SRC_KERNELS_CONV_PAD_HPP_
