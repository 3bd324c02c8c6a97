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

// Kernel correctness against slow naive oracles, plus the cross-backend
// bit-exactness contract: scalar, AVX2 and AVX-512 must agree to the last
// bit on every supported configuration.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "orlc/kernels.hpp"
#include "orlc/rng.hpp"

using orlc::Rng;
using orlc::kern::Backend;
using orlc::kern::ConvShape;

namespace {

std::vector<Backend> available_backends() {
  std::vector<Backend> out = {Backend::kScalar};
  if (orlc::kern::backend_available(Backend::kAvx2)) out.push_back(Backend::kAvx2);
  if (orlc::kern::backend_available(Backend::kAvx512)) out.push_back(Backend::kAvx512);
  return out;
}

std::vector<double> rand_vec(Rng& rng, size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Naive cross-correlation, plain mul+add, no padding buffer.
void naive_conv2d(const std::vector<double>& in, const std::vector<double>& w,
                  const std::vector<double>* bias, std::vector<double>& out, const ConvShape& s) {
  for (int64_t b = 0; b < s.batch; ++b) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      for (int64_t y = 0; y < s.out_h; ++y) {
        for (int64_t x = 0; x < s.out_w; ++x) {
          double acc = bias ? (*bias)[o] : 0.0;
          for (int64_t c = 0; c < s.in_ch; ++c) {
            for (int64_t ky = 0; ky < s.kernel; ++ky) {
              for (int64_t kx = 0; kx < s.kernel; ++kx) {
                const int64_t iy = y * s.stride + ky - s.pad;
                const int64_t ix = x * s.stride + kx - s.pad;
                if (iy < 0 || iy >= s.in_h || ix < 0 || ix >= s.in_w) continue;
                acc += in[((b * s.in_ch + c) * s.in_h + iy) * s.in_w + ix] *
                       w[((o * s.in_ch + c) * s.kernel + ky) * s.kernel + kx];
              }
            }
          }
          out[((b * s.out_ch + o) * s.out_h + y) * s.out_w + x] = acc;
        }
      }
    }
  }
}

// Naive transposed conv in its defining scatter-add form.
void naive_convt(const std::vector<double>& in, const std::vector<double>& w,
                 const std::vector<double>* bias, std::vector<double>& out, const ConvShape& s) {
  for (int64_t b = 0; b < s.batch; ++b) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      for (int64_t y = 0; y < s.out_h; ++y) {
        for (int64_t x = 0; x < s.out_w; ++x) {
          out[((b * s.out_ch + o) * s.out_h + y) * s.out_w + x] = bias ? (*bias)[o] : 0.0;
        }
      }
    }
  }
  for (int64_t b = 0; b < s.batch; ++b) {
    for (int64_t c = 0; c < s.in_ch; ++c) {
      for (int64_t iy = 0; iy < s.in_h; ++iy) {
        for (int64_t ix = 0; ix < s.in_w; ++ix) {
          const double v = in[((b * s.in_ch + c) * s.in_h + iy) * s.in_w + ix];
          for (int64_t o = 0; o < s.out_ch; ++o) {
            for (int64_t ky = 0; ky < s.kernel; ++ky) {
              for (int64_t kx = 0; kx < s.kernel; ++kx) {
                const int64_t oy = iy * s.stride - s.pad + ky;
                const int64_t ox = ix * s.stride - s.pad + kx;
                if (oy < 0 || oy >= s.out_h || ox < 0 || ox >= s.out_w) continue;
                out[((b * s.out_ch + o) * s.out_h + oy) * s.out_w + ox] +=
                    v * w[((c * s.out_ch + o) * s.kernel + ky) * s.kernel + kx];
              }
            }
          }
        }
      }
    }
  }
}

void naive_conv2d_grad_w(const std::vector<double>& gout, const std::vector<double>& in,
                         std::vector<double>& gw, std::vector<double>& gb, const ConvShape& s) {
  for (int64_t b = 0; b < s.batch; ++b) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      for (int64_t y = 0; y < s.out_h; ++y) {
        for (int64_t x = 0; x < s.out_w; ++x) {
          const double g = gout[((b * s.out_ch + o) * s.out_h + y) * s.out_w + x];
          gb[o] += g;
          for (int64_t c = 0; c < s.in_ch; ++c) {
            for (int64_t ky = 0; ky < s.kernel; ++ky) {
              for (int64_t kx = 0; kx < s.kernel; ++kx) {
                const int64_t iy = y * s.stride + ky - s.pad;
                const int64_t ix = x * s.stride + kx - s.pad;
                if (iy < 0 || iy >= s.in_h || ix < 0 || ix >= s.in_w) continue;
                gw[((o * s.in_ch + c) * s.kernel + ky) * s.kernel + kx] +=
                    g * in[((b * s.in_ch + c) * s.in_h + iy) * s.in_w + ix];
              }
            }
          }
        }
      }
    }
  }
}

void naive_convt_grad_w(const std::vector<double>& gout, const std::vector<double>& in,
                        std::vector<double>& gw, std::vector<double>& gb, const ConvShape& s) {
  for (int64_t b = 0; b < s.batch; ++b) {
    for (int64_t o = 0; o < s.out_ch; ++o) {
      for (int64_t y = 0; y < s.out_h; ++y) {
        for (int64_t x = 0; x < s.out_w; ++x) {
          gb[o] += gout[((b * s.out_ch + o) * s.out_h + y) * s.out_w + x];
        }
      }
    }
  }
  for (int64_t b = 0; b < s.batch; ++b) {
    for (int64_t c = 0; c < s.in_ch; ++c) {
      for (int64_t iy = 0; iy < s.in_h; ++iy) {
        for (int64_t ix = 0; ix < s.in_w; ++ix) {
          const double v = in[((b * s.in_ch + c) * s.in_h + iy) * s.in_w + ix];
          for (int64_t o = 0; o < s.out_ch; ++o) {
            for (int64_t ky = 0; ky < s.kernel; ++ky) {
              for (int64_t kx = 0; kx < s.kernel; ++kx) {
                const int64_t oy = iy * s.stride - s.pad + ky;
                const int64_t ox = ix * s.stride - s.pad + kx;
                if (oy < 0 || oy >= s.out_h || ox < 0 || ox >= s.out_w) continue;
                gw[((c * s.out_ch + o) * s.kernel + ky) * s.kernel + kx] +=
                    v * gout[((b * s.out_ch + o) * s.out_h + oy) * s.out_w + ox];
              }
            }
          }
        }
      }
    }
  }
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), 1.0});
    REQUIRE(std::fabs(a[i] - b[i]) / denom < tol);
  }
}

void check_bitwise(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  REQUIRE(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

struct ConvCase {
  ConvShape s;
  std::vector<double> in, w, bias;
};

ConvCase random_conv_case(Rng& rng, bool transposed) {
  ConvShape s;
  s.batch = 1 + static_cast<int64_t>(rng.below(3));
  s.in_ch = 1 + static_cast<int64_t>(rng.below(5));
  s.out_ch = 1 + static_cast<int64_t>(rng.below(6));
  s.kernel = 1 + static_cast<int64_t>(rng.below(5));
  s.stride = 1 + static_cast<int64_t>(rng.below(3));
  s.pad = static_cast<int64_t>(rng.below(std::min<int64_t>(s.kernel, 3)));
  s.in_h = s.kernel + static_cast<int64_t>(rng.below(14));
  s.in_w = s.kernel + static_cast<int64_t>(rng.below(18));
  if (transposed) {
    s.out_h = (s.in_h - 1) * s.stride - 2 * s.pad + s.kernel;
    s.out_w = (s.in_w - 1) * s.stride - 2 * s.pad + s.kernel;
    if (s.out_h <= 0 || s.out_w <= 0) {
      s.pad = 0;
      s.out_h = (s.in_h - 1) * s.stride + s.kernel;
      s.out_w = (s.in_w - 1) * s.stride + s.kernel;
    }
    // sometimes request a larger canvas, as the conv2d gradient path does
    if (rng.below(3) == 0) {
      s.out_h += static_cast<int64_t>(rng.below(static_cast<uint64_t>(s.stride)));
      s.out_w += static_cast<int64_t>(rng.below(static_cast<uint64_t>(s.stride)));
    }
  } else {
    if (s.in_h + 2 * s.pad < s.kernel) s.pad = s.kernel;  // keep valid
    s.out_h = (s.in_h + 2 * s.pad - s.kernel) / s.stride + 1;
    s.out_w = (s.in_w + 2 * s.pad - s.kernel) / s.stride + 1;
  }
  ConvCase c;
  c.s = s;
  c.in = rand_vec(rng, static_cast<size_t>(s.batch * s.in_ch * s.in_h * s.in_w));
  c.w = rand_vec(rng, static_cast<size_t>(s.in_ch * s.out_ch * s.kernel * s.kernel));
  c.bias = rand_vec(rng, static_cast<size_t>(s.out_ch));
  return c;
}

}  // namespace

TEST_CASE("conv2d_fwd matches the naive oracle") {
  Rng rng(101);
  for (int iter = 0; iter < 60; ++iter) {
    ConvCase c = random_conv_case(rng, false);
    std::vector<double> expect(static_cast<size_t>(c.s.batch * c.s.out_ch * c.s.out_h * c.s.out_w));
    naive_conv2d(c.in, c.w, &c.bias, expect, c.s);
    std::vector<double> got(expect.size(), 0.0);
    orlc::kern::active().conv2d_fwd(c.in.data(), c.w.data(), c.bias.data(), got.data(), c.s,
                                    false);
    check_close(expect, got, 1e-12);
  }
}

TEST_CASE("convt_fwd matches the scatter-add oracle") {
  Rng rng(202);
  for (int iter = 0; iter < 60; ++iter) {
    ConvCase c = random_conv_case(rng, true);
    std::vector<double> expect(static_cast<size_t>(c.s.batch * c.s.out_ch * c.s.out_h * c.s.out_w));
    naive_convt(c.in, c.w, &c.bias, expect, c.s);
    std::vector<double> got(expect.size(), 0.0);
    orlc::kern::active().convt_fwd(c.in.data(), c.w.data(), c.bias.data(), got.data(), c.s, false);
    check_close(expect, got, 1e-12);
  }
}

TEST_CASE("gradient kernels match naive accumulation") {
  Rng rng(303);
  for (int iter = 0; iter < 40; ++iter) {
    // conv2d grad
    {
      ConvCase c = random_conv_case(rng, false);
      const size_t n_out = static_cast<size_t>(c.s.batch * c.s.out_ch * c.s.out_h * c.s.out_w);
      std::vector<double> gout = rand_vec(rng, n_out);
      std::vector<double> egw(c.w.size(), 0.0), egb(static_cast<size_t>(c.s.out_ch), 0.0);
      naive_conv2d_grad_w(gout, c.in, egw, egb, c.s);
      std::vector<double> gw(c.w.size(), 0.0), gb(static_cast<size_t>(c.s.out_ch), 0.0);
      orlc::kern::active().conv2d_grad_w(gout.data(), c.in.data(), gw.data(), gb.data(), c.s);
      check_close(egw, gw, 1e-11);
      check_close(egb, gb, 1e-11);
    }
    // convt grad
    {
      ConvCase c = random_conv_case(rng, true);
      const size_t n_out = static_cast<size_t>(c.s.batch * c.s.out_ch * c.s.out_h * c.s.out_w);
      std::vector<double> gout = rand_vec(rng, n_out);
      std::vector<double> egw(c.w.size(), 0.0), egb(static_cast<size_t>(c.s.out_ch), 0.0);
      naive_convt_grad_w(gout, c.in, egw, egb, c.s);
      std::vector<double> gw(c.w.size(), 0.0), gb(static_cast<size_t>(c.s.out_ch), 0.0);
      orlc::kern::active().convt_grad_w(gout.data(), c.in.data(), gw.data(), gb.data(), c.s);
      check_close(egw, gw, 1e-11);
      check_close(egb, gb, 1e-11);
    }
  }
}

TEST_CASE("all backends produce bit-identical conv results") {
  const auto backends = available_backends();
  REQUIRE(backends.size() >= 1);
  Rng rng(404);
  for (int iter = 0; iter < 80; ++iter) {
    const bool transposed = iter % 2 == 1;
    ConvCase c = random_conv_case(rng, transposed);
    const bool accumulate = rng.below(2) == 0;
    const size_t n_out = static_cast<size_t>(c.s.batch * c.s.out_ch * c.s.out_h * c.s.out_w);
    const std::vector<double> base =
        accumulate ? rand_vec(rng, n_out) : std::vector<double>(n_out, 0.0);

    std::vector<std::vector<double>> results;
    for (Backend b : backends) {
      std::vector<double> out = base;
      const auto& k = orlc::kern::table(b);
      if (transposed) {
        k.convt_fwd(c.in.data(), c.w.data(), c.bias.data(), out.data(), c.s, accumulate);
      } else {
        k.conv2d_fwd(c.in.data(), c.w.data(), c.bias.data(), out.data(), c.s, accumulate);
      }
      results.push_back(std::move(out));
    }
    for (size_t i = 1; i < results.size(); ++i) check_bitwise(results[0], results[i]);
  }
}

TEST_CASE("all backends produce bit-identical gradient results") {
  const auto backends = available_backends();
  Rng rng(505);
  for (int iter = 0; iter < 60; ++iter) {
    const bool transposed = iter % 2 == 1;
    ConvCase c = random_conv_case(rng, transposed);
    const size_t n_out = static_cast<size_t>(c.s.batch * c.s.out_ch * c.s.out_h * c.s.out_w);
    std::vector<double> gout = rand_vec(rng, n_out);

    std::vector<std::vector<double>> gws, gbs;
    for (Backend b : backends) {
      std::vector<double> gw(c.w.size(), 0.0), gb(static_cast<size_t>(c.s.out_ch), 0.0);
      const auto& k = orlc::kern::table(b);
      if (transposed) {
        k.convt_grad_w(gout.data(), c.in.data(), gw.data(), gb.data(), c.s);
      } else {
        k.conv2d_grad_w(gout.data(), c.in.data(), gw.data(), gb.data(), c.s);
      }
      gws.push_back(std::move(gw));
      gbs.push_back(std::move(gb));
    }
    for (size_t i = 1; i < gws.size(); ++i) {
      check_bitwise(gws[0], gws[i]);
      check_bitwise(gbs[0], gbs[i]);
    }
  }
}

TEST_CASE("elementwise and reduction kernels: semantics and bit-exact equivalence") {
  const auto backends = available_backends();
  Rng rng(606);
  for (size_t n : {size_t{1}, size_t{7}, size_t{8}, size_t{9}, size_t{64}, size_t{1000},
                   size_t{4097}}) {
    const std::vector<double> a = rand_vec(rng, n, -2.0, 2.0);
    const std::vector<double> b = rand_vec(rng, n, -2.0, 2.0);
    const std::vector<double> g = rand_vec(rng, n, -2.0, 2.0);
    const double c = rng.uniform(-2.0, 2.0);

    std::vector<std::vector<double>> outs;
    std::vector<double> sums, sq_sums;
    for (Backend bk : backends) {
      const auto& k = orlc::kern::table(bk);
      std::vector<double> out(n), tmp(n);
      std::vector<double> collected;

      k.ew_add(a.data(), b.data(), out.data(), n);
      collected.insert(collected.end(), out.begin(), out.end());
      k.ew_sub(a.data(), b.data(), out.data(), n);
      collected.insert(collected.end(), out.begin(), out.end());
      k.ew_mul(a.data(), b.data(), out.data(), n);
      collected.insert(collected.end(), out.begin(), out.end());
      k.ew_scale(a.data(), c, out.data(), n);
      collected.insert(collected.end(), out.begin(), out.end());
      tmp = b;
      k.ew_acc(a.data(), tmp.data(), n);
      collected.insert(collected.end(), tmp.begin(), tmp.end());
      tmp = b;
      k.ew_axpy(c, a.data(), tmp.data(), n);
      collected.insert(collected.end(), tmp.begin(), tmp.end());
      tmp = g;
      k.ew_mul_acc(a.data(), b.data(), tmp.data(), n);
      collected.insert(collected.end(), tmp.begin(), tmp.end());
      tmp = g;
      k.ew_diff_axpy(c, a.data(), b.data(), tmp.data(), n);
      collected.insert(collected.end(), tmp.begin(), tmp.end());
      k.lrelu_fwd(a.data(), 0.2, out.data(), n);
      collected.insert(collected.end(), out.begin(), out.end());
      tmp = g;
      k.lrelu_bwd(a.data(), b.data(), 0.2, tmp.data(), n);
      collected.insert(collected.end(), tmp.begin(), tmp.end());
      k.clamp_fwd(a.data(), -0.5, 0.5, out.data(), n);
      collected.insert(collected.end(), out.begin(), out.end());
      tmp = g;
      k.clamp_bwd(a.data(), b.data(), -0.5, 0.5, tmp.data(), n);
      collected.insert(collected.end(), tmp.begin(), tmp.end());

      outs.push_back(std::move(collected));
      sums.push_back(k.sum_all(a.data(), n));
      sq_sums.push_back(k.sq_diff_sum(a.data(), b.data(), n));
    }
    for (size_t i = 1; i < outs.size(); ++i) {
      check_bitwise(outs[0], outs[i]);
      REQUIRE(sums[0] == sums[i]);
      REQUIRE(sq_sums[0] == sq_sums[i]);
    }

    // semantic spot checks against plain loops
    double esum = 0.0, esq = 0.0;
    for (size_t i = 0; i < n; ++i) {
      esum += a[i];
      esq += (a[i] - b[i]) * (a[i] - b[i]);
    }
    REQUIRE(std::fabs(sums[0] - esum) < 1e-9 * (1.0 + std::fabs(esum)));
    REQUIRE(std::fabs(sq_sums[0] - esq) < 1e-9 * (1.0 + esq));
  }
}

TEST_CASE("leaky_relu kernel values") {
  const auto& k = orlc::kern::active();
  const std::vector<double> in = {1.0, -1.0, 0.0, 2.5, -0.25};
  std::vector<double> out(in.size());
  k.lrelu_fwd(in.data(), 0.2, out.data(), in.size());
  CHECK(out[0] == 1.0);
  CHECK(out[1] == doctest::Approx(-0.2));
  CHECK(out[2] == 0.0);
  CHECK(out[3] == 2.5);
  CHECK(out[4] == doctest::Approx(-0.05));
}
