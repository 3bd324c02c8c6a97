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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "orlc/grad_check.hpp"
#include "orlc/loss.hpp"
#include "orlc/util.hpp"

using namespace orlc;

namespace {

Tensor random_mask(Rng& rng, int64_t b, int64_t h, int64_t w, double p_one = 0.5) {
  Tensor m = Tensor::zeros({b, 1, h, w});
  for (double& v : m.values()) v = rng.uniform() < p_one ? 1.0 : 0.0;
  return m;
}

}  // namespace

TEST_CASE("mask_apply: identity, zero, hand example, broadcast") {
  const Tensor a = Tensor::from({4}, {0.5, 0.2, 0.1, 0.9});
  const Tensor ones = Tensor::full({4}, 1.0);
  const Tensor zeros = Tensor::zeros({4});
  const Tensor m = Tensor::from({4}, {1, 0, 0, 1});

  const Tensor ia = mask_apply(a, ones, nullptr);
  for (int i = 0; i < 4; ++i) CHECK(ia.values()[i] == a.values()[i]);
  const Tensor za = mask_apply(a, zeros, nullptr);
  for (double v : za.values()) CHECK(v == 0.0);

  const Tensor ma = mask_apply(a, m, nullptr);
  CHECK(ma.values()[0] == 0.5);
  CHECK(ma.values()[1] == 0.0);
  CHECK(ma.values()[2] == 0.0);
  CHECK(ma.values()[3] == 0.9);

  // broadcast across channels
  Rng rng(1);
  const Tensor img = Tensor::uniform({2, 3, 4, 4}, rng, 0.0, 1.0);
  const Tensor bm = random_mask(rng, 2, 4, 4);
  const Tensor out = mask_apply(img, bm, nullptr);
  for (int64_t b = 0; b < 2; ++b) {
    for (int64_t c = 0; c < 3; ++c) {
      for (int64_t p = 0; p < 16; ++p) {
        const double mv = bm.values()[static_cast<size_t>(b * 16 + p)];
        CHECK(out.at({b, c, p / 4, p % 4}) == img.at({b, c, p / 4, p % 4}) * mv);
      }
    }
  }

  // non-binary mask is rejected
  const Tensor badm = Tensor::from({4}, {1.0, 0.5, 0.0, 1.0});
  CHECK_THROWS_WITH_AS(mask_apply(a, badm, nullptr), doctest::Contains("not binary"), Error);
}

TEST_CASE("object_mse: examples and reductions") {
  const Tensor b = Tensor::from({4}, {0.5, 0.2, 0.1, 0.9});
  const Tensor c = Tensor::from({4}, {0.3, 0.4, 0.1, 0.5});
  const Tensor ones = Tensor::full({4}, 1.0);
  const Tensor zeros = Tensor::zeros({4});
  const Tensor m = Tensor::from({4}, {1, 0, 0, 1});

  // all ones -> plain MSE (bitwise: multiply by one is exact)
  CHECK(object_mse(b, c, ones, ones, nullptr).item() ==
        ops::reduce_mean_square_diff(b, c, nullptr).item());
  CHECK(object_mse(b, c, zeros, zeros, nullptr).item() == 0.0);
  CHECK(object_mse(b, c, m, m, nullptr).item() == doctest::Approx(0.05).epsilon(1e-12));

  // object-pixel normalization divides by covered elements instead
  CHECK(object_mse(b, c, m, m, nullptr, MseNorm::kObjectPixels).item() ==
        doctest::Approx(0.10).epsilon(1e-12));
}

TEST_CASE("object_mse properties: bounded by MSE, symmetric, monotone in mask") {
  Rng rng(2);
  for (int iter = 0; iter < 50; ++iter) {
    const Tensor b = Tensor::uniform({1, 3, 6, 6}, rng, 0.0, 1.0);
    const Tensor c = Tensor::uniform({1, 3, 6, 6}, rng, 0.0, 1.0);
    const Tensor m1 = random_mask(rng, 1, 6, 6, 0.4);
    const double full = ops::reduce_mean_square_diff(b, c, nullptr).item();
    const double masked = object_mse(b, c, m1, m1, nullptr).item();
    CHECK(masked <= full + 1e-15);

    // symmetry in (b, m_b) <-> (c, m_c)
    const Tensor m2 = random_mask(rng, 1, 6, 6, 0.4);
    CHECK(object_mse(b, c, m1, m2, nullptr).item() ==
          doctest::Approx(object_mse(c, b, m2, m1, nullptr).item()).epsilon(1e-12));

    // adding pixels to a shared mask never decreases the value
    Tensor m3 = m1.clone();
    for (double& v : m3.values()) {
      if (v == 0.0 && rng.uniform() < 0.3) v = 1.0;
    }
    CHECK(object_mse(b, c, m3, m3, nullptr).item() >= masked - 1e-15);
  }
}

TEST_CASE("loss_human: composition example") {
  // rate 0.5 bpp over 4096 pixels, MSE 0.001 on [0,1], lambda 0.01
  const int64_t num_pixels = 4096;
  const Tensor bits = Tensor::scalar(0.5 * num_pixels);
  Tensor x = Tensor::zeros({1, 1, 2, 2});
  // 4 pixels with squared error 0.001 each -> MSE 0.001
  Tensor xh = Tensor::from({1, 1, 2, 2},
                           {std::sqrt(0.001), std::sqrt(0.001), std::sqrt(0.001),
                            std::sqrt(0.001)});
  const double loss = loss_human(x, xh, bits, 0.01, num_pixels, nullptr).item();
  CHECK(loss == doctest::Approx(1.15025).epsilon(1e-9));

  // x == xh -> loss is the rate term alone
  const double rate_only = loss_human(x, x, bits, 0.01, num_pixels, nullptr).item();
  CHECK(rate_only == 0.5);

  CHECK_THROWS_AS(loss_human(x, xh, bits, 0.0, num_pixels, nullptr), Error);
}

TEST_CASE("loss_proposed: mask reductions and the composed example") {
  Rng rng(3);
  const Tensor x = Tensor::uniform({1, 3, 4, 4}, rng, 0.0, 1.0);
  const Tensor xh = Tensor::uniform({1, 3, 4, 4}, rng, 0.0, 1.0);
  const Tensor bits = Tensor::scalar(37.5);
  const int64_t num_pixels = 16;
  const Tensor ones = Tensor::full({1, 1, 4, 4}, 1.0);
  const Tensor zeros = Tensor::zeros({1, 1, 4, 4});

  // all-ones mask: exactly loss_human
  CHECK(loss_proposed(x, xh, ones, bits, 0.02, num_pixels, nullptr).item() ==
        loss_human(x, xh, bits, 0.02, num_pixels, nullptr).item());
  // zero mask: exactly the rate term
  CHECK(loss_proposed(x, xh, zeros, bits, 0.02, num_pixels, nullptr).item() ==
        bits.item() / num_pixels);

  // composed example: object_mse 0.05, lambda 0.02, rate 0.8 bpp
  const Tensor b4 = Tensor::from({1, 1, 2, 2}, {0.5, 0.2, 0.1, 0.9});
  const Tensor c4 = Tensor::from({1, 1, 2, 2}, {0.3, 0.4, 0.1, 0.5});
  const Tensor m4 = Tensor::from({1, 1, 2, 2}, {1, 0, 0, 1});
  const Tensor bits4 = Tensor::scalar(0.8 * 4);
  const double loss = loss_proposed(b4, c4, m4, bits4, 0.02, 4, nullptr).item();
  CHECK(loss == doctest::Approx(65.825).epsilon(1e-9));
}

TEST_CASE("gradient locality: masked-out pixels receive exactly zero gradient") {
  Rng rng(4);
  for (int iter = 0; iter < 25; ++iter) {
    const Tensor x = Tensor::uniform({1, 3, 8, 8}, rng, 0.0, 1.0);
    Tensor xh = Tensor::uniform({1, 3, 8, 8}, rng, 0.0, 1.0);
    xh.set_requires_grad(true);
    const Tensor m = random_mask(rng, 1, 8, 8, rng.uniform(0.1, 0.9));
    const Tensor bits = Tensor::scalar(100.0);
    Tape tape;
    const Tensor loss = loss_proposed(x, xh, m, bits, 0.02, 64, &tape);
    ops::backward(loss, tape);
    REQUIRE(xh.has_grad());
    const int64_t hw = 64;
    for (int64_t c = 0; c < 3; ++c) {
      for (int64_t p = 0; p < hw; ++p) {
        const double mv = m.values()[static_cast<size_t>(p)];
        const double g = xh.grad()[static_cast<size_t>(c * hw + p)];
        if (mv == 0.0) {
          CHECK(g == 0.0);
        }
      }
    }
  }
}

TEST_CASE("loss gradients pass the finite-difference oracle") {
  Rng rng(5);
  const Tensor x = Tensor::uniform({1, 3, 4, 4}, rng, 0.0, 1.0);
  const Tensor m = random_mask(rng, 1, 4, 4, 0.5);
  SUBCASE("loss_human w.r.t. decoded image") {
    const Tensor x0 = Tensor::uniform({1, 3, 4, 4}, rng, 0.0, 1.0);
    auto f = [&](const Tensor& t, Tape* tape) {
      const Tensor bits = Tensor::scalar(12.0);
      return loss_human(x, t, bits, 0.01, 16, tape);
    };
    CHECK(finite_diff_check(f, x0, 1e-5, 1e-4).pass);
  }
  SUBCASE("loss_proposed w.r.t. decoded image") {
    const Tensor x0 = Tensor::uniform({1, 3, 4, 4}, rng, 0.0, 1.0);
    auto f = [&](const Tensor& t, Tape* tape) {
      const Tensor bits = Tensor::scalar(12.0);
      return loss_proposed(x, t, m, bits, 0.01, 16, tape);
    };
    CHECK(finite_diff_check(f, x0, 1e-5, 1e-4).pass);
  }
}
