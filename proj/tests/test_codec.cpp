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

// Transforms, parameter initialization, checkpoints, entropy model.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "orlc/entropy.hpp"
#include "orlc/grad_check.hpp"
#include "orlc/mathfn.hpp"
#include "orlc/transforms.hpp"
#include "orlc/util.hpp"

using namespace orlc;

namespace {

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "orlc_test_codec";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("init_params: deterministic, zero biases, expected weight spread") {
  ModelConfig cfg;
  const ModelParams a = init_params(cfg, 42);
  const ModelParams b = init_params(cfg, 42);
  const auto bytes_a = serialize_params(a);
  const auto bytes_b = serialize_params(b);
  CHECK(bytes_a == bytes_b);

  const ModelParams c = init_params(cfg, 43);
  CHECK(serialize_params(c) != bytes_a);

  a.for_each_param([](const std::string& name, const Tensor& t) {
    if (name.find(".b") != std::string::npos) {
      for (double v : t.values()) CHECK(v == 0.0);
    }
  });

  // ana1.w has fan-in 64*3*3 = 576; uniform(-1/sqrt(576), ...) has sd
  // 1/(sqrt(576)*sqrt(3)).
  const Tensor& w = a.analysis[1].w;
  double mean = 0.0;
  for (double v : w.values()) mean += v;
  mean /= static_cast<double>(w.numel());
  double var = 0.0;
  for (double v : w.values()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(w.numel());
  const double expect_sd = (1.0 / std::sqrt(576.0)) / std::sqrt(3.0);
  CHECK(std::sqrt(var) == doctest::Approx(expect_sd).epsilon(0.2));
}

TEST_CASE("analysis/synthesis shapes and zero propagation") {
  ModelConfig cfg;
  ModelParams p = init_params(cfg, 1);
  Rng rng(5);
  const Tensor x = Tensor::uniform({1, 3, 64, 64}, rng, 0.0, 1.0);
  const Tensor y = analysis(x, p, nullptr);
  CHECK(y.shape() == std::vector<int64_t>{1, 48, 4, 4});
  const Tensor xh = synthesis(y, p, nullptr);
  CHECK(xh.shape() == std::vector<int64_t>{1, 3, 64, 64});

  // all-zero params map anything to zero
  ModelParams zp = init_params(cfg, 1);
  zp.for_each_param([](const std::string&, Tensor& t) {
    std::fill(t.values().begin(), t.values().end(), 0.0);
  });
  const Tensor zy = analysis(x, zp, nullptr);
  for (double v : zy.values()) CHECK(v == 0.0);
  const Tensor zx = synthesis(y, zp, nullptr);
  for (double v : zx.values()) CHECK(v == 0.0);

  // shape contract holds across config-compliant sizes
  for (int64_t hw : {32, 48, 96}) {
    const Tensor xi = Tensor::uniform({1, 3, hw, hw}, rng, 0.0, 1.0);
    const Tensor yi = analysis(xi, p, nullptr);
    const Tensor xo = synthesis(yi, p, nullptr);
    CHECK(xo.dim(2) == hw);
    CHECK(xo.dim(3) == hw);
  }

  CHECK_THROWS_WITH_AS(analysis(Tensor::zeros({1, 3, 60, 64}), p, nullptr),
                       doctest::Contains("divisible by 16"), Error);
  CHECK_THROWS_AS(synthesis(Tensor::zeros({1, 47, 4, 4}), p, nullptr), Error);
}

TEST_CASE("analysis: latent elements outside a pixel's receptive field are untouched") {
  // Receptive field after (5,s2)(3,s2)(3,s2)(3,s2) is 33 pixels with jump 16;
  // latent (3,3) is centered at pixel 48 and reaches back to pixel 32 > 0.
  ModelConfig cfg;
  ModelParams p = init_params(cfg, 2);
  Rng rng(6);
  Tensor x = Tensor::uniform({1, 3, 64, 64}, rng, 0.0, 1.0);
  const Tensor y0 = analysis(x, p, nullptr);
  Tensor x2 = x.clone();
  x2.values()[0] += 0.25;  // corner pixel of channel 0
  const Tensor y1 = analysis(x2, p, nullptr);
  bool any_changed = false;
  for (int64_t c = 0; c < 48; ++c) {
    CHECK(y0.at({0, c, 3, 3}) == y1.at({0, c, 3, 3}));
    if (y0.at({0, c, 0, 0}) != y1.at({0, c, 0, 0})) any_changed = true;
  }
  CHECK(any_changed);
}

TEST_CASE("checkpoint round-trip is byte-identical and validated") {
  ModelConfig cfg;
  cfg.hidden_channels = 8;
  cfg.latent_channels = 6;
  ModelParams p = init_params(cfg, 99);
  // make values non-trivial
  p.ent_mu.values()[0] = 0.125;
  p.ent_log_scale.values()[1] = -0.5;

  const auto dir = temp_dir();
  const auto path = dir / "ckpt.orlc";
  save_checkpoint(p, path);
  const ModelParams q = load_checkpoint(path);
  const auto path2 = dir / "ckpt2.orlc";
  save_checkpoint(q, path2);
  CHECK(read_file(path) == read_file(path2));
  CHECK(params_checksum(p) == params_checksum(q));

  // corrupting the magic or truncating must be rejected
  auto bytes = read_file(path);
  auto bad = bytes;
  bad[0] ^= 0x01;
  CHECK_THROWS_AS(deserialize_params(bad.data(), bad.size()), Error);
  CHECK_THROWS_AS(deserialize_params(bytes.data(), bytes.size() - 7), Error);
}

TEST_CASE("quantize_train: bounded noise, deterministic, mean near zero") {
  Rng rng(7);
  const Tensor y = Tensor::uniform({1, 4, 8, 8}, rng, -3.0, 3.0);
  const Tensor t1 = quantize_train(y, 123, nullptr);
  const Tensor t2 = quantize_train(y, 123, nullptr);
  const Tensor t3 = quantize_train(y, 124, nullptr);
  bool differs = false;
  for (int64_t i = 0; i < y.numel(); ++i) {
    const double d = t1.values()[static_cast<size_t>(i)] - y.values()[static_cast<size_t>(i)];
    CHECK(std::fabs(d) < 0.5);
    CHECK(t1.values()[static_cast<size_t>(i)] == t2.values()[static_cast<size_t>(i)]);
    if (t1.values()[static_cast<size_t>(i)] != t3.values()[static_cast<size_t>(i)]) differs = true;
  }
  CHECK(differs);

  // mean of u over 1e6 draws concentrates within +-0.002
  const Tensor big = Tensor::zeros({1, 1, 1000, 1000});
  const Tensor noisy = quantize_train(big, 55, nullptr);
  double mean = 0.0;
  for (double v : noisy.values()) mean += v;
  mean /= 1e6;
  CHECK(mean > -0.002);
  CHECK(mean < 0.002);
}

TEST_CASE("quantize_infer rounds ties away from zero") {
  const Tensor y = Tensor::from({8}, {0.4, -0.4, 1.5, -1.5, 2.0, -2.0, 0.5, -0.5});
  const Tensor q = quantize_infer(y);
  CHECK(q.values()[0] == 0.0);
  CHECK(q.values()[1] == 0.0);
  CHECK(q.values()[2] == 2.0);
  CHECK(q.values()[3] == -2.0);
  CHECK(q.values()[4] == 2.0);
  CHECK(q.values()[5] == -2.0);
  CHECK(q.values()[6] == 1.0);
  CHECK(q.values()[7] == -1.0);
}

TEST_CASE("bits_estimate: closed-form values") {
  // single element v=0, mu=0, s=1: P = sigma(.5) - sigma(-.5) = 0.2449186624
  const Tensor y = Tensor::zeros({1, 1, 1, 1});
  const Tensor mu = Tensor::zeros({1});
  const Tensor rho = Tensor::zeros({1});
  const double bits = bits_estimate(y, mu, rho, nullptr).item();
  const double p = math::logistic_d(0.5) - math::logistic_d(-0.5);
  CHECK(bits == doctest::Approx(-std::log2(p)).epsilon(1e-12));
  CHECK(bits == doctest::Approx(2.0296).epsilon(1e-4));

  // far tail hits the probability floor: -log2(1e-9) = 29.897...
  const Tensor far = Tensor::full({1, 1, 1, 1}, 5000.0);
  const double floor_bits = bits_estimate(far, mu, rho, nullptr).item();
  CHECK(floor_bits == doctest::Approx(-std::log2(1e-9)).epsilon(1e-12));
  CHECK(floor_bits == doctest::Approx(29.897352).epsilon(1e-6));
}

TEST_CASE("bits_estimate: additivity over concatenation and nonnegativity") {
  Rng rng(8);
  const Tensor mu = Tensor::uniform({3}, rng, -1.0, 1.0);
  const Tensor rho = Tensor::uniform({3}, rng, -0.5, 0.5);
  const Tensor a = Tensor::uniform({1, 3, 2, 2}, rng, -4.0, 4.0);
  const Tensor b = Tensor::uniform({1, 3, 2, 2}, rng, -4.0, 4.0);
  const double ba = bits_estimate(a, mu, rho, nullptr).item();
  const double bb = bits_estimate(b, mu, rho, nullptr).item();
  CHECK(ba >= 0.0);
  CHECK(bb >= 0.0);
  // concatenate along height
  Tensor cat = Tensor::zeros({1, 3, 4, 2});
  for (int64_t c = 0; c < 3; ++c) {
    for (int64_t i = 0; i < 4; ++i) {
      cat.values()[static_cast<size_t>(c * 8 + i)] = a.values()[static_cast<size_t>(c * 4 + i)];
      cat.values()[static_cast<size_t>(c * 8 + 4 + i)] =
          b.values()[static_cast<size_t>(c * 4 + i)];
    }
  }
  const double bc = bits_estimate(cat, mu, rho, nullptr).item();
  CHECK(bc == doctest::Approx(ba + bb).epsilon(1e-12));
}

TEST_CASE("bits_estimate: mu gradient vanishes on symmetric values") {
  Tensor y = Tensor::zeros({1, 1, 1, 6});
  const double offsets[3] = {0.3, 1.1, 2.4};
  const double mu0 = 0.7;
  for (int i = 0; i < 3; ++i) {
    y.values()[static_cast<size_t>(2 * i)] = mu0 + offsets[i];
    y.values()[static_cast<size_t>(2 * i + 1)] = mu0 - offsets[i];
  }
  Tensor mu = Tensor::from({1}, {mu0});
  Tensor rho = Tensor::from({1}, {0.1});
  mu.set_requires_grad(true);
  Tape tape;
  const Tensor bits = bits_estimate(y, mu, rho, &tape);
  ops::backward(bits, tape);
  CHECK(std::fabs(mu.grad()[0]) < 1e-12);
}

TEST_CASE("bits_estimate gradients pass the finite-difference oracle") {
  Rng rng(9);
  SUBCASE("w.r.t. latent") {
    const Tensor y0 = Tensor::uniform({1, 2, 3, 3}, rng, -2.5, 2.5);
    const Tensor mu = Tensor::uniform({2}, rng, -0.5, 0.5);
    const Tensor rho = Tensor::uniform({2}, rng, -0.4, 0.4);
    auto f = [&](const Tensor& t, Tape* tape) { return bits_estimate(t, mu, rho, tape); };
    CHECK(finite_diff_check(f, y0, 1e-5, 1e-4).pass);
  }
  SUBCASE("w.r.t. mu and log-scale") {
    const Tensor y = Tensor::uniform({1, 2, 4, 4}, rng, -2.5, 2.5);
    const Tensor mu0 = Tensor::uniform({2}, rng, -0.5, 0.5);
    const Tensor rho0 = Tensor::uniform({2}, rng, -0.4, 0.4);
    auto fmu = [&](const Tensor& t, Tape* tape) { return bits_estimate(y, t, rho0, tape); };
    CHECK(finite_diff_check(fmu, mu0, 1e-5, 1e-4).pass);
    auto frho = [&](const Tensor& t, Tape* tape) { return bits_estimate(y, mu0, t, tape); };
    CHECK(finite_diff_check(frho, rho0, 1e-5, 1e-4).pass);
  }
}

TEST_CASE("synthesis-of-analysis gradient chain passes the oracle") {
  ModelConfig cfg;
  cfg.hidden_channels = 4;
  cfg.latent_channels = 3;
  cfg.num_down_layers = 2;
  ModelParams p = init_params(cfg, 3);
  p.set_requires_grad(false);
  Rng rng(10);
  const Tensor x0 = Tensor::uniform({1, 3, 8, 8}, rng, 0.1, 0.9);
  auto f = [&](const Tensor& t, Tape* tape) {
    const Tensor y = analysis(t, p, tape);
    const Tensor xh = synthesis(y, p, tape);
    return ops::reduce_mean_square_diff(xh, Tensor::zeros(xh.shape()), tape);
  };
  CHECK(finite_diff_check(f, x0, 1e-4, 1e-4).pass);
}
