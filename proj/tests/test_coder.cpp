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

// PMF discretization, range coder, bitstream container.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "orlc/bitstream.hpp"
#include "orlc/entropy.hpp"
#include "orlc/mathfn.hpp"
#include "orlc/pmf.hpp"
#include "orlc/range_coder.hpp"
#include "orlc/util.hpp"

using namespace orlc;

namespace {

PmfTable table_from(double mu, double rho, int64_t v_min = PmfTable::kDefaultVMin,
                    int64_t v_max = PmfTable::kDefaultVMax) {
  return build_pmf_table(Tensor::from({1}, {mu}), Tensor::from({1}, {rho}), v_min, v_max);
}

// Hand-built table with explicit frequencies for one channel.
PmfTable manual_table(std::vector<uint32_t> freq, int64_t v_min) {
  PmfTable t;
  t.v_min = v_min;
  t.v_max = v_min + static_cast<int64_t>(freq.size()) - 1;
  t.channels = 1;
  t.freq = freq;
  t.cum.resize(freq.size() + 1);
  uint32_t acc = 0;
  for (size_t i = 0; i < freq.size(); ++i) {
    t.cum[i] = acc;
    acc += freq[i];
  }
  t.cum[freq.size()] = acc;
  REQUIRE(acc == PmfTable::kTotal);
  return t;
}

double table_cross_entropy_bits(const PmfTable& t, const std::vector<std::vector<int64_t>>& seq) {
  double bits = 0.0;
  for (int64_t c = 0; c < t.channels; ++c) {
    for (int64_t v : seq[static_cast<size_t>(c)]) {
      const int64_t sym = t.clamp_symbol(v);
      bits += -std::log2(static_cast<double>(t.freq_at(c, sym)) /
                         static_cast<double>(PmfTable::kTotal));
    }
  }
  return bits;
}

}  // namespace

TEST_CASE("pmf: symmetric two-symbol split") {
  // mu centered between two symbols, huge scale -> near-uniform probabilities
  PmfTable t = manual_table({32768, 32768}, 0);
  CHECK(t.freq_at(0, 0) == 32768);
  CHECK(t.symbol_from_cum(0, 0) == 0);
  CHECK(t.symbol_from_cum(0, 32767) == 0);
  CHECK(t.symbol_from_cum(0, 32768) == 1);
  CHECK(t.symbol_from_cum(0, 65535) == 1);
}

TEST_CASE("pmf: standard logistic frequencies stay proportional") {
  const PmfTable t = build_pmf_table(Tensor::zeros({1}), Tensor::zeros({1}), -64, 63);
  REQUIRE(t.nsym() == 128);
  uint64_t total = 0;
  for (int64_t i = 0; i < t.nsym(); ++i) {
    CHECK(t.freq_at(0, i) >= 1);
    total += t.freq_at(0, i);
  }
  CHECK(total == PmfTable::kTotal);
  // frequency of symbol v=0 within 2/65536 of the true bin probability
  const double p0 = math::logistic_d(0.5) - math::logistic_d(-0.5);
  const double f0 = static_cast<double>(t.freq_at(0, 64)) / PmfTable::kTotal;
  CHECK(std::fabs(f0 - p0) <= 2.0 / 65536.0);
}

TEST_CASE("pmf: degenerate peaked channel still yields a valid table") {
  const PmfTable t = table_from(0.0, -12.0);  // scale ~ 6e-6: all mass on v=0
  uint64_t total = 0;
  for (int64_t i = 0; i < t.nsym(); ++i) {
    CHECK(t.freq_at(0, i) >= 1);
    total += t.freq_at(0, i);
  }
  CHECK(total == PmfTable::kTotal);
  CHECK(t.freq_at(0, 64) > 60000);
}

TEST_CASE("pmf: range too wide for the 16-bit total is rejected") {
  CHECK_THROWS_AS(build_pmf_table(Tensor::zeros({1}), Tensor::zeros({1}), -40000, 40000), Error);
  CHECK_THROWS_AS(build_pmf_table(Tensor::zeros({1}), Tensor::zeros({1}), 5, 5), Error);
}

TEST_CASE("entropy model mass over the coder range is consistent") {
  Rng rng(31);
  for (int iter = 0; iter < 20; ++iter) {
    const double mu = rng.uniform(-3.0, 3.0);
    const double s = math::exp_d(rng.uniform(-1.0, 1.5));
    double mass = 0.0;
    for (int64_t v = PmfTable::kDefaultVMin; v <= PmfTable::kDefaultVMax; ++v) {
      mass += channel_bin_prob(mu, s, static_cast<double>(v));
    }
    const double tail = math::logistic_d((PmfTable::kDefaultVMin - 0.5 - mu) / s) +
                        (1.0 - math::logistic_d((PmfTable::kDefaultVMax + 0.5 - mu) / s));
    CHECK(mass <= 1.0 + 1e-12);
    CHECK(mass >= 1.0 - 2.0 * tail - 1e-12);
  }
}

TEST_CASE("range coder: lossless round-trip over random tables and lengths") {
  Rng rng(32);
  for (int iter = 0; iter < 200; ++iter) {
    const int64_t channels = 1 + static_cast<int64_t>(rng.below(4));
    Tensor mu = Tensor::uniform({channels}, rng, -5.0, 5.0);
    Tensor rho = Tensor::uniform({channels}, rng, -2.0, 2.0);
    const PmfTable t = build_pmf_table(mu, rho, -64, 63);
    std::vector<std::vector<int64_t>> seq(static_cast<size_t>(channels));
    for (auto& ch : seq) {
      const size_t len = static_cast<size_t>(rng.below(500));
      ch.resize(len);
      for (auto& v : ch) v = static_cast<int64_t>(rng.uniform(-64.0, 64.0));
    }
    const EncodeResult enc = encode_symbols(seq, t);
    std::vector<int64_t> counts;
    for (const auto& ch : seq) counts.push_back(static_cast<int64_t>(ch.size()));
    const auto dec = decode_symbols(enc.payload.data(), enc.payload.size(), counts, t);
    REQUIRE(dec.size() == seq.size());
    for (size_t c = 0; c < seq.size(); ++c) {
      REQUIRE(dec[c].size() == seq[c].size());
      for (size_t i = 0; i < seq[c].size(); ++i) {
        const int64_t v = seq[c][i];
        const int64_t clamped = v < -64 ? -64 : (v > 63 ? 63 : v);
        CHECK(dec[c][i] == clamped);
      }
    }
  }
}

TEST_CASE("range coder: payload within the cross-entropy bound") {
  Rng rng(33);
  for (int iter = 0; iter < 50; ++iter) {
    const PmfTable t = table_from(rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 2.0));
    std::vector<std::vector<int64_t>> seq(1);
    seq[0].resize(2000);
    // draw from a roughly matching distribution so H is nontrivial
    for (auto& v : seq[0]) {
      v = static_cast<int64_t>(std::llround(rng.uniform(-20.0, 20.0) * rng.uniform(0.0, 1.0)));
    }
    const EncodeResult enc = encode_symbols(seq, t);
    const double H = table_cross_entropy_bits(t, seq);
    const double bits = 8.0 * static_cast<double>(enc.payload.size());
    CHECK(bits >= H);
    CHECK(bits <= 1.01 * H + 64.0);
  }
}

TEST_CASE("range coder: uniform bytes cost ~1 byte per symbol") {
  std::vector<uint32_t> freq(256, 256);  // exactly 8 bits per symbol
  const PmfTable t = manual_table(freq, 0);
  Rng rng(34);
  std::vector<std::vector<int64_t>> seq(1);
  seq[0].resize(1000);
  for (auto& v : seq[0]) v = static_cast<int64_t>(rng.below(256));
  const EncodeResult enc = encode_symbols(seq, t);
  CHECK(enc.payload.size() >= 1000);
  CHECK(enc.payload.size() <= 1010);
}

TEST_CASE("range coder: skewed binary source compresses hard") {
  std::vector<uint32_t> freq = {64881, 655};  // ~ P = (0.99, 0.01)
  const PmfTable t = manual_table(freq, 0);
  Rng rng(35);
  std::vector<std::vector<int64_t>> seq(1);
  seq[0].resize(1000);
  int ones = 0;
  for (auto& v : seq[0]) {
    v = rng.uniform() < 0.01 ? 1 : 0;
    ones += static_cast<int>(v);
  }
  CAPTURE(ones);
  const EncodeResult enc = encode_symbols(seq, t);
  CHECK(enc.payload.size() <= 25);
}

TEST_CASE("range coder: empty and single-symbol-alphabet edge cases") {
  {
    const PmfTable t = table_from(0.0, 0.0);
    std::vector<std::vector<int64_t>> seq(1);
    const EncodeResult enc = encode_symbols(seq, t);
    CHECK(enc.payload.size() <= 5);  // termination bytes only
    const auto dec = decode_symbols(enc.payload.data(), enc.payload.size(), {0}, t);
    CHECK(dec[0].empty());
  }
  {
    // one dominant symbol: long input, nearly no output
    std::vector<uint32_t> freq = {65536 - 3, 1, 1, 1};
    const PmfTable t = manual_table(freq, 0);
    std::vector<std::vector<int64_t>> seq(1);
    seq[0].assign(5000, 0);
    const EncodeResult enc = encode_symbols(seq, t);
    CHECK(enc.payload.size() < 20);
    const auto dec = decode_symbols(enc.payload.data(), enc.payload.size(), {5000}, t);
    CHECK(dec[0] == seq[0]);
  }
}

TEST_CASE("range coder: truncated payload raises an explicit error") {
  const PmfTable t = table_from(0.0, 1.0);
  Rng rng(36);
  std::vector<std::vector<int64_t>> seq(1);
  seq[0].resize(500);
  for (auto& v : seq[0]) v = static_cast<int64_t>(rng.uniform(-30.0, 30.0));
  const EncodeResult enc = encode_symbols(seq, t);
  CHECK_THROWS_WITH_AS(
      decode_symbols(enc.payload.data(), enc.payload.size() / 2, {500}, t),
      doctest::Contains("truncated"), Error);
}

TEST_CASE("range coder: out-of-range symbols clamp and are counted") {
  const PmfTable t = table_from(0.0, 1.0);
  std::vector<std::vector<int64_t>> seq(1);
  seq[0] = {0, 500, -500, 3};
  const EncodeResult enc = encode_symbols(seq, t);
  CHECK(enc.clamped == 2);
  const auto dec = decode_symbols(enc.payload.data(), enc.payload.size(), {4}, t);
  CHECK(dec[0] == std::vector<int64_t>{0, 63, -64, 3});
}

TEST_CASE("encode_image / decode_image round-trip and bpp accounting") {
  ModelConfig cfg;
  cfg.hidden_channels = 8;
  cfg.latent_channels = 4;
  ModelParams p = init_params(cfg, 21);
  Rng rng(37);
  const Tensor x = Tensor::uniform({3, 32, 32}, rng, 0.0, 1.0);

  const EncodedImage enc = encode_image(x, p);
  CHECK(enc.bpp_payload == doctest::Approx(8.0 * static_cast<double>(enc.payload_bytes) /
                                           (32.0 * 32.0)));
  CHECK(enc.bpp_total > enc.bpp_payload);

  const Tensor dec = decode_image(enc.bytes, p);
  CHECK(dec.shape() == std::vector<int64_t>{3, 32, 32});
  for (double v : dec.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  // determinism: encoding twice gives byte-identical streams
  const EncodedImage enc2 = encode_image(x, p);
  CHECK(enc.bytes == enc2.bytes);

  // decode with the wrong model is rejected on the checksum
  ModelParams q = init_params(cfg, 22);
  CHECK_THROWS_WITH_AS(decode_image(enc.bytes, q), doctest::Contains("checksum"), Error);
}

TEST_CASE("bitstream header rejects every single-bit corruption of magic/version/checksum") {
  ModelConfig cfg;
  cfg.hidden_channels = 8;
  cfg.latent_channels = 4;
  ModelParams p = init_params(cfg, 23);
  Rng rng(38);
  const Tensor x = Tensor::uniform({3, 16, 16}, rng, 0.0, 1.0);
  const EncodedImage enc = encode_image(x, p);

  // magic: bytes [0,4); version: [4,6); checksum: [26,34)
  std::vector<size_t> offsets;
  for (size_t i = 0; i < 6; ++i) offsets.push_back(i);
  for (size_t i = 26; i < 34; ++i) offsets.push_back(i);
  for (size_t off : offsets) {
    for (int bit = 0; bit < 8; ++bit) {
      auto bad = enc.bytes;
      bad[off] ^= static_cast<uint8_t>(1u << bit);
      CHECK_THROWS_AS(decode_image(bad, p), Error);
    }
  }
}

TEST_CASE("bitstream: payload bits match the table cross-entropy accounting") {
  ModelConfig cfg;
  cfg.hidden_channels = 8;
  cfg.latent_channels = 4;
  ModelParams p = init_params(cfg, 24);
  Rng rng(39);
  const Tensor x = Tensor::uniform({3, 32, 32}, rng, 0.0, 1.0);
  const EncodedImage enc = encode_image(x, p);

  // recompute the symbols exactly as the encoder does
  Tensor xb = Tensor::from({1, 3, 32, 32},
                           std::vector<double>(x.values().begin(), x.values().end()));
  const Tensor y_hat = quantize_infer(analysis(xb, p, nullptr));
  const PmfTable t = build_pmf_table(p.ent_mu, p.ent_log_scale, PmfTable::kDefaultVMin,
                                     PmfTable::kDefaultVMax);
  std::vector<std::vector<int64_t>> seq(4);
  const int64_t plane = y_hat.dim(2) * y_hat.dim(3);
  for (int64_t c = 0; c < 4; ++c) {
    for (int64_t i = 0; i < plane; ++i) {
      seq[static_cast<size_t>(c)].push_back(
          static_cast<int64_t>(y_hat.values()[static_cast<size_t>(c * plane + i)]));
    }
  }
  const double H = table_cross_entropy_bits(t, seq);
  const double bits = 8.0 * static_cast<double>(enc.payload_bytes);
  CHECK(bits >= H);
  CHECK(bits <= 1.01 * H + 64.0);
}
