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

#include "orlc/bitstream.hpp"

#include <cmath>
#include <cstring>

#include "orlc/entropy.hpp"
#include "orlc/range_coder.hpp"
#include "orlc/util.hpp"

namespace orlc {

namespace {

constexpr char kMagic[4] = {'O', 'R', 'L', 'B'};

Tensor as_batch1(const Tensor& x) {
  if (x.rank() == 4) {
    if (x.dim(0) != 1) throw Error("encode_image: batch must be 1");
    return x;
  }
  if (x.rank() == 3) {
    return Tensor::from({1, x.dim(0), x.dim(1), x.dim(2)},
                        std::vector<double>(x.values().begin(), x.values().end()));
  }
  throw Error("encode_image: expected 3xHxW image, got " + x.shape_str());
}

}  // namespace

EncodedImage encode_image(const Tensor& x, const ModelParams& params) {
  const Tensor xb = as_batch1(x);
  const int64_t H = xb.dim(2), W = xb.dim(3);

  const Tensor y = analysis(xb, params, nullptr);
  const Tensor y_hat = quantize_infer(y);
  const int64_t M = y_hat.dim(1), lh = y_hat.dim(2), lw = y_hat.dim(3);

  const PmfTable table = build_pmf_table(params.ent_mu, params.ent_log_scale,
                                         PmfTable::kDefaultVMin, PmfTable::kDefaultVMax);

  // Channel-major, row-major within channel; the order is part of the format.
  std::vector<std::vector<int64_t>> symbols(static_cast<size_t>(M));
  const double* v = y_hat.values().data();
  for (int64_t c = 0; c < M; ++c) {
    auto& dst = symbols[static_cast<size_t>(c)];
    dst.resize(static_cast<size_t>(lh * lw));
    for (int64_t i = 0; i < lh * lw; ++i) {
      dst[static_cast<size_t>(i)] = static_cast<int64_t>(v[c * lh * lw + i]);
    }
  }
  EncodeResult coded = encode_symbols(symbols, table);

  EncodedImage out;
  out.clamped = coded.clamped;
  out.payload_bytes = coded.payload.size();

  std::vector<uint8_t>& bytes = out.bytes;
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  put_u16(bytes, 1);
  put_u32(bytes, static_cast<uint32_t>(H));
  put_u32(bytes, static_cast<uint32_t>(W));
  put_u32(bytes, static_cast<uint32_t>(M));
  put_u32(bytes, static_cast<uint32_t>(lh));
  put_u32(bytes, static_cast<uint32_t>(lw));
  put_i16(bytes, static_cast<int16_t>(table.v_min));
  put_i16(bytes, static_cast<int16_t>(table.v_max));
  put_u64(bytes, params_checksum(params));
  put_u64(bytes, coded.payload.size());
  bytes.insert(bytes.end(), coded.payload.begin(), coded.payload.end());

  out.bpp_payload = 8.0 * static_cast<double>(out.payload_bytes) / static_cast<double>(H * W);
  out.bpp_total = 8.0 * static_cast<double>(bytes.size()) / static_cast<double>(H * W);
  return out;
}

BitstreamHeader parse_header(const uint8_t* data, size_t size) {
  ByteReader r(data, size);
  char magic[4];
  r.bytes(reinterpret_cast<uint8_t*>(magic), 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error("bitstream: bad magic");
  BitstreamHeader h;
  h.version = r.u16();
  if (h.version != 1) throw Error("bitstream: unsupported version " + std::to_string(h.version));
  h.image_h = r.u32();
  h.image_w = r.u32();
  h.latent_c = r.u32();
  h.latent_h = r.u32();
  h.latent_w = r.u32();
  h.v_min = r.i16();
  h.v_max = r.i16();
  h.model_checksum = r.u64();
  h.payload_size = r.u64();
  if (r.remaining() < h.payload_size) throw Error("bitstream: truncated payload");
  return h;
}

Tensor decode_image(const uint8_t* data, size_t size, const ModelParams& params) {
  const BitstreamHeader h = parse_header(data, size);
  const uint64_t checksum = params_checksum(params);
  if (h.model_checksum != checksum) {
    throw Error(strfmt("bitstream: model checksum mismatch (stream %016llx, params %016llx)",
                       static_cast<unsigned long long>(h.model_checksum),
                       static_cast<unsigned long long>(checksum)));
  }
  const ModelConfig& c = params.config;
  const int64_t div = c.downscale();
  if (h.latent_c != static_cast<uint32_t>(c.latent_channels) ||
      static_cast<int64_t>(h.image_h) != static_cast<int64_t>(h.latent_h) * div ||
      static_cast<int64_t>(h.image_w) != static_cast<int64_t>(h.latent_w) * div) {
    throw Error("bitstream: geometry inconsistent with model config");
  }
  if (h.v_min != PmfTable::kDefaultVMin || h.v_max != PmfTable::kDefaultVMax) {
    throw Error("bitstream: unsupported symbol range");
  }

  // payload begins right after the fixed header
  const size_t fixed = 4 + 2 + 4 * 5 + 2 * 2 + 8 + 8;
  const uint8_t* payload = data + fixed;

  const PmfTable table =
      build_pmf_table(params.ent_mu, params.ent_log_scale, h.v_min, h.v_max);
  std::vector<int64_t> counts(static_cast<size_t>(h.latent_c),
                              static_cast<int64_t>(h.latent_h) * h.latent_w);
  const auto symbols =
      decode_symbols(payload, static_cast<size_t>(h.payload_size), counts, table);

  Tensor y_hat = Tensor::zeros({1, static_cast<int64_t>(h.latent_c),
                                static_cast<int64_t>(h.latent_h),
                                static_cast<int64_t>(h.latent_w)});
  double* dst = y_hat.values().data();
  const int64_t plane = static_cast<int64_t>(h.latent_h) * h.latent_w;
  for (int64_t ch = 0; ch < static_cast<int64_t>(h.latent_c); ++ch) {
    const auto& src = symbols[static_cast<size_t>(ch)];
    for (int64_t i = 0; i < plane; ++i) {
      dst[ch * plane + i] = static_cast<double>(src[static_cast<size_t>(i)]);
    }
  }

  Tensor xb = synthesis(y_hat, params, nullptr);
  Tensor x = ops::clamp(xb, 0.0, 1.0, nullptr);
  // drop the batch dimension
  return Tensor::from({x.dim(1), x.dim(2), x.dim(3)},
                      std::vector<double>(x.values().begin(), x.values().end()));
}

Tensor decode_image(const std::vector<uint8_t>& bytes, const ModelParams& params) {
  return decode_image(bytes.data(), bytes.size(), params);
}

}  // namespace orlc
