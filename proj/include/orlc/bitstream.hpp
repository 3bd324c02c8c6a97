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

#ifndef ORLC_BITSTREAM_HPP_
#define ORLC_BITSTREAM_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "orlc/transforms.hpp"

namespace orlc {

// .orlb container: magic "ORLB", version, image and latent geometry, symbol
// range, model checksum, payload length, payload. All integers little-endian;
// the stream is parseable by length alone.
struct BitstreamHeader {
  uint16_t version = 1;
  uint32_t image_h = 0;
  uint32_t image_w = 0;
  uint32_t latent_c = 0;
  uint32_t latent_h = 0;
  uint32_t latent_w = 0;
  int16_t v_min = 0;
  int16_t v_max = 0;
  uint64_t model_checksum = 0;
  uint64_t payload_size = 0;
};

struct EncodedImage {
  std::vector<uint8_t> bytes;    // full container
  uint64_t payload_bytes = 0;
  uint64_t clamped = 0;          // latents clamped into the symbol range
  double bpp_payload = 0.0;      // 8 * payload / (H*W)
  double bpp_total = 0.0;        // 8 * container size / (H*W)
};

// x is 3xHxW in [0,1] (or Bx3xHxW with B == 1).
EncodedImage encode_image(const Tensor& x, const ModelParams& params);

// Decodes to 3xHxW, clamped to [0,1]. Rejects bad magic/version, model
// checksum mismatches, geometry inconsistent with the model, and truncation.
Tensor decode_image(const uint8_t* data, size_t size, const ModelParams& params);
Tensor decode_image(const std::vector<uint8_t>& bytes, const ModelParams& params);

BitstreamHeader parse_header(const uint8_t* data, size_t size);

}  // namespace orlc

#endif  // ORLC_BITSTREAM_HPP_
