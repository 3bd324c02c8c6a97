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

#ifndef ORLC_RANGE_CODER_HPP_
#define ORLC_RANGE_CODER_HPP_

#include <cstdint>
#include <vector>

#include "orlc/pmf.hpp"

namespace orlc {

// 32-bit renormalizing range coder, byte-wise output, carry propagation via
// the usual cache/pending-0xFF scheme (64-bit low). Frequencies are 16-bit
// totals, so range/total never underflows against the 2^24 renorm bound.
class RangeEncoder {
 public:
  RangeEncoder() = default;

  void encode(uint32_t cum_low, uint32_t freq, uint32_t total);
  // Flushes the final state; the encoder is spent afterwards.
  std::vector<uint8_t> finish();

 private:
  void shift_low();

  std::vector<uint8_t> out_;
  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
};

class RangeDecoder {
 public:
  // Reads 5 bytes immediately; throws on truncation.
  RangeDecoder(const uint8_t* data, size_t size);

  // Scaled cumulative frequency of the next symbol, in [0, total).
  uint32_t decode_target(uint32_t total);
  // Consumes the symbol previously located via decode_target.
  void decode_advance(uint32_t cum_low, uint32_t freq, uint32_t total);

 private:
  uint8_t next_byte();

  const uint8_t* p_;
  const uint8_t* end_;
  uint32_t code_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
};

struct EncodeResult {
  std::vector<uint8_t> payload;
  uint64_t clamped = 0;  // symbols clamped into table range (diagnostic)
};

// Encodes per-channel symbol sequences (channel-major order). Out-of-range
// values clamp into [v_min, v_max] and are counted, never rejected.
EncodeResult encode_symbols(const std::vector<std::vector<int64_t>>& per_channel,
                            const PmfTable& table);

// Exact inverse given the same table and per-channel counts. Throws on
// truncated payloads.
std::vector<std::vector<int64_t>> decode_symbols(const uint8_t* payload, size_t size,
                                                 const std::vector<int64_t>& counts,
                                                 const PmfTable& table);

}  // namespace orlc

#endif  // ORLC_RANGE_CODER_HPP_
