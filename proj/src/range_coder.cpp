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

#include "orlc/range_coder.hpp"

#include "orlc/util.hpp"

namespace orlc {

namespace {
constexpr uint32_t kTopValue = 1u << 24;
}

void RangeEncoder::shift_low() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t b = cache_;
    do {
      out_.push_back(static_cast<uint8_t>(b + carry));
      b = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ << 8) & 0xFFFFFFFFull;
}

void RangeEncoder::encode(uint32_t cum_low, uint32_t freq, uint32_t total) {
  const uint32_t r = range_ / total;
  low_ += static_cast<uint64_t>(r) * cum_low;
  range_ = r * freq;
  while (range_ < kTopValue) {
    range_ <<= 8;
    shift_low();
  }
}

std::vector<uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(const uint8_t* data, size_t size) : p_(data), end_(data + size) {
  // The first byte is the encoder's initial zero cache; it falls off the top.
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
  if (p_ == end_) throw Error("range decoder: truncated payload");
  return *p_++;
}

uint32_t RangeDecoder::decode_target(uint32_t total) {
  range_ /= total;
  uint32_t t = code_ / range_;
  if (t >= total) t = total - 1;
  return t;
}

void RangeDecoder::decode_advance(uint32_t cum_low, uint32_t freq, uint32_t /*total*/) {
  code_ -= cum_low * range_;
  range_ *= freq;
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

EncodeResult encode_symbols(const std::vector<std::vector<int64_t>>& per_channel,
                            const PmfTable& table) {
  if (static_cast<int64_t>(per_channel.size()) != table.channels) {
    throw Error("encode_symbols: channel count does not match table");
  }
  EncodeResult res;
  RangeEncoder enc;
  for (int64_t c = 0; c < table.channels; ++c) {
    for (int64_t v : per_channel[static_cast<size_t>(c)]) {
      const int64_t sym = table.clamp_symbol(v);
      if (v < table.v_min || v > table.v_max) ++res.clamped;
      enc.encode(table.cum_at(c, sym), table.freq_at(c, sym), PmfTable::kTotal);
    }
  }
  res.payload = enc.finish();
  return res;
}

std::vector<std::vector<int64_t>> decode_symbols(const uint8_t* payload, size_t size,
                                                 const std::vector<int64_t>& counts,
                                                 const PmfTable& table) {
  if (static_cast<int64_t>(counts.size()) != table.channels) {
    throw Error("decode_symbols: channel count does not match table");
  }
  std::vector<std::vector<int64_t>> out(counts.size());
  int64_t total_syms = 0;
  for (int64_t n : counts) total_syms += n;
  if (total_syms == 0) return out;

  RangeDecoder dec(payload, size);
  for (int64_t c = 0; c < table.channels; ++c) {
    auto& dst = out[static_cast<size_t>(c)];
    dst.reserve(static_cast<size_t>(counts[static_cast<size_t>(c)]));
    for (int64_t i = 0; i < counts[static_cast<size_t>(c)]; ++i) {
      const uint32_t target = dec.decode_target(PmfTable::kTotal);
      const int64_t sym = table.symbol_from_cum(c, target);
      dec.decode_advance(table.cum_at(c, sym), table.freq_at(c, sym), PmfTable::kTotal);
      dst.push_back(sym + table.v_min);
    }
  }
  return out;
}

}  // namespace orlc
