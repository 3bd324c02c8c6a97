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

#ifndef ORLC_PMF_HPP_
#define ORLC_PMF_HPP_

#include <cstdint>
#include <vector>

#include "orlc/tensor.hpp"

namespace orlc {

// Quantized per-channel symbol frequencies for the range coder. Symbols are
// integers in [v_min, v_max]; out-of-range latents clamp to the edges, whose
// bins absorb the tail mass. Frequencies sum to exactly kTotal per channel
// and every symbol keeps frequency >= 1 so it stays encodable.
struct PmfTable {
  static constexpr uint32_t kTotal = 1u << 16;
  static constexpr int64_t kDefaultVMin = -64;
  static constexpr int64_t kDefaultVMax = 63;

  int64_t v_min = kDefaultVMin;
  int64_t v_max = kDefaultVMax;
  int64_t channels = 0;
  std::vector<uint32_t> freq;  // channels * nsym
  std::vector<uint32_t> cum;   // channels * (nsym + 1); cum[last] == kTotal

  int64_t nsym() const { return v_max - v_min + 1; }
  uint32_t freq_at(int64_t ch, int64_t sym) const {
    return freq[static_cast<size_t>(ch * nsym() + sym)];
  }
  uint32_t cum_at(int64_t ch, int64_t sym) const {
    return cum[static_cast<size_t>(ch * (nsym() + 1) + sym)];
  }
  // Largest symbol s with cum[s] <= f < cum[s+1].
  int64_t symbol_from_cum(int64_t ch, uint32_t f) const;
  int64_t clamp_symbol(int64_t v) const {
    if (v < v_min) return 0;
    if (v > v_max) return nsym() - 1;
    return v - v_min;
  }
};

// Discretizes the per-channel logistic model. Frequencies are proportional
// to the bin probabilities, rounded by largest remainder to sum to kTotal;
// zero bins are then raised to 1, compensated by decrementing the smallest
// frequencies above 1 (ties to the higher symbol), which leaves the head of
// the distribution untouched.
PmfTable build_pmf_table(const Tensor& mu, const Tensor& log_scale, int64_t v_min, int64_t v_max);

}  // namespace orlc

#endif  // ORLC_PMF_HPP_
