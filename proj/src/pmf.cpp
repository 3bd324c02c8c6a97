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

#include "orlc/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orlc/entropy.hpp"
#include "orlc/mathfn.hpp"
#include "orlc/util.hpp"

namespace orlc {

int64_t PmfTable::symbol_from_cum(int64_t ch, uint32_t f) const {
  const uint32_t* base = cum.data() + ch * (nsym() + 1);
  int64_t lo = 0, hi = nsym() - 1;
  while (lo < hi) {
    const int64_t mid = (lo + hi + 1) / 2;
    if (base[mid] <= f) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

PmfTable build_pmf_table(const Tensor& mu, const Tensor& log_scale, int64_t v_min, int64_t v_max) {
  if (v_min >= v_max) throw Error("build_pmf_table: v_min must be < v_max");
  const int64_t nsym = v_max - v_min + 1;
  if (nsym > static_cast<int64_t>(PmfTable::kTotal)) {
    throw Error(strfmt("build_pmf_table: %lld symbols cannot each hold frequency 1 in a %u total",
                       static_cast<long long>(nsym), PmfTable::kTotal));
  }
  if (mu.numel() != log_scale.numel()) {
    throw Error("build_pmf_table: mu/log_scale size mismatch");
  }
  PmfTable t;
  t.v_min = v_min;
  t.v_max = v_max;
  t.channels = mu.numel();
  t.freq.resize(static_cast<size_t>(t.channels * nsym));
  t.cum.resize(static_cast<size_t>(t.channels * (nsym + 1)));

  std::vector<double> p(static_cast<size_t>(nsym));
  std::vector<uint32_t> f(static_cast<size_t>(nsym));
  std::vector<double> rem(static_cast<size_t>(nsym));
  std::vector<int64_t> order(static_cast<size_t>(nsym));

  for (int64_t c = 0; c < t.channels; ++c) {
    const double m = mu.values()[static_cast<size_t>(c)];
    const double s = math::exp_d(log_scale.values()[static_cast<size_t>(c)]);
    double total_p = 0.0;
    for (int64_t v = v_min; v <= v_max; ++v) {
      p[static_cast<size_t>(v - v_min)] = channel_bin_prob(m, s, static_cast<double>(v));
    }
    // Edge bins absorb the out-of-range tails (the coder clamps symbols).
    p.front() += math::logistic_d((v_min - 0.5 - m) / s);
    p.back() += 1.0 - math::logistic_d((v_max + 0.5 - m) / s);
    for (double q : p) total_p += q;
    if (!(total_p > 0.0) || !std::isfinite(total_p)) {
      // Degenerate model; fall back to uniform.
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(nsym));
      total_p = 1.0;
    }

    // Largest-remainder rounding to the exact total.
    uint64_t sum = 0;
    for (int64_t i = 0; i < nsym; ++i) {
      const double q = p[static_cast<size_t>(i)] / total_p * PmfTable::kTotal;
      const double fl = std::floor(q);
      f[static_cast<size_t>(i)] = static_cast<uint32_t>(fl);
      rem[static_cast<size_t>(i)] = q - fl;
      sum += f[static_cast<size_t>(i)];
    }
    int64_t deficit = static_cast<int64_t>(PmfTable::kTotal) - static_cast<int64_t>(sum);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&rem](int64_t a, int64_t b) {
      if (rem[static_cast<size_t>(a)] != rem[static_cast<size_t>(b)]) {
        return rem[static_cast<size_t>(a)] > rem[static_cast<size_t>(b)];
      }
      return a < b;
    });
    for (int64_t i = 0; i < deficit && i < nsym; ++i) ++f[static_cast<size_t>(order[i])];

    // Raise zero bins to 1; take the units back from the smallest bins > 1 so
    // high-probability symbols keep their proportional share.
    int64_t need = 0;
    for (int64_t i = 0; i < nsym; ++i) {
      if (f[static_cast<size_t>(i)] == 0) {
        f[static_cast<size_t>(i)] = 1;
        ++need;
      }
    }
    while (need > 0) {
      int64_t pick = -1;
      uint32_t best = 0;
      for (int64_t i = nsym - 1; i >= 0; --i) {
        const uint32_t fi = f[static_cast<size_t>(i)];
        if (fi > 1 && (pick < 0 || fi < best)) {
          pick = i;
          best = fi;
        }
      }
      if (pick < 0) throw Error("build_pmf_table: cannot rebalance frequencies");
      --f[static_cast<size_t>(pick)];
      --need;
    }

    uint32_t acc = 0;
    for (int64_t i = 0; i < nsym; ++i) {
      t.freq[static_cast<size_t>(c * nsym + i)] = f[static_cast<size_t>(i)];
      t.cum[static_cast<size_t>(c * (nsym + 1) + i)] = acc;
      acc += f[static_cast<size_t>(i)];
    }
    t.cum[static_cast<size_t>(c * (nsym + 1) + nsym)] = acc;
    if (acc != PmfTable::kTotal) throw Error("build_pmf_table: frequencies do not sum to total");
  }
  return t;
}

}  // namespace orlc
