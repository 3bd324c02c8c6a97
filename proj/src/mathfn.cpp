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

#include "orlc/mathfn.hpp"

#include <cmath>
#include <limits>

namespace orlc::math {

namespace {

constexpr double kInvLn2 = 1.4426950408889634074;   // 1/ln 2
constexpr double kLn2Hi = 6.93147180369123816490e-01;  // high bits of ln 2
constexpr double kLn2Lo = 1.90821492927058770002e-10;  // ln 2 - kLn2Hi
constexpr double kInvLn10 = 4.3429448190325182765e-01;  // 1/ln 10
constexpr double kLog10Of2 = 3.0102999566398119521e-01;

// 1/k! for the exp Taylor polynomial on |r| <= ln2/2.
constexpr double kExpC[14] = {
    1.0,
    1.0,
    1.0 / 2,
    1.0 / 6,
    1.0 / 24,
    1.0 / 120,
    1.0 / 720,
    1.0 / 5040,
    1.0 / 40320,
    1.0 / 362880,
    1.0 / 3628800,
    1.0 / 39916800,
    1.0 / 479001600,
    1.0 / 6227020800.0,
};

// atanh series coefficients 1/(2k+1), k = 1..8.
constexpr double kAtanhC[8] = {
    1.0 / 3, 1.0 / 5, 1.0 / 7, 1.0 / 9, 1.0 / 11, 1.0 / 13, 1.0 / 15, 1.0 / 17,
};

// log(mantissa) for mantissa in [sqrt(1/2), sqrt(2)), plus the binary exponent.
// Split form keeps the combination with e*ln2 exact where it matters.
struct LogParts {
  double log_m;  // log of the reduced mantissa
  double e;      // binary exponent as a double
};

LogParts log_reduce(double x) {
  int e = 0;
  double m = std::frexp(x, &e);  // m in [0.5, 1)
  if (m < 0.70710678118654752440) {
    m *= 2.0;
    e -= 1;
  }
  const double s = (m - 1.0) / (m + 1.0);
  const double z = s * s;
  double t = kAtanhC[7];
  for (int i = 6; i >= 0; --i) t = std::fma(t, z, kAtanhC[i]);
  // log(m) = 2s + 2*s*z*(1/3 + z/5 + ...)
  const double log_m = std::fma(2.0 * s * z, t, 2.0 * s);
  return {log_m, static_cast<double>(e)};
}

}  // namespace

double exp_d(double x) {
  if (std::isnan(x)) return x;
  if (x > 709.782712893384) return std::numeric_limits<double>::infinity();
  if (x < -745.133219101941) return 0.0;
  const double kd = std::nearbyint(x * kInvLn2);
  const int k = static_cast<int>(kd);
  double r = std::fma(-kd, kLn2Hi, x);
  r = std::fma(-kd, kLn2Lo, r);
  double p = kExpC[13];
  for (int i = 12; i >= 0; --i) p = std::fma(p, r, kExpC[i]);
  return std::ldexp(p, k);
}

double log_d(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (std::isinf(x)) return x;
  const LogParts lp = log_reduce(x);
  // e*kLn2Hi is exact: kLn2Hi has 21 trailing zero bits, |e| < 2^11.
  return lp.e * kLn2Hi + std::fma(lp.e, kLn2Lo, lp.log_m);
}

double log2_d(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (std::isinf(x)) return x;
  const LogParts lp = log_reduce(x);
  return std::fma(lp.log_m, kInvLn2, lp.e);
}

double log10_d(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (std::isinf(x)) return x;
  const LogParts lp = log_reduce(x);
  return std::fma(lp.e, kLog10Of2, lp.log_m * kInvLn10);
}

double logistic_d(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + exp_d(-t));
  }
  const double z = exp_d(t);
  return z / (1.0 + z);
}

}  // namespace orlc::math
