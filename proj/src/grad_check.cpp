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

#include "orlc/grad_check.hpp"

#include <cmath>

#include "orlc/util.hpp"

namespace orlc {

FiniteDiffReport finite_diff_check(const std::function<Tensor(const Tensor&, Tape*)>& f,
                                   const Tensor& x, double h, double tol) {
  if (!(h > 0.0)) throw Error("finite_diff_check: step h must be positive");
  FiniteDiffReport report;

  Tensor xg = x.clone();
  xg.set_requires_grad(true);
  Tape tape;
  Tensor loss = f(xg, &tape);
  if (loss.numel() != 1) throw Error("finite_diff_check: f must return a scalar");
  if (!std::isfinite(loss.item())) {
    report.finite = false;
    return report;
  }
  ops::backward(loss, tape);
  std::vector<double> analytic(static_cast<size_t>(x.numel()), 0.0);
  if (xg.has_grad()) {
    auto g = xg.grad();
    analytic.assign(g.begin(), g.end());
  }

  const int64_t n = x.numel();
  for (int64_t i = 0; i < n; ++i) {
    Tensor xp = x.clone();
    Tensor xm = x.clone();
    xp.values()[static_cast<size_t>(i)] += h;
    xm.values()[static_cast<size_t>(i)] -= h;
    const double fp = f(xp, nullptr).item();
    const double fm = f(xm, nullptr).item();
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      report.finite = false;
      report.worst_index = i;
      return report;
    }
    const double numeric = (fp - fm) / (2.0 * h);
    const double a = analytic[static_cast<size_t>(i)];
    double denom = std::fabs(a);
    if (std::fabs(numeric) > denom) denom = std::fabs(numeric);
    if (denom < 1e-8) denom = 1e-8;
    const double rel = std::fabs(a - numeric) / denom;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_index = i;
    }
  }
  report.pass = report.finite && report.max_rel_err < tol;
  return report;
}

}  // namespace orlc
