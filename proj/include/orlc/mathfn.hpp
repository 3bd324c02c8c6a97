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

#ifndef ORLC_MATHFN_HPP_
#define ORLC_MATHFN_HPP_

namespace orlc::math {

// Transcendentals with fully pinned-down arithmetic (basic IEEE ops and fma
// only). libm implementations differ between platforms at the last ulp, which
// would leak into probability tables and therefore into encoded bitstreams.
// Everything downstream of the entropy model uses these instead of <cmath>.
// Accuracy is a few ulp, which is far inside every tolerance in the project.
double exp_d(double x);
double log_d(double x);
double log2_d(double x);
double log10_d(double x);

// Logistic CDF 1/(1+e^-t), evaluated tail-stably.
double logistic_d(double t);

}  // namespace orlc::math

#endif  // ORLC_MATHFN_HPP_
