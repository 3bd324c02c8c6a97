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

#include <cstdlib>
#include <cstring>

#include "orlc/kernels.hpp"
#include "orlc/util.hpp"

namespace orlc::kern {

namespace {

bool cpu_has(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::kAvx2:
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case Backend::kAvx512:
      return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512dq") &&
             __builtin_cpu_supports("avx512vl");
#else
    default:
      return false;
#endif
  }
  return false;
}

Backend pick_default() {
  if (const char* env = std::getenv("ORLC_BACKEND")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has(Backend::kAvx2)) return Backend::kAvx2;
    if (std::strcmp(env, "avx512") == 0 && cpu_has(Backend::kAvx512)) return Backend::kAvx512;
    // Unknown or unsupported request falls through to autodetection.
  }
  if (cpu_has(Backend::kAvx512)) return Backend::kAvx512;
  if (cpu_has(Backend::kAvx2)) return Backend::kAvx2;
  return Backend::kScalar;
}

Backend g_backend = pick_default();

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kAvx512:
      return "avx512";
  }
  return "?";
}

bool backend_available(Backend b) { return cpu_has(b); }

const Kernels& table(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return kScalarKernels;
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::kAvx2:
      return kAvx2Kernels;
    case Backend::kAvx512:
      return kAvx512Kernels;
#else
    default:
      return kScalarKernels;
#endif
  }
  return kScalarKernels;
}

const Kernels& active() { return table(g_backend); }

Backend active_backend() { return g_backend; }

void force_backend(Backend b) {
  if (!cpu_has(b)) {
    throw Error(std::string("kernel backend unavailable on this machine: ") + backend_name(b));
  }
  g_backend = b;
}

}  // namespace orlc::kern
