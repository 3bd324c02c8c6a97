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

#ifndef ORLC_IMAGE_IO_HPP_
#define ORLC_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "orlc/tensor.hpp"

namespace orlc {

// Binary PPM (P6) / PGM (P5) with maxval 255 only. Pixels map to [0,1] by
// v/255; writing rounds clamp(v,0,1)*255 to nearest.

// 3xHxW in [0,1].
Tensor load_ppm(const std::filesystem::path& path);
void save_ppm(const std::filesystem::path& path, const Tensor& image);

// 1xHxW raw gray values in [0,1].
Tensor load_pgm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const Tensor& gray);

// PGM thresholded at >127 into a strictly binary 1xHxW mask.
Tensor load_mask_pgm(const std::filesystem::path& path);

// Byte-level helpers used by the dataset cache.
std::vector<uint8_t> image_to_u8(const Tensor& image);  // round-trip of save_ppm's quantization
Tensor u8_to_image(const std::vector<uint8_t>& bytes, int64_t channels, int64_t h, int64_t w);

}  // namespace orlc

#endif  // ORLC_IMAGE_IO_HPP_
