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

#include "orlc/image_io.hpp"

#include <cmath>
#include <cstring>

#include "orlc/util.hpp"

namespace orlc {

namespace {

struct PnmHeader {
  char type = 0;  // '5' or '6'
  int64_t w = 0, h = 0, maxval = 0;
  size_t data_offset = 0;
};

// Parses "P5"/"P6", then width/height/maxval separated by whitespace and
// optional '#' comments, then a single whitespace before the raster.
PnmHeader parse_pnm_header(const std::vector<uint8_t>& data, const std::filesystem::path& path) {
  size_t pos = 0;
  auto fail = [&path](const char* reason) {
    throw Error(path.string() + ": " + reason);
  };
  if (data.size() < 2 || data[0] != 'P' || (data[1] != '5' && data[1] != '6')) {
    fail("not a binary PGM/PPM (expected P5 or P6)");
  }
  PnmHeader h;
  h.type = static_cast<char>(data[1]);
  pos = 2;
  int64_t fields[3];
  for (int f = 0; f < 3; ++f) {
    // skip whitespace and comments
    for (;;) {
      if (pos >= data.size()) fail("truncated header");
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(data[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (!std::isdigit(data[pos])) fail("malformed header: expected a number");
    int64_t v = 0;
    while (pos < data.size() && std::isdigit(data[pos])) {
      v = v * 10 + (data[pos] - '0');
      if (v > 1 << 30) fail("header value out of range");
      ++pos;
    }
    fields[f] = v;
  }
  if (pos >= data.size() || !std::isspace(data[pos])) fail("missing whitespace before raster");
  ++pos;
  h.w = fields[0];
  h.h = fields[1];
  h.maxval = fields[2];
  h.data_offset = pos;
  if (h.w <= 0 || h.h <= 0) fail("non-positive extents");
  if (h.maxval != 255) fail("unsupported maxval (must be 255)");
  return h;
}

uint8_t to_byte(double v) {
  double c = v < 0.0 ? 0.0 : v;
  if (c > 1.0) c = 1.0;
  return static_cast<uint8_t>(std::lround(c * 255.0));
}

}  // namespace

Tensor load_ppm(const std::filesystem::path& path) {
  const std::vector<uint8_t> data = read_file(path);
  const PnmHeader h = parse_pnm_header(data, path);
  if (h.type != '6') throw Error(path.string() + ": expected PPM (P6)");
  const size_t need = static_cast<size_t>(h.w * h.h * 3);
  if (data.size() - h.data_offset < need) throw Error(path.string() + ": truncated raster");
  Tensor img = Tensor::zeros({3, h.h, h.w});
  double* dst = img.values().data();
  const uint8_t* src = data.data() + h.data_offset;
  const int64_t hw = h.h * h.w;
  for (int64_t i = 0; i < hw; ++i) {
    for (int64_t c = 0; c < 3; ++c) {
      dst[c * hw + i] = static_cast<double>(src[i * 3 + c]) / 255.0;
    }
  }
  return img;
}

void save_ppm(const std::filesystem::path& path, const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw Error("save_ppm: expected 3xHxW image, got " + image.shape_str());
  }
  const int64_t h = image.dim(1), w = image.dim(2), hw = h * w;
  std::string header = strfmt("P6\n%lld %lld\n255\n", static_cast<long long>(w),
                              static_cast<long long>(h));
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + static_cast<size_t>(hw * 3));
  const double* src = image.values().data();
  for (int64_t i = 0; i < hw; ++i) {
    for (int64_t c = 0; c < 3; ++c) out.push_back(to_byte(src[c * hw + i]));
  }
  write_file(path, out);
}

Tensor load_pgm(const std::filesystem::path& path) {
  const std::vector<uint8_t> data = read_file(path);
  const PnmHeader h = parse_pnm_header(data, path);
  if (h.type != '5') throw Error(path.string() + ": expected PGM (P5)");
  const size_t need = static_cast<size_t>(h.w * h.h);
  if (data.size() - h.data_offset < need) throw Error(path.string() + ": truncated raster");
  Tensor img = Tensor::zeros({1, h.h, h.w});
  double* dst = img.values().data();
  const uint8_t* src = data.data() + h.data_offset;
  for (int64_t i = 0; i < h.h * h.w; ++i) dst[i] = static_cast<double>(src[i]) / 255.0;
  return img;
}

void save_pgm(const std::filesystem::path& path, const Tensor& gray) {
  if (gray.rank() != 3 || gray.dim(0) != 1) {
    throw Error("save_pgm: expected 1xHxW image, got " + gray.shape_str());
  }
  const int64_t h = gray.dim(1), w = gray.dim(2);
  std::string header = strfmt("P5\n%lld %lld\n255\n", static_cast<long long>(w),
                              static_cast<long long>(h));
  std::vector<uint8_t> out(header.begin(), header.end());
  const double* src = gray.values().data();
  for (int64_t i = 0; i < h * w; ++i) out.push_back(to_byte(src[i]));
  write_file(path, out);
}

Tensor load_mask_pgm(const std::filesystem::path& path) {
  const std::vector<uint8_t> data = read_file(path);
  const PnmHeader h = parse_pnm_header(data, path);
  if (h.type != '5') throw Error(path.string() + ": expected PGM (P5) mask");
  const size_t need = static_cast<size_t>(h.w * h.h);
  if (data.size() - h.data_offset < need) throw Error(path.string() + ": truncated raster");
  Tensor mask = Tensor::zeros({1, h.h, h.w});
  double* dst = mask.values().data();
  const uint8_t* src = data.data() + h.data_offset;
  for (int64_t i = 0; i < h.h * h.w; ++i) dst[i] = src[i] > 127 ? 1.0 : 0.0;
  return mask;
}

std::vector<uint8_t> image_to_u8(const Tensor& image) {
  std::vector<uint8_t> out(image.values().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = to_byte(image.values()[i]);
  return out;
}

Tensor u8_to_image(const std::vector<uint8_t>& bytes, int64_t channels, int64_t h, int64_t w) {
  if (static_cast<int64_t>(bytes.size()) != channels * h * w) {
    throw Error("u8_to_image: byte count mismatch");
  }
  Tensor img = Tensor::zeros({channels, h, w});
  for (size_t i = 0; i < bytes.size(); ++i) {
    img.values()[i] = static_cast<double>(bytes[i]) / 255.0;
  }
  return img;
}

}  // namespace orlc
