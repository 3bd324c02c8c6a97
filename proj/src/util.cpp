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

#include "orlc/util.hpp"

#include <cstdio>

namespace orlc {

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (f == nullptr) throw Error("cannot open file: " + path.string());
  std::fseek(f, 0, SEEK_END);
  const long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<uint8_t> data(static_cast<size_t>(size < 0 ? 0 : size));
  const size_t got = data.empty() ? 0 : std::fread(data.data(), 1, data.size(), f);
  std::fclose(f);
  if (got != data.size()) throw Error("short read: " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, const uint8_t* data, size_t size) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (f == nullptr) throw Error("cannot write file: " + path.string());
  const size_t put = size == 0 ? 0 : std::fwrite(data, 1, size, f);
  std::fclose(f);
  if (put != size) throw Error("short write: " + path.string());
}

}  // namespace orlc
