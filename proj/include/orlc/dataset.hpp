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

#ifndef ORLC_DATASET_HPP_
#define ORLC_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "orlc/tensor.hpp"

namespace orlc {

struct Sample {
  std::string id;
  Tensor image;  // 3xHxW in [0,1]
  Tensor mask;   // 1xHxW binary
  int label = 0;
};

struct ManifestRow {
  std::string id;
  std::string image;  // path relative to the manifest's directory
  std::string mask;
  int label = 0;
};

// CSV manifest with header `id,image,mask,label`.
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestRow> rows;
  int num_classes = 0;

  size_t size() const { return rows.size(); }
  std::filesystem::path image_path(size_t i) const { return root / rows[i].image; }
  std::filesystem::path mask_path(size_t i) const { return root / rows[i].mask; }
};

DatasetManifest load_manifest(const std::filesystem::path& csv_path);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& csv_path);

// Loads and validates one (image, mask, label) triple.
Sample load_sample(const std::filesystem::path& image_path,
                   const std::filesystem::path& mask_path, int label);
Sample load_sample(const DatasetManifest& m, size_t index);

struct GenConfig {
  uint64_t seed = 7;
  int64_t n_train = 2000;
  int64_t n_val = 500;
  int64_t size = 64;
  int num_classes = 3;
  std::filesystem::path out_dir;
};

struct GeneratedDataset {
  std::filesystem::path train_manifest;
  std::filesystem::path val_manifest;
};

// Synthetic objects-on-textured-background data: each sample has a two-octave
// value-noise background, one textured shape (0 disk, 1 rectangle,
// 2 triangle) whose exact footprint is the mask, coverage in [5%, 40%].
// Deterministic in seed; writes PPM/PGM files plus train.csv and val.csv.
GeneratedDataset gen_synthetic_dataset(const GenConfig& cfg);

// Deterministic shuffled batches of row indices; the permutation depends on
// (seed, epoch) and the final short batch is kept.
std::vector<std::vector<size_t>> make_batches(const DatasetManifest& m, int64_t batch_size,
                                              uint64_t seed, int64_t epoch);

// All samples of a split held in memory as 8-bit pixels (the on-disk
// representation), materialized to tensors per batch.
class SampleCache {
 public:
  explicit SampleCache(const DatasetManifest& m);

  size_t size() const { return images_.size(); }
  int64_t height() const { return h_; }
  int64_t width() const { return w_; }
  int label(size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }

  Tensor image(size_t i) const;  // 3xHxW
  Tensor mask(size_t i) const;   // 1xHxW

  // Batched tensors: images Bx3xHxW, masks Bx1xHxW.
  Tensor batch_images(const std::vector<size_t>& idx) const;
  Tensor batch_masks(const std::vector<size_t>& idx) const;

 private:
  int64_t h_ = 0, w_ = 0;
  std::vector<std::vector<uint8_t>> images_;
  std::vector<std::vector<uint8_t>> masks_;  // 0/1 per pixel
  std::vector<int> labels_;
};

}  // namespace orlc

#endif  // ORLC_DATASET_HPP_
