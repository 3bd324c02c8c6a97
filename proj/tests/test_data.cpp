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

// PPM/PGM parsing and the synthetic dataset generator.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "orlc/dataset.hpp"
#include "orlc/image_io.hpp"
#include "orlc/loss.hpp"
#include "orlc/util.hpp"

using namespace orlc;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Hashes a directory tree's file contents (names sorted).
uint64_t tree_hash(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& f : files) {
    const std::string rel = std::filesystem::relative(f, root).string();
    h = fnv1a64(reinterpret_cast<const uint8_t*>(rel.data()), rel.size(), h);
    const auto data = read_file(f);
    h = fnv1a64(data.data(), data.size(), h);
  }
  return h;
}

}  // namespace

TEST_CASE("ppm/pgm: round-trip and scaling rules") {
  const auto dir = fresh_dir("orlc_test_io");
  Rng rng(1);
  const Tensor img = Tensor::uniform({3, 5, 7}, rng, 0.0, 1.0);
  save_ppm(dir / "a.ppm", img);
  const Tensor back = load_ppm(dir / "a.ppm");
  REQUIRE(back.shape() == img.shape());
  // round-trip through 8 bits: exact on the quantized grid
  const Tensor again = u8_to_image(image_to_u8(img), 3, 5, 7);
  for (int64_t i = 0; i < img.numel(); ++i) {
    CHECK(back.values()[static_cast<size_t>(i)] == again.values()[static_cast<size_t>(i)]);
  }

  // specific byte scaling: 128 -> 128/255
  std::vector<uint8_t> ppm = {'P', '6', '\n', '1', ' ', '1', '\n', '2', '5', '5', '\n',
                              128, 0, 255};
  write_file(dir / "b.ppm", ppm);
  const Tensor px = load_ppm(dir / "b.ppm");
  CHECK(px.values()[0] == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
  CHECK(px.values()[1] == 0.0);
  CHECK(px.values()[2] == 1.0);
}

TEST_CASE("mask threshold boundary: 127 -> 0, 128 -> 1; all-255 -> all ones") {
  const auto dir = fresh_dir("orlc_test_mask");
  std::vector<uint8_t> pgm = {'P', '5', '\n', '2', ' ', '1', '\n', '2', '5', '5', '\n', 127, 128};
  write_file(dir / "m.pgm", pgm);
  const Tensor m = load_mask_pgm(dir / "m.pgm");
  CHECK(m.values()[0] == 0.0);
  CHECK(m.values()[1] == 1.0);

  const Tensor ones = Tensor::full({1, 3, 3}, 1.0);
  save_pgm(dir / "ones.pgm", ones);
  const Tensor back = load_mask_pgm(dir / "ones.pgm");
  for (double v : back.values()) CHECK(v == 1.0);
}

TEST_CASE("pnm parser rejects malformed inputs with the file name") {
  const auto dir = fresh_dir("orlc_test_badpnm");
  write_file(dir / "bad1.ppm", std::vector<uint8_t>{'P', '3', '\n'});
  CHECK_THROWS_WITH_AS(load_ppm(dir / "bad1.ppm"), doctest::Contains("bad1.ppm"), Error);

  std::vector<uint8_t> bad2 = {'P', '6', '\n', '2', ' ', '2', '\n', '6', '5', '5', '3', '5',
                               '\n', 0, 0, 0};
  write_file(dir / "bad2.ppm", bad2);
  CHECK_THROWS_WITH_AS(load_ppm(dir / "bad2.ppm"), doctest::Contains("maxval"), Error);

  std::vector<uint8_t> bad3 = {'P', '6', '\n', '4', ' ', '4', '\n', '2', '5', '5', '\n', 1, 2, 3};
  write_file(dir / "bad3.ppm", bad3);
  CHECK_THROWS_WITH_AS(load_ppm(dir / "bad3.ppm"), doctest::Contains("truncated"), Error);

  // comments are fine
  std::vector<uint8_t> ok = {'P', '5', '\n', '#', ' ', 'x', '\n', '1', ' ', '1', '\n',
                             '2', '5', '5', '\n', 42};
  write_file(dir / "ok.pgm", ok);
  const Tensor okt = load_pgm(dir / "ok.pgm");
  CHECK(okt.values()[0] == doctest::Approx(42.0 / 255.0));
}

TEST_CASE("synthetic dataset: determinism, coverage, classes, loadability") {
  const auto dir1 = fresh_dir("orlc_test_gen1");
  const auto dir2 = fresh_dir("orlc_test_gen2");
  GenConfig cfg;
  cfg.seed = 7;
  cfg.n_train = 40;
  cfg.n_val = 12;
  cfg.size = 32;
  cfg.out_dir = dir1;
  const GeneratedDataset d1 = gen_synthetic_dataset(cfg);
  cfg.out_dir = dir2;
  const GeneratedDataset d2 = gen_synthetic_dataset(cfg);
  CHECK(tree_hash(dir1) == tree_hash(dir2));

  const DatasetManifest train = load_manifest(d1.train_manifest);
  const DatasetManifest val = load_manifest(d1.val_manifest);
  CHECK(train.size() == 40);
  CHECK(val.size() == 12);
  CHECK(train.num_classes == 3);

  for (size_t i = 0; i < train.size(); ++i) {
    const Sample s = load_sample(train, i);
    CHECK(s.image.dim(1) == 32);
    CHECK(s.image.dim(2) == 32);
    validate_binary_mask(s.mask);
    const double cov = mask_coverage(s.mask);
    CHECK(cov >= 0.05);
    CHECK(cov <= 0.40);
    CHECK(s.label >= 0);
    CHECK(s.label < 3);
    for (double v : s.image.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("synthetic dataset: class histogram is near uniform at scale") {
  const auto dir = fresh_dir("orlc_test_gen_hist");
  GenConfig cfg;
  cfg.seed = 7;
  cfg.n_train = 3000;
  cfg.n_val = 1;
  cfg.size = 16;  // irrelevant for the histogram; keep generation fast
  cfg.out_dir = dir;
  const GeneratedDataset d = gen_synthetic_dataset(cfg);
  const DatasetManifest train = load_manifest(d.train_manifest);
  int hist[3] = {0, 0, 0};
  for (const auto& row : train.rows) hist[row.label]++;
  for (int c = 0; c < 3; ++c) {
    CHECK(hist[c] > 1000 - 150);
    CHECK(hist[c] < 1000 + 150);
  }
}

TEST_CASE("make_batches: sizes, determinism, epoch variation") {
  const auto dir = fresh_dir("orlc_test_batches");
  GenConfig cfg;
  cfg.seed = 3;
  cfg.n_train = 10;
  cfg.n_val = 2;
  cfg.size = 16;
  cfg.out_dir = dir;
  const GeneratedDataset d = gen_synthetic_dataset(cfg);
  const DatasetManifest m = load_manifest(d.train_manifest);

  const auto b1 = make_batches(m, 4, 9, 0);
  REQUIRE(b1.size() == 3);
  CHECK(b1[0].size() == 4);
  CHECK(b1[1].size() == 4);
  CHECK(b1[2].size() == 2);

  const auto b2 = make_batches(m, 4, 9, 0);
  CHECK(b1 == b2);
  const auto b3 = make_batches(m, 4, 9, 1);
  CHECK(b1 != b3);

  // every index appears exactly once
  std::set<size_t> seen;
  for (const auto& batch : b1) {
    for (size_t i : batch) seen.insert(i);
  }
  CHECK(seen.size() == 10);

  DatasetManifest empty;
  CHECK_THROWS_AS(make_batches(empty, 4, 9, 0), Error);
  CHECK_THROWS_AS(make_batches(m, 0, 9, 0), Error);
}

TEST_CASE("manifest validation") {
  const auto dir = fresh_dir("orlc_test_manifest");
  std::string csv = "id,image,mask,label\nx0,missing.ppm,missing.pgm,0\n";
  write_file(dir / "bad.csv", reinterpret_cast<const uint8_t*>(csv.data()), csv.size());
  CHECK_THROWS_WITH_AS(load_manifest(dir / "bad.csv"), doctest::Contains("missing"), Error);

  std::string wrong_hdr = "id,img,mask,label\n";
  write_file(dir / "hdr.csv", reinterpret_cast<const uint8_t*>(wrong_hdr.data()),
             wrong_hdr.size());
  CHECK_THROWS_AS(load_manifest(dir / "hdr.csv"), Error);
}

TEST_CASE("sample cache: batches mirror individual samples") {
  const auto dir = fresh_dir("orlc_test_cache");
  GenConfig cfg;
  cfg.seed = 5;
  cfg.n_train = 6;
  cfg.n_val = 2;
  cfg.size = 16;
  cfg.out_dir = dir;
  const GeneratedDataset d = gen_synthetic_dataset(cfg);
  const SampleCache cache(load_manifest(d.train_manifest));
  REQUIRE(cache.size() == 6);
  const Tensor batch = cache.batch_images({2, 4});
  REQUIRE(batch.shape() == std::vector<int64_t>{2, 3, 16, 16});
  const Tensor single = cache.image(4);
  for (int64_t i = 0; i < single.numel(); ++i) {
    CHECK(batch.values()[static_cast<size_t>(single.numel() + i)] ==
          single.values()[static_cast<size_t>(i)]);
  }
  const Tensor masks = cache.batch_masks({0, 1, 2});
  validate_binary_mask(masks);
}
