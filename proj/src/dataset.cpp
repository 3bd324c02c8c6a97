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

#include "orlc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "orlc/image_io.hpp"
#include "orlc/util.hpp"

namespace orlc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error("cannot open manifest: " + csv_path.string());
  DatasetManifest m;
  m.root = csv_path.parent_path();
  std::string line;
  if (!std::getline(in, line)) throw Error(csv_path.string() + ": empty manifest");
  {
    auto hdr = split_csv_line(line);
    if (hdr != std::vector<std::string>{"id", "image", "mask", "label"}) {
      throw Error(csv_path.string() + ": manifest header must be id,image,mask,label");
    }
  }
  int max_label = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 4) throw Error(csv_path.string() + ": malformed row: " + line);
    ManifestRow row;
    row.id = f[0];
    row.image = f[1];
    row.mask = f[2];
    row.label = std::stoi(f[3]);
    if (row.label < 0) throw Error(csv_path.string() + ": negative label in row " + row.id);
    max_label = std::max(max_label, row.label);
    m.rows.push_back(std::move(row));
  }
  for (const auto& row : m.rows) {
    if (!std::filesystem::exists(m.root / row.image)) {
      throw Error("manifest references missing file: " + (m.root / row.image).string());
    }
    if (!std::filesystem::exists(m.root / row.mask)) {
      throw Error("manifest references missing file: " + (m.root / row.mask).string());
    }
  }
  {
    std::vector<std::string> ids;
    for (const auto& r : m.rows) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw Error(csv_path.string() + ": duplicate sample ids");
    }
  }
  m.num_classes = max_label + 1;
  return m;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& csv_path) {
  std::string out = "id,image,mask,label\n";
  for (const auto& r : m.rows) {
    out += strfmt("%s,%s,%s,%d\n", r.id.c_str(), r.image.c_str(), r.mask.c_str(), r.label);
  }
  write_file(csv_path, reinterpret_cast<const uint8_t*>(out.data()), out.size());
}

Sample load_sample(const std::filesystem::path& image_path,
                   const std::filesystem::path& mask_path, int label) {
  Sample s;
  s.id = image_path.stem().string();
  s.image = load_ppm(image_path);
  s.mask = load_mask_pgm(mask_path);
  if (s.image.dim(1) != s.mask.dim(1) || s.image.dim(2) != s.mask.dim(2)) {
    throw Error(strfmt("%s: mask extents %s do not match image %s", mask_path.string().c_str(),
                       s.mask.shape_str().c_str(), s.image.shape_str().c_str()));
  }
  if (label < 0) throw Error(image_path.string() + ": negative label");
  s.label = label;
  return s;
}

Sample load_sample(const DatasetManifest& m, size_t index) {
  const ManifestRow& row = m.rows.at(index);
  Sample s = load_sample(m.image_path(index), m.mask_path(index), row.label);
  s.id = row.id;
  return s;
}

namespace {

// Two-octave value noise in [0,1]: random lattice values, bilinear blend.
class NoiseField {
 public:
  NoiseField(Rng& rng, int64_t size, int64_t cell) : cell_(cell), g_(size / cell + 2) {
    values_.resize(static_cast<size_t>(g_ * g_));
    for (double& v : values_) v = rng.uniform();
  }

  double at(int64_t y, int64_t x) const {
    const double fy = static_cast<double>(y) / static_cast<double>(cell_);
    const double fx = static_cast<double>(x) / static_cast<double>(cell_);
    const int64_t y0 = static_cast<int64_t>(fy), x0 = static_cast<int64_t>(fx);
    const double ty = fy - static_cast<double>(y0), tx = fx - static_cast<double>(x0);
    const double v00 = values_[static_cast<size_t>(y0 * g_ + x0)];
    const double v01 = values_[static_cast<size_t>(y0 * g_ + x0 + 1)];
    const double v10 = values_[static_cast<size_t>((y0 + 1) * g_ + x0)];
    const double v11 = values_[static_cast<size_t>((y0 + 1) * g_ + x0 + 1)];
    const double top = v00 + (v01 - v00) * tx;
    const double bot = v10 + (v11 - v10) * tx;
    return top + (bot - top) * ty;
  }

 private:
  int64_t cell_;
  int64_t g_;
  std::vector<double> values_;
};

struct Palette {
  double c0[3], c1[3];
};

Palette random_palette(Rng& rng) {
  Palette p;
  for (int c = 0; c < 3; ++c) p.c0[c] = rng.uniform();
  for (int c = 0; c < 3; ++c) p.c1[c] = rng.uniform();
  return p;
}

double palette_distance(const Palette& a, const Palette& b) {
  double d2 = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double ma = 0.5 * (a.c0[c] + a.c1[c]);
    const double mb = 0.5 * (b.c0[c] + b.c1[c]);
    d2 += (ma - mb) * (ma - mb);
  }
  return std::sqrt(d2);
}

struct ShapeParams {
  int kind = 0;
  double cx = 0, cy = 0;
  double r = 0;
  double rw = 0, rh = 0;      // rectangle half extents
  double vx[3], vy[3];        // triangle vertices
};

bool inside_shape(const ShapeParams& s, double x, double y) {
  switch (s.kind) {
    case 0: {  // disk
      const double dx = x - s.cx, dy = y - s.cy;
      return dx * dx + dy * dy <= s.r * s.r;
    }
    case 1:  // axis-aligned rectangle
      return std::fabs(x - s.cx) <= s.rw && std::fabs(y - s.cy) <= s.rh;
    default: {  // triangle: same-side test against each edge
      double sign = 0.0;
      for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        const double cross = (s.vx[j] - s.vx[i]) * (y - s.vy[i]) -
                             (s.vy[j] - s.vy[i]) * (x - s.vx[i]);
        if (cross != 0.0) {
          if (sign == 0.0) {
            sign = cross > 0 ? 1.0 : -1.0;
          } else if ((cross > 0 ? 1.0 : -1.0) != sign) {
            return false;
          }
        }
      }
      return true;
    }
  }
}

ShapeParams sample_shape(Rng& rng, int kind, int64_t size) {
  ShapeParams s;
  s.kind = kind;
  const double fs = static_cast<double>(size);
  s.cx = rng.uniform(0.25, 0.75) * fs;
  s.cy = rng.uniform(0.25, 0.75) * fs;
  s.r = rng.uniform(0.14, 0.36) * fs;
  s.rw = s.r * rng.uniform(0.7, 1.3);
  s.rh = s.r * rng.uniform(0.7, 1.3);
  const double theta0 = rng.uniform(0.0, 6.283185307179586);
  for (int i = 0; i < 3; ++i) {
    const double th = theta0 + 2.0943951023931953 * i;
    // triangles need a larger circumradius to cover comparable area
    const double rr = s.r * 1.35 * rng.uniform(0.85, 1.15);
    s.vx[i] = s.cx + rr * std::cos(th);
    s.vy[i] = s.cy + rr * std::sin(th);
  }
  return s;
}

}  // namespace

GeneratedDataset gen_synthetic_dataset(const GenConfig& cfg) {
  if (cfg.size <= 0 || (cfg.size % 16) != 0) {
    throw ConfigError("gen_synthetic_dataset: size must be a positive multiple of 16");
  }
  if (cfg.num_classes < 2 || cfg.num_classes > 3) {
    throw ConfigError("gen_synthetic_dataset: num_classes must be 2 or 3 (one shape per class)");
  }
  if (cfg.n_train <= 0 || cfg.n_val <= 0) {
    throw ConfigError("gen_synthetic_dataset: split sizes must be positive");
  }
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir / "images", ec);
  std::filesystem::create_directories(cfg.out_dir / "masks", ec);
  if (!std::filesystem::exists(cfg.out_dir / "images")) {
    throw Error("gen_synthetic_dataset: cannot create output directory " + cfg.out_dir.string());
  }

  GeneratedDataset out;
  const int64_t hw = cfg.size * cfg.size;
  const double min_cov = 0.05, max_cov = 0.40;

  for (int split = 0; split < 2; ++split) {
    const int64_t n = split == 0 ? cfg.n_train : cfg.n_val;
    const char* tag = split == 0 ? "train" : "val";
    DatasetManifest manifest;
    manifest.root = cfg.out_dir;
    manifest.num_classes = cfg.num_classes;

    for (int64_t i = 0; i < n; ++i) {
      Rng rng(mix64(cfg.seed, static_cast<uint64_t>(split) + 1, static_cast<uint64_t>(i)));

      const Palette bg = random_palette(rng);
      Palette fg = random_palette(rng);
      for (int tries = 0; palette_distance(bg, fg) < 0.25 && tries < 100; ++tries) {
        fg = random_palette(rng);
      }
      NoiseField bg8(rng, cfg.size, 8), bg4(rng, cfg.size, 4);
      NoiseField fg8(rng, cfg.size, 8), fg4(rng, cfg.size, 4);

      const int label = static_cast<int>(rng.below(static_cast<uint64_t>(cfg.num_classes)));
      ShapeParams shape;
      std::vector<uint8_t> mask(static_cast<size_t>(hw));
      int64_t covered = 0;
      bool ok = false;
      for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
        shape = sample_shape(rng, label, cfg.size);
        covered = 0;
        for (int64_t y = 0; y < cfg.size; ++y) {
          for (int64_t x = 0; x < cfg.size; ++x) {
            const bool in = inside_shape(shape, static_cast<double>(x) + 0.5,
                                         static_cast<double>(y) + 0.5);
            mask[static_cast<size_t>(y * cfg.size + x)] = in ? 1 : 0;
            covered += in ? 1 : 0;
          }
        }
        const double cov = static_cast<double>(covered) / static_cast<double>(hw);
        ok = cov >= min_cov && cov <= max_cov;
      }
      if (!ok) throw Error("gen_synthetic_dataset: could not satisfy coverage constraint");

      Tensor img = Tensor::zeros({3, cfg.size, cfg.size});
      double* dst = img.values().data();
      for (int64_t y = 0; y < cfg.size; ++y) {
        for (int64_t x = 0; x < cfg.size; ++x) {
          const int64_t px = y * cfg.size + x;
          const bool in = mask[static_cast<size_t>(px)] != 0;
          const NoiseField& n8 = in ? fg8 : bg8;
          const NoiseField& n4 = in ? fg4 : bg4;
          const Palette& pal = in ? fg : bg;
          const double t = 0.65 * n8.at(y, x) + 0.35 * n4.at(y, x);
          for (int c = 0; c < 3; ++c) {
            dst[c * hw + px] = pal.c0[c] + (pal.c1[c] - pal.c0[c]) * t;
          }
        }
      }

      const std::string id = strfmt("%s_%06lld", tag, static_cast<long long>(i));
      const std::string image_rel = "images/" + id + ".ppm";
      const std::string mask_rel = "masks/" + id + ".pgm";
      save_ppm(cfg.out_dir / image_rel, img);

      Tensor mask_img = Tensor::zeros({1, cfg.size, cfg.size});
      for (int64_t p = 0; p < hw; ++p) {
        mask_img.values()[static_cast<size_t>(p)] = mask[static_cast<size_t>(p)] ? 1.0 : 0.0;
      }
      save_pgm(cfg.out_dir / mask_rel, mask_img);

      manifest.rows.push_back({id, image_rel, mask_rel, label});
    }

    const std::filesystem::path csv = cfg.out_dir / (std::string(tag) + ".csv");
    save_manifest(manifest, csv);
    if (split == 0) {
      out.train_manifest = csv;
    } else {
      out.val_manifest = csv;
    }
  }
  return out;
}

std::vector<std::vector<size_t>> make_batches(const DatasetManifest& m, int64_t batch_size,
                                              uint64_t seed, int64_t epoch) {
  if (m.rows.empty()) throw Error("make_batches: empty manifest");
  if (batch_size < 1) throw Error("make_batches: batch_size must be >= 1");
  std::vector<size_t> idx(m.rows.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(mix64(seed, 0x62617463u, static_cast<uint64_t>(epoch)));
  rng.shuffle(idx);
  std::vector<std::vector<size_t>> batches;
  for (size_t start = 0; start < idx.size(); start += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(idx.size(), start + static_cast<size_t>(batch_size));
    batches.emplace_back(idx.begin() + static_cast<int64_t>(start),
                         idx.begin() + static_cast<int64_t>(end));
  }
  return batches;
}

SampleCache::SampleCache(const DatasetManifest& m) {
  if (m.rows.empty()) throw Error("SampleCache: empty manifest");
  images_.reserve(m.size());
  masks_.reserve(m.size());
  labels_.reserve(m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    Sample s = load_sample(m, i);
    if (i == 0) {
      h_ = s.image.dim(1);
      w_ = s.image.dim(2);
    } else if (s.image.dim(1) != h_ || s.image.dim(2) != w_) {
      throw Error("SampleCache: inconsistent image extents in manifest");
    }
    images_.push_back(image_to_u8(s.image));
    std::vector<uint8_t> mk(static_cast<size_t>(h_ * w_));
    for (int64_t p = 0; p < h_ * w_; ++p) {
      mk[static_cast<size_t>(p)] = s.mask.values()[static_cast<size_t>(p)] != 0.0 ? 1 : 0;
    }
    masks_.push_back(std::move(mk));
    labels_.push_back(s.label);
  }
}

Tensor SampleCache::image(size_t i) const { return u8_to_image(images_.at(i), 3, h_, w_); }

Tensor SampleCache::mask(size_t i) const {
  Tensor t = Tensor::zeros({1, h_, w_});
  const auto& src = masks_.at(i);
  for (size_t p = 0; p < src.size(); ++p) t.values()[p] = src[p] ? 1.0 : 0.0;
  return t;
}

Tensor SampleCache::batch_images(const std::vector<size_t>& idx) const {
  const int64_t B = static_cast<int64_t>(idx.size());
  Tensor t = Tensor::zeros({B, 3, h_, w_});
  double* dst = t.values().data();
  const int64_t chw = 3 * h_ * w_;
  for (int64_t b = 0; b < B; ++b) {
    const auto& src = images_.at(idx[static_cast<size_t>(b)]);
    for (int64_t p = 0; p < chw; ++p) {
      dst[b * chw + p] = static_cast<double>(src[static_cast<size_t>(p)]) / 255.0;
    }
  }
  return t;
}

Tensor SampleCache::batch_masks(const std::vector<size_t>& idx) const {
  const int64_t B = static_cast<int64_t>(idx.size());
  Tensor t = Tensor::zeros({B, 1, h_, w_});
  double* dst = t.values().data();
  const int64_t hw = h_ * w_;
  for (int64_t b = 0; b < B; ++b) {
    const auto& src = masks_.at(idx[static_cast<size_t>(b)]);
    for (int64_t p = 0; p < hw; ++p) dst[b * hw + p] = src[static_cast<size_t>(p)] ? 1.0 : 0.0;
  }
  return t;
}

}  // namespace orlc
