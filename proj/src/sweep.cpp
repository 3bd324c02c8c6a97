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

#include "orlc/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "orlc/bitstream.hpp"
#include "orlc/metrics.hpp"
#include "orlc/util.hpp"

namespace orlc {

std::string lambda_tag(double lambda) { return strfmt("%g", lambda); }

EvalSummary evaluate_checkpoint(const ModelParams& params, const DatasetManifest& val) {
  if (val.rows.empty()) throw Error("evaluate_checkpoint: empty eval split");
  const SampleCache cache(val);
  EvalSummary sum;
  for (size_t i = 0; i < cache.size(); ++i) {
    const Tensor x = cache.image(i);
    const Tensor m = cache.mask(i);
    const EncodedImage enc = encode_image(x, params);
    const Tensor dec = decode_image(enc.bytes, params);
    sum.bpp += enc.bpp_payload;
    sum.clamped += enc.clamped;
    sum.psnr_full += psnr(x, dec).db;
    sum.psnr_object += psnr(x, dec, &m).db;
  }
  const double n = static_cast<double>(cache.size());
  sum.bpp /= n;
  sum.psnr_full /= n;
  sum.psnr_object /= n;
  return sum;
}

std::vector<RDPoint> rd_sweep(const SweepConfig& cfg, const std::vector<Objective>& objectives,
                              const DatasetManifest& train_data, const DatasetManifest& val_data) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);

  // The original-trained proxy is shared by every point.
  std::optional<ProxyModel> proxy_pre;
  std::optional<SampleCache> train_cache;
  std::optional<SampleCache> val_cache;
  std::optional<ImageSet> val_orig;
  if (cfg.with_proxy) {
    train_cache.emplace(train_data);
    val_cache.emplace(val_data);
    ImageSet train_orig(*train_cache);
    val_orig.emplace(*val_cache);
    ProxyConfig pc = cfg.proxy;
    pc.num_classes = std::max(train_data.num_classes, 2);
    proxy_pre = train_proxy(train_orig, pc);
  }

  std::vector<RDPoint> points;
  for (Objective obj : objectives) {
    const std::vector<double>& lambdas =
        obj == Objective::kProposed ? kProposedLambdas : kHumanLambdas;
    for (double lambda : lambdas) {
      const std::string run_name =
          std::string(objective_name(obj)) + "_lam" + lambda_tag(lambda);
      const std::filesystem::path run_dir = cfg.out_dir / run_name;
      const std::filesystem::path ckpt = run_dir / "model_final.orlc";

      ModelParams params;
      if (cfg.reuse_existing && std::filesystem::exists(ckpt)) {
        params = load_checkpoint(ckpt);
      } else {
        TrainConfig tc = cfg.base;
        tc.objective = obj;
        tc.lambda = lambda;
        tc.out_dir = run_dir;
        TrainResult res = train_codec(tc, train_data);
        params = std::move(res.params);
      }

      const EvalSummary ev = evaluate_checkpoint(params, val_data);
      RDPoint p;
      p.objective = objective_name(obj);
      p.lambda = lambda;
      p.bpp = ev.bpp;
      p.psnr_full = ev.psnr_full;
      p.psnr_object = ev.psnr_object;
      p.seed = cfg.base.param_seed;
      p.checkpoint = run_name + "/model_final.orlc";

      if (cfg.with_proxy) {
        const ImageSet val_dec(*val_cache, params);
        p.acc_pre = eval_proxy(*proxy_pre, val_dec);
        const ImageSet train_dec(*train_cache, params);
        ProxyConfig pc = proxy_pre->config;
        const ProxyModel tuned = train_proxy(train_dec, pc, &*proxy_pre);
        p.acc_ft = eval_proxy(tuned, val_dec);
      }
      points.push_back(std::move(p));
    }
  }
  write_rd_csv(points, cfg.out_dir / "rd_points.csv");
  return points;
}

void write_rd_csv(const std::vector<RDPoint>& points, const std::filesystem::path& path) {
  std::string out = "objective,lambda,bpp,psnr_full,psnr_object,acc_pre,acc_ft,seed,checkpoint\n";
  for (const RDPoint& p : points) {
    out += strfmt("%s,%g,%.10g,%.10g,%.10g,%.10g,%.10g,%llu,%s\n", p.objective.c_str(), p.lambda,
                  p.bpp, p.psnr_full, p.psnr_object, p.acc_pre, p.acc_ft,
                  static_cast<unsigned long long>(p.seed), p.checkpoint.c_str());
  }
  write_file(path, reinterpret_cast<const uint8_t*>(out.data()), out.size());
}

std::optional<double> interp_at_bpp(const std::vector<RDPoint>& curve, double bpp,
                                    double RDPoint::*field) {
  if (curve.empty()) return std::nullopt;
  std::vector<RDPoint> sorted = curve;
  std::sort(sorted.begin(), sorted.end(),
            [](const RDPoint& a, const RDPoint& b) { return a.bpp < b.bpp; });
  if (bpp < sorted.front().bpp || bpp > sorted.back().bpp) return std::nullopt;
  for (size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double b0 = sorted[i].bpp, b1 = sorted[i + 1].bpp;
    if (bpp >= b0 && bpp <= b1) {
      if (b1 == b0) return sorted[i].*field;
      const double t = (bpp - b0) / (b1 - b0);
      return sorted[i].*field + t * (sorted[i + 1].*field - sorted[i].*field);
    }
  }
  return sorted.back().*field;
}

std::optional<double> lowest_overlap_bpp(const std::vector<RDPoint>& a,
                                         const std::vector<RDPoint>& b) {
  if (a.empty() || b.empty()) return std::nullopt;
  auto span = [](const std::vector<RDPoint>& v) {
    double lo = v.front().bpp, hi = v.front().bpp;
    for (const RDPoint& p : v) {
      lo = std::min(lo, p.bpp);
      hi = std::max(hi, p.bpp);
    }
    return std::pair<double, double>(lo, hi);
  };
  const auto [alo, ahi] = span(a);
  const auto [blo, bhi] = span(b);
  const double lo = std::max(alo, blo);
  const double hi = std::min(ahi, bhi);
  if (lo > hi) return std::nullopt;
  return lo;
}

}  // namespace orlc
