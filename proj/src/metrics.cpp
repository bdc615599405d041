#include "dynstereo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dynstereo {

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           const Raster<unsigned char>& mask) {
  if (!pred.same_shape(gt) || !mask.same_shape(gt)) {
    throw std::invalid_argument("depth_metrics: pred, gt and mask shapes differ");
  }
  std::vector<double> log_err;
  double sum_e = 0.0;
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double log10 = 0.0;
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < gt.size(); ++p) {
    if (!mask[p] || !(gt[p] > 0.0)) continue;
    if (!(pred[p] > 0.0)) {
      throw std::domain_error("depth_metrics: non-positive prediction on a masked pixel");
    }
    const double diff = pred[p] - gt[p];
    const double e = std::log(pred[p]) - std::log(gt[p]);
    log_err.push_back(e);
    sum_e += e;
    abs_rel += std::abs(diff) / gt[p];
    sq_rel += diff * diff / gt[p];
    log10 += std::abs(std::log10(pred[p]) - std::log10(gt[p]));
    sq += diff * diff;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("depth_metrics: empty mask");
  const double inv = 1.0 / static_cast<double>(n);
  const double mean_e = sum_e * inv;
  // Two-pass variance: a uniform log offset gives exactly zero.
  double var_e = 0.0;
  for (double e : log_err) var_e += (e - mean_e) * (e - mean_e);
  DepthMetrics m;
  m.silog = 100.0 * std::sqrt(var_e * inv);
  m.abs_rel = abs_rel * inv;
  m.sq_rel = sq_rel * inv;
  m.log10 = log10 * inv;
  m.rmse = std::sqrt(sq * inv);
  m.count = n;
  return m;
}

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt) {
  Raster<unsigned char> mask(gt.height(), gt.width(), 0);
  for (std::size_t p = 0; p < gt.size(); ++p) mask[p] = gt[p] > 0.0;
  return depth_metrics(pred, gt, mask);
}

RecallReport match_and_recall(const std::vector<Box3D>& pred, const std::vector<Box3D>& gt,
                              std::span<const double> thresholds) {
  RecallReport r;
  r.thresholds.assign(thresholds.begin(), thresholds.end());
  if (gt.empty()) {
    r.recall.assign(thresholds.size(), 1.0);
    r.empty_gt = true;
    return r;
  }
  std::vector<int> order(pred.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return pred[a].score > pred[b].score; });

  for (double t : thresholds) {
    std::vector<bool> taken(gt.size(), false);
    std::size_t matched = 0;
    double dist_sum = 0.0;
    for (int i : order) {
      const Box3D& p = pred[i];
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t g = 0; g < gt.size(); ++g) {
        if (taken[g] || gt[g].class_id != p.class_id) continue;
        const double d = std::hypot(p.x - gt[g].x, p.y - gt[g].y);
        if (d < t && d < best_d) {
          best_d = d;
          best = static_cast<int>(g);
        }
      }
      if (best < 0) continue;
      taken[static_cast<std::size_t>(best)] = true;
      ++matched;
      dist_sum += best_d;
    }
    r.recall.push_back(static_cast<double>(matched) / static_cast<double>(gt.size()));
    if (t == 2.0) {
      r.matched_at_2m = matched;
      r.mean_distance = matched ? dist_sum / static_cast<double>(matched) : 0.0;
    }
  }
  return r;
}

}  // namespace dynstereo
