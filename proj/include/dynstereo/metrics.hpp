#pragma once

#include <array>
#include <span>
#include <vector>

#include "dynstereo/nms.hpp"
#include "dynstereo/raster.hpp"

namespace dynstereo {

struct DepthMetrics {
  double silog = 0.0;
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double log10 = 0.0;
  double rmse = 0.0;
  std::size_t count = 0;
};

/// Standard depth errors over pixels where mask != 0 and gt > 0. Throws when shapes differ, the
/// effective mask is empty, or a masked prediction is not positive.
DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt, const Raster<unsigned char>& mask);
/// Same, with the mask taken as gt > 0.
DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt);

inline constexpr std::array<double, 4> kRecallThresholds{0.5, 1.0, 2.0, 4.0};

struct RecallReport {
  std::vector<double> thresholds;
  std::vector<double> recall;
  double mean_distance = 0.0;  // over matches at the 2 m threshold; 0 when none
  std::size_t matched_at_2m = 0;
  bool empty_gt = false;
};

/// Per threshold, predictions are taken by descending score (ties by index) and matched to the
/// nearest unmatched same-class GT whose BEV center distance is below the threshold.
RecallReport match_and_recall(const std::vector<Box3D>& pred, const std::vector<Box3D>& gt,
                              std::span<const double> thresholds = kRecallThresholds);

}  // namespace dynstereo
