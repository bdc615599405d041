#pragma once

#include <cstdint>
#include <span>

#include "dynstereo/geometry.hpp"
#include "dynstereo/raster.hpp"
#include "dynstereo/scene.hpp"
#include "dynstereo/stereo.hpp"

namespace dynstereo {

/// Deterministic stand-in for a single-frame depth network.
struct MonoModel {
  double bias_frac = 1.0;       // multiplicative depth bias
  double jitter_frac = 0.15;    // std of per-pixel multiplicative noise
  double smoothing_bins = 6.0;  // std of the discretized Gaussian, in bins
  std::uint64_t seed = 0;

  void validate() const;
};

using WeightMap = Raster<double>;

/// Per covered pixel, a discretized Gaussian centered at depth_gt * bias * (1 + jitter * n),
/// n ~ N(0, 1); sky pixels are uniform. `bins` must be evenly spaced.
DepthDistribution mono_depth(const FrameBundle& bundle, const MonoModel& model,
                             std::span<const double> bins);

/// Cross-frame consistency gate. Each reference pixel is warped to the source using `mu`; the
/// source mono expected depth sampled there is compared against the warped point's depth z:
/// w = exp(-|d_src - z| / (tau * mu)). Pixels whose warp or sample is invalid get w = 0.
WeightMap weight_map(const DepthMap& mono_src, const DepthMap& mu, const RigidTransform& ref_to_src,
                     const CameraIntrinsics& k_ref, const CameraIntrinsics& k_src, double tau);

/// P_final proportional to P_mono + w * P_stereo, renormalized per pixel. Throws when bin grids
/// or shapes differ.
DepthDistribution fuse(const DepthDistribution& mono, const DepthDistribution& stereo,
                       const WeightMap& w);

/// Sum over bins of depth * probability.
DepthMap expected_depth(const DepthDistribution& d);

}  // namespace dynstereo
