#include "dynstereo/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace dynstereo {

void MonoModel::validate() const {
  if (!(bias_frac > 0.0)) throw std::invalid_argument("mono: bias_frac must be positive");
  if (!(jitter_frac >= 0.0)) throw std::invalid_argument("mono: jitter_frac must be >= 0");
  if (!(smoothing_bins >= 1.0)) throw std::invalid_argument("mono: smoothing_bins must be >= 1");
}

DepthDistribution mono_depth(const FrameBundle& bundle, const MonoModel& model,
                             std::span<const double> bins) {
  model.validate();
  if (bins.size() < 2) throw std::invalid_argument("mono: need at least two bins");
  const DepthMap& gt = bundle.depth_gt;
  DepthDistribution out(gt.height(), gt.width(), {bins.begin(), bins.end()});
  const double bin_width = bins[1] - bins[0];
  const double std_m = model.smoothing_bins * bin_width;
  const double uniform = 1.0 / static_cast<double>(bins.size());

  std::mt19937_64 rng(model.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t p = 0; p < out.pixels(); ++p) {
    auto prob = out.at(p);
    // One draw per pixel regardless of coverage keeps the noise field stable under edits.
    const double n = normal(rng);
    if (!(gt[p] > 0.0)) {
      std::fill(prob.begin(), prob.end(), uniform);
      continue;
    }
    const double center = std::max(gt[p] * model.bias_frac * (1.0 + model.jitter_frac * n), 1e-3);
    double total = 0.0;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const double z = (bins[b] - center) / std_m;
      prob[b] = std::exp(-0.5 * z * z);
      total += prob[b];
    }
    if (total > 0.0) {
      for (double& v : prob) v /= total;
      continue;
    }
    // Center far outside the grid: all mass on the nearest end bin.
    std::fill(prob.begin(), prob.end(), 0.0);
    prob[center < bins.front() ? 0 : bins.size() - 1] = 1.0;
  }
  return out;
}

WeightMap weight_map(const DepthMap& mono_src, const DepthMap& mu, const RigidTransform& ref_to_src,
                     const CameraIntrinsics& k_ref, const CameraIntrinsics& k_src, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("weight_map: tau must be positive");
  if (mono_src.height() != k_src.height || mono_src.width() != k_src.width ||
      mu.height() != k_ref.height || mu.width() != k_ref.width) {
    throw std::invalid_argument("weight_map: map shapes do not match the cameras");
  }
  WeightMap w(mu.height(), mu.width(), 0.0);
  for (int y = 0; y < mu.height(); ++y) {
    for (int x = 0; x < mu.width(); ++x) {
      const double depth = mu(y, x);
      const PixelDepth warped = warp_to_source(k_ref, k_src, ref_to_src, x, y, depth);
      if (!warped.valid) continue;
      const auto sampled = bilinear_sample(mono_src, warped.u, warped.v);
      if (!sampled) continue;
      w(y, x) = std::exp(-std::abs(*sampled - warped.z) / (tau * depth));
    }
  }
  return w;
}

DepthDistribution fuse(const DepthDistribution& mono, const DepthDistribution& stereo,
                       const WeightMap& w) {
  if (mono.height() != stereo.height() || mono.width() != stereo.width() ||
      w.height() != mono.height() || w.width() != mono.width()) {
    throw std::invalid_argument("fuse: shape mismatch");
  }
  const auto mb = mono.bin_depths();
  const auto sb = stereo.bin_depths();
  if (!std::equal(mb.begin(), mb.end(), sb.begin(), sb.end())) {
    throw std::invalid_argument("fuse: mono and stereo bin grids differ");
  }
  DepthDistribution out(mono.height(), mono.width(), {mb.begin(), mb.end()});
  for (std::size_t p = 0; p < out.pixels(); ++p) {
    const auto pm = mono.at(p);
    const auto ps = stereo.at(p);
    auto pf = out.at(p);
    const double weight = w[p];
    if (weight == 0.0) {
      std::copy(pm.begin(), pm.end(), pf.begin());
      continue;
    }
    double total = 0.0;
    for (std::size_t b = 0; b < pf.size(); ++b) {
      pf[b] = pm[b] + weight * ps[b];
      total += pf[b];
    }
    for (double& v : pf) v /= total;
  }
  return out;
}

DepthMap expected_depth(const DepthDistribution& d) {
  DepthMap out(d.height(), d.width());
  const auto bins = d.bin_depths();
  for (std::size_t p = 0; p < d.pixels(); ++p) {
    const auto prob = d.at(p);
    double e = 0.0;
    for (std::size_t b = 0; b < bins.size(); ++b) e += bins[b] * prob[b];
    out[p] = e;
  }
  return out;
}

}  // namespace dynstereo
