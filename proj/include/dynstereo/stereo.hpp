#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dynstereo/geometry.hpp"
#include "dynstereo/raster.hpp"
#include "dynstereo/scene.hpp"

namespace dynstereo {

struct DepthRange {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double clamp(double d) const { return d < lo ? lo : (d > hi ? hi : d); }
};

/// Hyperparameters of the temporal-stereo iteration. sigma is a variance (m^2).
struct StereoConfig {
  int candidates = 8;
  int n_splits = 3;
  int n_iters = 3;
  double spread = 2.0;  // candidate half-span in units of sqrt(sigma)
  double temperature = 0.1;
  double sigma_min = 0.25;
  double sigma_max = 400.0;
  double d_min = 2.0;
  double d_max = 58.0;
  int n_bins = 112;
  double min_spacing = 0.05;

  void validate() const;
  DepthRange split_range(int split) const;
  /// Split whose half-open sub-range holds `depth`; the last split is closed at d_max.
  int split_of(double depth) const;
  /// Bin centers d_min + (i + 0.5) * (d_max - d_min) / n_bins.
  std::vector<double> bin_depths() const;
};

/// Per-pixel, per-split Gaussian depth hypothesis (mu in meters, sigma in m^2).
class GaussianDepthField {
 public:
  GaussianDepthField() = default;
  GaussianDepthField(int height, int width, int n_splits);

  int height() const { return height_; }
  int width() const { return width_; }
  int n_splits() const { return n_splits_; }
  std::size_t pixels() const { return static_cast<std::size_t>(height_) * width_; }

  double& mu(std::size_t pixel, int split) { return mu_[index(pixel, split)]; }
  double mu(std::size_t pixel, int split) const { return mu_[index(pixel, split)]; }
  double& sigma(std::size_t pixel, int split) { return sigma_[index(pixel, split)]; }
  double sigma(std::size_t pixel, int split) const { return sigma_[index(pixel, split)]; }

  std::span<const double> mu_values() const { return mu_; }
  std::span<const double> sigma_values() const { return sigma_; }

 private:
  std::size_t index(std::size_t pixel, int split) const {
    return pixel * static_cast<std::size_t>(n_splits_) + static_cast<std::size_t>(split);
  }

  int height_ = 0;
  int width_ = 0;
  int n_splits_ = 0;
  std::vector<double> mu_;
  std::vector<double> sigma_;
};

/// Per-pixel candidate depths for one split with their confidences. Each pixel holds
/// `count[p]` <= max_count strictly increasing depths; slots beyond the count are unused.
struct CandidateSet {
  int height = 0;
  int width = 0;
  int max_count = 0;
  std::vector<int> count;
  std::vector<double> depth;
  std::vector<double> confidence;
  std::vector<unsigned char> matched;  // 1 when at least one candidate warped validly

  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  std::span<const double> depths_at(std::size_t p) const {
    return {depth.data() + p * max_count, static_cast<std::size_t>(count[p])};
  }
  std::span<const double> confidences_at(std::size_t p) const {
    return {confidence.data() + p * max_count, static_cast<std::size_t>(count[p])};
  }
};

/// Per-pixel probabilities over a shared bin grid.
class DepthDistribution {
 public:
  DepthDistribution() = default;
  DepthDistribution(int height, int width, std::vector<double> bin_depths);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixels() const { return static_cast<std::size_t>(height_) * width_; }
  int n_bins() const { return static_cast<int>(bins_.size()); }
  std::span<const double> bin_depths() const { return bins_; }

  std::span<double> at(std::size_t pixel) {
    return {prob_.data() + pixel * bins_.size(), bins_.size()};
  }
  std::span<const double> at(std::size_t pixel) const {
    return {prob_.data() + pixel * bins_.size(), bins_.size()};
  }
  std::span<const double> values() const { return prob_; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> bins_;
  std::vector<double> prob_;
};

// ---- Scalar building blocks -------------------------------------------------------------

/// Up to `cfg.candidates` evenly spaced depths over [mu - h, mu + h], h = spread * sqrt(sigma),
/// with h shrunk symmetrically so both ends stay in `range`; the count drops when the spacing
/// would fall below min_spacing. The set is always symmetric about mu.
std::vector<double> candidate_depths(double mu, double sigma, const DepthRange& range,
                                     const StereoConfig& cfg);

/// Weighted sum of candidate depths.
double weighted_depth(std::span<const double> depths, std::span<const double> probs);

/// Piecewise-linear interpolation of candidate confidences at `depth`.
double confidence_at(std::span<const double> depths, std::span<const double> probs, double depth);

/// sigma_old / (2 * p_mu) clamped to [sigma_min, sigma_max]; p_mu <= 0 yields sigma_max.
double update_sigma(double sigma_old, double p_mu, const StereoConfig& cfg);

/// Unnormalized confidence exp(-0.5 * ((depth - mu) / sqrt(sigma))^2).
double gaussian_confidence(double depth, double mu, double sigma);

// ---- Field operations -------------------------------------------------------------------

/// Initial hypothesis from a mono distribution: per split, the in-range expectation of mono
/// (range midpoint when the range holds no mass) and sigma = (width / 4)^2.
GaussianDepthField init_hypothesis(const DepthDistribution& mono, const StereoConfig& cfg);

/// Candidate depths for every pixel of one split.
CandidateSet sample_candidates(const GaussianDepthField& field, int split, const StereoConfig& cfg);
std::vector<CandidateSet> sample_candidates(const GaussianDepthField& field,
                                            const StereoConfig& cfg);

/// Scores candidates by the temperature-scaled mean inner product of the reference feature and
/// the bilinearly sampled, warped source feature. Invalid warps get zero probability; a pixel
/// with no valid warp gets uniform confidences. Throws on shape mismatch.
CandidateSet score_candidates(const FrameBundle& ref, const FrameBundle& src,
                              const RigidTransform& ref_to_src, CandidateSet candidates,
                              const StereoConfig& cfg, int workers = 1);

/// Weighted-sum mu per pixel, clamped to `range`.
std::vector<double> update_mu(const CandidateSet& cs, const DepthRange& range);

/// Runs cfg.n_iters rounds of sample -> score -> update mu -> update sigma on every split.
GaussianDepthField iterate(const FrameBundle& ref, const FrameBundle& src,
                           const RigidTransform& ref_to_src, GaussianDepthField field,
                           const StereoConfig& cfg, int workers = 1);

/// Same as iterate() but returns the field after each round, starting with the input (size
/// n_iters + 1).
std::vector<GaussianDepthField> iterate_trace(const FrameBundle& ref, const FrameBundle& src,
                                              const RigidTransform& ref_to_src,
                                              GaussianDepthField field, const StereoConfig& cfg,
                                              int workers = 1);

/// Mass of `mono` inside each split, per pixel (pixel-major, n_splits stride).
std::vector<double> split_weights(const DepthDistribution& mono, const StereoConfig& cfg);

/// Gaussian confidence per bin from the split that contains the bin.
///
/// Without `weights` every bin takes its split's raw confidence and the pixel is normalized over
/// all bins. With per-pixel split weights (as produced by split_weights()) each split's
/// confidences are first normalized within the split and scaled by the split weight, so that a
/// split with no support cannot contribute mass.
DepthDistribution render_stereo_depth(const GaussianDepthField& field, const StereoConfig& cfg,
                                      std::span<const double> weights = {});

/// Pre-normalization confidences of render_stereo_depth() for one pixel (testing hook).
std::vector<double> stereo_confidences(const GaussianDepthField& field, std::size_t pixel,
                                       const StereoConfig& cfg);

/// Per pixel, mu of the split with the largest weight.
DepthMap dominant_mu(const GaussianDepthField& field, std::span<const double> weights);

/// Writes `# dynstereo-field v1\nH W n_splits\n` followed by little-endian float32 mu then
/// sigma arrays (pixel-major, split stride).
void write_field(std::ostream& os, const GaussianDepthField& field);
GaussianDepthField read_field(std::istream& is);

}  // namespace dynstereo
