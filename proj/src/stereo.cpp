#include "dynstereo/stereo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dynstereo/parallel.hpp"

namespace dynstereo {

void StereoConfig::validate() const {
  if (candidates < 2) throw std::invalid_argument("stereo: candidates must be >= 2");
  if (n_splits < 1) throw std::invalid_argument("stereo: n_splits must be >= 1");
  if (n_iters < 0) throw std::invalid_argument("stereo: n_iters must be >= 0");
  if (!(spread > 0.0)) throw std::invalid_argument("stereo: spread must be positive");
  if (!(temperature > 0.0)) throw std::invalid_argument("stereo: temperature must be positive");
  if (!(sigma_min > 0.0) || !(sigma_max >= sigma_min)) {
    throw std::invalid_argument("stereo: need 0 < sigma_min <= sigma_max");
  }
  if (!(d_min > 0.0) || !(d_max > d_min)) throw std::invalid_argument("stereo: need 0 < d_min < d_max");
  if (n_bins < n_splits) throw std::invalid_argument("stereo: n_bins must be >= n_splits");
  if (!(min_spacing >= 0.0)) throw std::invalid_argument("stereo: min_spacing must be >= 0");
}

DepthRange StereoConfig::split_range(int split) const {
  const double w = (d_max - d_min) / n_splits;
  return {d_min + w * split, split + 1 == n_splits ? d_max : d_min + w * (split + 1)};
}

int StereoConfig::split_of(double depth) const {
  const int s = static_cast<int>(std::floor((depth - d_min) / (d_max - d_min) * n_splits));
  return std::clamp(s, 0, n_splits - 1);
}

std::vector<double> StereoConfig::bin_depths() const {
  std::vector<double> bins(static_cast<std::size_t>(n_bins));
  const double w = (d_max - d_min) / n_bins;
  for (int i = 0; i < n_bins; ++i) bins[i] = d_min + (i + 0.5) * w;
  return bins;
}

GaussianDepthField::GaussianDepthField(int height, int width, int n_splits)
    : height_(height), width_(width), n_splits_(n_splits) {
  if (height < 0 || width < 0 || n_splits < 1) throw std::invalid_argument("bad field dims");
  mu_.assign(pixels() * n_splits, 0.0);
  sigma_.assign(pixels() * n_splits, 0.0);
}

DepthDistribution::DepthDistribution(int height, int width, std::vector<double> bin_depths)
    : height_(height), width_(width), bins_(std::move(bin_depths)) {
  if (height < 0 || width < 0 || bins_.empty()) throw std::invalid_argument("bad distribution dims");
  prob_.assign(pixels() * bins_.size(), 0.0);
}

std::vector<double> candidate_depths(double mu, double sigma, const DepthRange& range,
                                     const StereoConfig& cfg) {
  double half = cfg.spread * std::sqrt(std::max(sigma, 0.0));
  half = std::max(0.0, std::min({half, mu - range.lo, range.hi - mu}));
  int n = cfg.candidates;
  if (cfg.min_spacing > 0.0 && 2.0 * half / (n - 1) < cfg.min_spacing) {
    n = static_cast<int>(std::floor(2.0 * half / cfg.min_spacing)) + 1;
  }
  if (n <= 1) return {mu};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[i] = mu + half * (2.0 * i / (n - 1) - 1.0);
  }
  return out;
}

double weighted_depth(std::span<const double> depths, std::span<const double> probs) {
  double mu = 0.0;
  for (std::size_t i = 0; i < depths.size(); ++i) mu += depths[i] * probs[i];
  return mu;
}

double confidence_at(std::span<const double> depths, std::span<const double> probs, double depth) {
  if (depths.empty()) return 0.0;
  if (depth <= depths.front()) return probs.front();
  if (depth >= depths.back()) return probs.back();
  const auto it = std::upper_bound(depths.begin(), depths.end(), depth);
  const std::size_t hi = static_cast<std::size_t>(it - depths.begin());
  const std::size_t lo = hi - 1;
  const double t = (depth - depths[lo]) / (depths[hi] - depths[lo]);
  return (1.0 - t) * probs[lo] + t * probs[hi];
}

double update_sigma(double sigma_old, double p_mu, const StereoConfig& cfg) {
  if (!(p_mu > 0.0)) return cfg.sigma_max;
  return std::clamp(sigma_old / (2.0 * p_mu), cfg.sigma_min, cfg.sigma_max);
}

double gaussian_confidence(double depth, double mu, double sigma) {
  const double z = (depth - mu) / std::sqrt(sigma);
  return std::exp(-0.5 * z * z);
}

GaussianDepthField init_hypothesis(const DepthDistribution& mono, const StereoConfig& cfg) {
  cfg.validate();
  GaussianDepthField field(mono.height(), mono.width(), cfg.n_splits);
  const auto bins = mono.bin_depths();
  for (int s = 0; s < cfg.n_splits; ++s) {
    const DepthRange range = cfg.split_range(s);
    const double sigma0 =
        std::clamp(std::pow(range.width() / 4.0, 2), cfg.sigma_min, cfg.sigma_max);
    for (std::size_t p = 0; p < mono.pixels(); ++p) {
      const auto prob = mono.at(p);
      double mass = 0.0;
      double first = 0.0;
      for (std::size_t b = 0; b < bins.size(); ++b) {
        if (cfg.split_of(bins[b]) != s) continue;
        mass += prob[b];
        first += prob[b] * bins[b];
      }
      const double mu = mass > 0.0 ? first / mass : 0.5 * (range.lo + range.hi);
      field.mu(p, s) = range.clamp(mu);
      field.sigma(p, s) = sigma0;
    }
  }
  return field;
}

CandidateSet sample_candidates(const GaussianDepthField& field, int split, const StereoConfig& cfg) {
  const DepthRange range = cfg.split_range(split);
  CandidateSet cs;
  cs.height = field.height();
  cs.width = field.width();
  cs.max_count = cfg.candidates;
  cs.count.assign(field.pixels(), 0);
  cs.depth.assign(field.pixels() * cfg.candidates, 0.0);
  for (std::size_t p = 0; p < field.pixels(); ++p) {
    const auto d = candidate_depths(field.mu(p, split), field.sigma(p, split), range, cfg);
    cs.count[p] = static_cast<int>(d.size());
    std::copy(d.begin(), d.end(), cs.depth.begin() + static_cast<std::ptrdiff_t>(p * cfg.candidates));
  }
  return cs;
}

std::vector<CandidateSet> sample_candidates(const GaussianDepthField& field,
                                            const StereoConfig& cfg) {
  std::vector<CandidateSet> out;
  out.reserve(static_cast<std::size_t>(field.n_splits()));
  for (int s = 0; s < field.n_splits(); ++s) out.push_back(sample_candidates(field, s, cfg));
  return out;
}

CandidateSet score_candidates(const FrameBundle& ref, const FrameBundle& src,
                              const RigidTransform& ref_to_src, CandidateSet cs,
                              const StereoConfig& cfg, int workers) {
  if (!ref.feature.same_shape(src.feature)) {
    throw std::invalid_argument("score_candidates: reference and source feature shapes differ");
  }
  if (cs.height != ref.feature.height() || cs.width != ref.feature.width()) {
    throw std::invalid_argument("score_candidates: candidate grid does not match the frames");
  }
  const int channels = ref.feature.channels();
  const double scale = 1.0 / (channels * cfg.temperature);
  constexpr double kInvalid = -std::numeric_limits<double>::infinity();
  cs.confidence.assign(cs.depth.size(), 0.0);
  cs.matched.assign(cs.pixels(), 0);

  parallel_for(0, cs.height, workers, [&](int y) {
    std::vector<float> sample(static_cast<std::size_t>(channels));
    std::vector<double> score(static_cast<std::size_t>(cs.max_count));
    for (int x = 0; x < cs.width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * cs.width + x;
      const int n = cs.count[p];
      const double* depth = cs.depth.data() + p * cs.max_count;
      double* conf = cs.confidence.data() + p * cs.max_count;
      const auto f_ref = ref.feature.at(y, x);
      double best = kInvalid;
      for (int i = 0; i < n; ++i) {
        score[i] = kInvalid;
        const PixelDepth w = warp_to_source(ref.k, src.k, ref_to_src, x, y, depth[i]);
        if (!w.valid || !bilinear_sample(src.feature, w.u, w.v, sample)) continue;
        double dot = 0.0;
        for (int c = 0; c < channels; ++c) dot += static_cast<double>(f_ref[c]) * sample[c];
        score[i] = dot * scale;
        best = std::max(best, score[i]);
      }
      if (best == kInvalid) {
        std::fill(conf, conf + n, 1.0 / n);
        continue;
      }
      cs.matched[p] = 1;
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        conf[i] = score[i] == kInvalid ? 0.0 : std::exp(score[i] - best);
        total += conf[i];
      }
      for (int i = 0; i < n; ++i) conf[i] /= total;
    }
  });
  return cs;
}

std::vector<double> update_mu(const CandidateSet& cs, const DepthRange& range) {
  std::vector<double> mu(cs.pixels());
  for (std::size_t p = 0; p < cs.pixels(); ++p) {
    mu[p] = range.clamp(weighted_depth(cs.depths_at(p), cs.confidences_at(p)));
  }
  return mu;
}

namespace {

void iterate_round(const FrameBundle& ref, const FrameBundle& src, const RigidTransform& ref_to_src,
                   GaussianDepthField& field, const StereoConfig& cfg, int workers) {
  for (int s = 0; s < field.n_splits(); ++s) {
    const DepthRange range = cfg.split_range(s);
    const CandidateSet cs =
        score_candidates(ref, src, ref_to_src, sample_candidates(field, s, cfg), cfg, workers);
    const std::vector<double> mu = update_mu(cs, range);
    for (std::size_t p = 0; p < cs.pixels(); ++p) {
      const double p_mu = confidence_at(cs.depths_at(p), cs.confidences_at(p), mu[p]);
      field.mu(p, s) = mu[p];
      field.sigma(p, s) = update_sigma(field.sigma(p, s), p_mu, cfg);
    }
  }
}

void check_inputs(const FrameBundle& ref, const GaussianDepthField& field, const StereoConfig& cfg) {
  cfg.validate();
  if (field.height() != ref.feature.height() || field.width() != ref.feature.width() ||
      field.n_splits() != cfg.n_splits) {
    throw std::invalid_argument("iterate: field shape does not match frames/config");
  }
}

}  // namespace

GaussianDepthField iterate(const FrameBundle& ref, const FrameBundle& src,
                           const RigidTransform& ref_to_src, GaussianDepthField field,
                           const StereoConfig& cfg, int workers) {
  check_inputs(ref, field, cfg);
  for (int it = 0; it < cfg.n_iters; ++it) iterate_round(ref, src, ref_to_src, field, cfg, workers);
  return field;
}

std::vector<GaussianDepthField> iterate_trace(const FrameBundle& ref, const FrameBundle& src,
                                              const RigidTransform& ref_to_src,
                                              GaussianDepthField field, const StereoConfig& cfg,
                                              int workers) {
  check_inputs(ref, field, cfg);
  std::vector<GaussianDepthField> trace;
  trace.reserve(static_cast<std::size_t>(cfg.n_iters) + 1);
  trace.push_back(field);
  for (int it = 0; it < cfg.n_iters; ++it) {
    iterate_round(ref, src, ref_to_src, field, cfg, workers);
    trace.push_back(field);
  }
  return trace;
}

std::vector<double> split_weights(const DepthDistribution& mono, const StereoConfig& cfg) {
  const auto bins = mono.bin_depths();
  std::vector<int> owner(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) owner[b] = cfg.split_of(bins[b]);
  std::vector<double> w(mono.pixels() * cfg.n_splits, 0.0);
  for (std::size_t p = 0; p < mono.pixels(); ++p) {
    const auto prob = mono.at(p);
    for (std::size_t b = 0; b < bins.size(); ++b) w[p * cfg.n_splits + owner[b]] += prob[b];
  }
  return w;
}

std::vector<double> stereo_confidences(const GaussianDepthField& field, std::size_t pixel,
                                       const StereoConfig& cfg) {
  const std::vector<double> bins = cfg.bin_depths();
  std::vector<double> out(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const int s = cfg.split_of(bins[b]);
    out[b] = gaussian_confidence(bins[b], field.mu(pixel, s), field.sigma(pixel, s));
  }
  return out;
}

DepthDistribution render_stereo_depth(const GaussianDepthField& field, const StereoConfig& cfg,
                                      std::span<const double> weights) {
  cfg.validate();
  if (field.n_splits() != cfg.n_splits) throw std::invalid_argument("render: split count mismatch");
  if (!weights.empty() && weights.size() != field.pixels() * cfg.n_splits) {
    throw std::invalid_argument("render: split weight array has the wrong size");
  }
  const std::vector<double> bins = cfg.bin_depths();
  DepthDistribution out(field.height(), field.width(), bins);
  std::vector<int> owner(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) owner[b] = cfg.split_of(bins[b]);
  std::vector<double> split_sum(static_cast<std::size_t>(cfg.n_splits));

  for (std::size_t p = 0; p < field.pixels(); ++p) {
    auto prob = out.at(p);
    std::fill(split_sum.begin(), split_sum.end(), 0.0);
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const int s = owner[b];
      prob[b] = gaussian_confidence(bins[b], field.mu(p, s), field.sigma(p, s));
      split_sum[s] += prob[b];
    }
    if (!weights.empty()) {
      for (std::size_t b = 0; b < bins.size(); ++b) {
        const int s = owner[b];
        prob[b] = split_sum[s] > 0.0 ? prob[b] / split_sum[s] * weights[p * cfg.n_splits + s] : 0.0;
      }
    }
    double total = 0.0;
    for (double v : prob) total += v;
    if (total > 0.0) {
      for (double& v : prob) v /= total;
    } else {
      std::fill(prob.begin(), prob.end(), 1.0 / static_cast<double>(bins.size()));
    }
  }
  return out;
}

DepthMap dominant_mu(const GaussianDepthField& field, std::span<const double> weights) {
  if (weights.size() != field.pixels() * field.n_splits()) {
    throw std::invalid_argument("dominant_mu: split weight array has the wrong size");
  }
  DepthMap mu(field.height(), field.width());
  for (std::size_t p = 0; p < field.pixels(); ++p) {
    int best = 0;
    for (int s = 1; s < field.n_splits(); ++s) {
      if (weights[p * field.n_splits() + s] > weights[p * field.n_splits() + best]) best = s;
    }
    mu[p] = field.mu(p, best);
  }
  return mu;
}

namespace {

constexpr const char* kFieldMagic = "# dynstereo-field v1";

void write_floats(std::ostream& os, std::span<const double> values) {
  for (double v : values) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    unsigned char bytes[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                              static_cast<unsigned char>(bits >> 16),
                              static_cast<unsigned char>(bits >> 24)};
    os.write(reinterpret_cast<const char*>(bytes), 4);
  }
}

void read_floats(std::istream& is, std::vector<double>& out, std::size_t n) {
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("field file truncated");
    const std::uint32_t bits = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    out[i] = std::bit_cast<float>(bits);
  }
}

}  // namespace

void write_field(std::ostream& os, const GaussianDepthField& field) {
  os << kFieldMagic << '\n'
     << field.height() << ' ' << field.width() << ' ' << field.n_splits() << '\n';
  write_floats(os, field.mu_values());
  write_floats(os, field.sigma_values());
}

GaussianDepthField read_field(std::istream& is) {
  std::string magic;
  std::getline(is, magic);
  if (magic != kFieldMagic) throw std::runtime_error("not a dynstereo field file");
  int h = 0, w = 0, s = 0;
  if (!(is >> h >> w >> s) || h < 0 || w < 0 || s < 1) throw std::runtime_error("bad field header");
  is.get();
  GaussianDepthField field(h, w, s);
  std::vector<double> mu, sigma;
  read_floats(is, mu, field.pixels() * s);
  read_floats(is, sigma, field.pixels() * s);
  for (std::size_t p = 0; p < field.pixels(); ++p) {
    for (int k = 0; k < s; ++k) {
      field.mu(p, k) = mu[p * s + k];
      field.sigma(p, k) = sigma[p * s + k];
    }
  }
  return field;
}

}  // namespace dynstereo
