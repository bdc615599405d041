#include "dynstereo/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

namespace dynstereo {

FeatureMap::FeatureMap(int height, int width, int channels)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 0) {
    throw std::invalid_argument("feature map dims must be non-negative");
  }
  values_.assign(static_cast<std::size_t>(height) * width * channels, 0.0f);
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("image size must be positive");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw std::invalid_argument("principal point outside the image");
  }
}

bool RigidTransform::is_rotation(const Mat3& r, double tol) {
  const Mat3 residual = r.transpose() * r - Mat3::Identity();
  return residual.cwiseAbs().maxCoeff() < tol && std::abs(r.determinant() - 1.0) < tol;
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation_)) throw std::invalid_argument("rotation is not orthonormal with det +1");
}

RigidTransform RigidTransform::from_rotation_vector(const Vec3& rvec, const Vec3& t) {
  const double angle = rvec.norm();
  if (angle < 1e-15) return from_translation(t);
  return {Eigen::AngleAxisd(angle, rvec / angle).toRotationMatrix(), t};
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation_ = rotation_.transpose();
  inv.translation_ = -(inv.rotation_ * translation_);
  return inv;
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.rotation_ = rotation_ * rhs.rotation_;
  out.translation_ = rotation_ * rhs.translation_ + translation_;
  return out;
}

Vec3 unproject(const CameraIntrinsics& k, double u, double v, double depth) {
  if (!(depth > 0.0)) {
    throw std::invalid_argument("unproject: depth must be positive, got " + std::to_string(depth));
  }
  return {(u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth};
}

PixelDepth project(const CameraIntrinsics& k, const Vec3& p) {
  PixelDepth out;
  out.z = p.z();
  if (!(p.z() > kMinWarpDepth)) return out;
  out.u = k.fx * p.x() / p.z() + k.cx;
  out.v = k.fy * p.y() / p.z() + k.cy;
  out.valid = std::isfinite(out.u) && std::isfinite(out.v);
  return out;
}

namespace {

// Round-off from K^-1 / K products must not push border pixels out of the image.
constexpr double kPixelEps = 1e-9;

double snap_to_border(double c, int last) {
  if (c < 0.0 && c > -kPixelEps) return 0.0;
  if (c > last && c < last + kPixelEps) return last;
  return c;
}

}  // namespace

PixelDepth warp_to_source(const CameraIntrinsics& k_ref, const CameraIntrinsics& k_src,
                          const RigidTransform& ref_to_src, double u, double v, double depth) {
  if (!(depth > 0.0)) return {};
  PixelDepth out = project(k_src, ref_to_src.apply(unproject(k_ref, u, v, depth)));
  if (!out.valid) return out;
  out.u = snap_to_border(out.u, k_src.width - 1);
  out.v = snap_to_border(out.v, k_src.height - 1);
  if (!k_src.contains(out.u, out.v)) out.valid = false;
  return out;
}

namespace {

struct BilinearTaps {
  int x0, x1, y0, y1;
  double ax, ay;
};

std::optional<BilinearTaps> taps(int height, int width, double u, double v) {
  u = snap_to_border(u, width - 1);
  v = snap_to_border(v, height - 1);
  if (!(u >= 0.0 && v >= 0.0 && u <= width - 1 && v <= height - 1)) return std::nullopt;
  BilinearTaps t{};
  t.x0 = std::min(static_cast<int>(u), std::max(width - 2, 0));
  t.y0 = std::min(static_cast<int>(v), std::max(height - 2, 0));
  t.x1 = std::min(t.x0 + 1, width - 1);
  t.y1 = std::min(t.y0 + 1, height - 1);
  t.ax = u - t.x0;
  t.ay = v - t.y0;
  return t;
}

}  // namespace

bool bilinear_sample(const FeatureMap& fm, double u, double v, std::span<float> out) {
  if (fm.empty()) return false;
  const auto t = taps(fm.height(), fm.width(), u, v);
  if (!t) return false;
  const auto f00 = fm.at(t->y0, t->x0);
  const auto f01 = fm.at(t->y0, t->x1);
  const auto f10 = fm.at(t->y1, t->x0);
  const auto f11 = fm.at(t->y1, t->x1);
  const double w00 = (1.0 - t->ax) * (1.0 - t->ay);
  const double w01 = t->ax * (1.0 - t->ay);
  const double w10 = (1.0 - t->ax) * t->ay;
  const double w11 = t->ax * t->ay;
  for (int c = 0; c < fm.channels(); ++c) {
    out[c] = static_cast<float>(w00 * f00[c] + w01 * f01[c] + w10 * f10[c] + w11 * f11[c]);
  }
  return true;
}

std::optional<std::vector<float>> bilinear_sample(const FeatureMap& fm, double u, double v) {
  std::vector<float> out(static_cast<std::size_t>(fm.channels()));
  if (!bilinear_sample(fm, u, v, out)) return std::nullopt;
  return out;
}

std::optional<double> bilinear_sample(const DepthMap& map, double u, double v) {
  if (map.empty()) return std::nullopt;
  const auto t = taps(map.height(), map.width(), u, v);
  if (!t) return std::nullopt;
  return (1.0 - t->ax) * (1.0 - t->ay) * map(t->y0, t->x0) +
         t->ax * (1.0 - t->ay) * map(t->y0, t->x1) +
         (1.0 - t->ax) * t->ay * map(t->y1, t->x0) + t->ax * t->ay * map(t->y1, t->x1);
}

}  // namespace dynstereo
