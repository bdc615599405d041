#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dynstereo/raster.hpp"

namespace dynstereo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Warped points closer than this to the source camera plane are flagged invalid.
inline constexpr double kMinWarpDepth = 1e-6;

/// Pinhole intrinsics without skew.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws std::invalid_argument when focal lengths or the principal point are out of range.
  void validate() const;
  bool contains(double u, double v) const {
    return u >= 0.0 && u < width && v >= 0.0 && v < height;
  }
};

/// Proper rigid motion p' = R p + t.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  /// Throws std::invalid_argument when `rotation` is not a proper rotation (1e-9 tolerance).
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  /// Rotation given as a rotation vector (axis * angle, radians).
  static RigidTransform from_rotation_vector(const Vec3& rvec, const Vec3& t);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;
  /// Composition: (a * b).apply(p) == a.apply(b.apply(p)).
  RigidTransform operator*(const RigidTransform& rhs) const;

  static bool is_rotation(const Mat3& r, double tol = 1e-9);

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// Continuous pixel position with depth along the optical axis.
struct PixelDepth {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
  bool valid = false;
};

/// Back-projects pixel (u, v) at depth d into the camera frame. Throws on d <= 0.
Vec3 unproject(const CameraIntrinsics& k, double u, double v, double depth);

/// Projects a camera-frame point. Valid iff z > kMinWarpDepth; no image-bounds check.
PixelDepth project(const CameraIntrinsics& k, const Vec3& p);

/// Reference pixel at depth d mapped into the source camera via K_src * M * K_ref^-1.
/// Invalid when the point lands behind the source camera or outside the source image.
PixelDepth warp_to_source(const CameraIntrinsics& k_ref, const CameraIntrinsics& k_src,
                          const RigidTransform& ref_to_src, double u, double v, double depth);

/// Bilinear interpolation of the four texels around (u, v). Returns false and leaves `out`
/// untouched when (u, v) lies outside [0, W-1] x [0, H-1]. `out` must hold C values.
bool bilinear_sample(const FeatureMap& fm, double u, double v, std::span<float> out);
std::optional<std::vector<float>> bilinear_sample(const FeatureMap& fm, double u, double v);

/// Scalar variant for depth-like rasters.
std::optional<double> bilinear_sample(const DepthMap& map, double u, double v);

}  // namespace dynstereo
