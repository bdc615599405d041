#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynstereo/geometry.hpp"
#include "dynstereo/raster.hpp"

namespace dynstereo {

inline constexpr int kFeatureChannels = 16;
inline constexpr int kSceneSchemaVersion = 1;

enum class SurfaceKind { kPlane, kBox };

/// A textured rectangle or box in world coordinates (x right, y down, z forward).
struct Surface {
  std::string name;
  SurfaceKind kind = SurfaceKind::kPlane;
  Vec3 center = Vec3::Zero();    // meters, at t = 0
  Vec3 rotation = Vec3::Zero();  // rotation vector, radians
  // Plane: (width along local x, height along local y, unused). Box: edge lengths.
  Vec3 extent = Vec3::Ones();
  Vec3 velocity = Vec3::Zero();  // m/s
  std::uint64_t signature = 0;
  double texture_scale = 1.0;  // shortest texture wavelength, meters
};

struct SceneSpec {
  int schema_version = kSceneSchemaVersion;
  std::vector<Surface> surfaces;
  double d_min = 2.0;
  double d_max = 58.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One rendered view. `surface_index` is -1 on sky pixels.
struct FrameBundle {
  FeatureMap feature;
  DepthMap depth_gt;
  Raster<int> surface_index;
  CameraIntrinsics k;
  RigidTransform pose;  // world -> camera
};

struct FramePair {
  FrameBundle ref;
  FrameBundle src;
  RigidTransform ref_to_src;
};

/// Ray-casts every pixel against the scene at time t. Hits outside [d_min, d_max] are clipped,
/// so depth_gt is either 0 (sky) or inside the range. Output does not depend on `workers`.
FrameBundle render(const SceneSpec& spec, const CameraIntrinsics& k, const RigidTransform& pose,
                   double t, int workers = 1);

/// Reference rendered at t = 0, source at t = dt; ref_to_src = src_pose * ref_pose^-1.
FramePair make_pair(const SceneSpec& spec, const CameraIntrinsics& k,
                    const RigidTransform& ref_pose, const RigidTransform& src_pose, double dt,
                    int workers = 1);

/// Surface feature at surface-local coordinates (a, b) in meters; identical for every viewpoint.
void surface_feature(std::uint64_t face_signature, double texture_scale, double a, double b,
                     float* out);

/// 256 x 192 camera with fx = fy = 200 used by the bundled fixtures.
CameraIntrinsics default_intrinsics();

/// Three fronto-parallel planes (background wall plus two nearer patches).
SceneSpec canonical_static_scene(std::uint64_t seed = 42);
/// Canonical static scene plus one box moving at `speed` m/s along world x.
SceneSpec moving_object_scene(std::uint64_t seed = 42, double speed = 2.0);
/// Random planes and boxes for `gen-scene`.
SceneSpec random_scene(std::uint64_t seed, int n_surfaces);

}  // namespace dynstereo
