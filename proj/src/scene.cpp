#include "dynstereo/scene.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "dynstereo/parallel.hpp"

namespace dynstereo {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

double unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Planar rectangle with orthonormal in-plane axes; features use (a, b) along (e1, e2).
struct Face {
  Vec3 center;
  Vec3 e1;
  Vec3 e2;
  Vec3 normal;
  double half1;
  double half2;
  std::uint64_t signature;
  double texture_scale;
  int surface;
};

bool finite(const Vec3& v) { return v.allFinite(); }

std::vector<Face> build_faces(const SceneSpec& spec, double t) {
  std::vector<Face> faces;
  for (std::size_t i = 0; i < spec.surfaces.size(); ++i) {
    const Surface& s = spec.surfaces[i];
    const Mat3 r = RigidTransform::from_rotation_vector(s.rotation, Vec3::Zero()).rotation();
    const Vec3 center = s.center + s.velocity * t;
    const std::uint64_t base = mix(spec.seed, s.signature);
    if (s.kind == SurfaceKind::kPlane) {
      faces.push_back({center, r.col(0), r.col(1), r.col(2), s.extent.x() / 2, s.extent.y() / 2,
                       mix(base, 0), s.texture_scale, static_cast<int>(i)});
      continue;
    }
    for (int axis = 0; axis < 3; ++axis) {
      const int a1 = (axis + 1) % 3;
      const int a2 = (axis + 2) % 3;
      for (int sign : {-1, 1}) {
        const Vec3 n = sign * r.col(axis);
        const int face_id = 2 * axis + (sign > 0 ? 1 : 0) + 1;
        faces.push_back({center + n * (s.extent[axis] / 2), r.col(a1), r.col(a2), n,
                         s.extent[a1] / 2, s.extent[a2] / 2, mix(base, face_id),
                         s.texture_scale, static_cast<int>(i)});
      }
    }
  }
  return faces;
}

}  // namespace

void SceneSpec::validate() const {
  if (schema_version != kSceneSchemaVersion) {
    throw std::invalid_argument("unsupported scene schema_version " +
                                std::to_string(schema_version));
  }
  if (!(d_min > 0.0)) throw std::invalid_argument("scene d_min must be positive");
  if (!(d_max > d_min)) throw std::invalid_argument("scene d_max must exceed d_min");
  for (const Surface& s : surfaces) {
    if (!finite(s.center) || !finite(s.rotation) || !finite(s.velocity)) {
      throw std::invalid_argument("surface '" + s.name + "' has non-finite pose or velocity");
    }
    const int dims = s.kind == SurfaceKind::kPlane ? 2 : 3;
    for (int d = 0; d < dims; ++d) {
      if (!(s.extent[d] > 0.0)) {
        throw std::invalid_argument("surface '" + s.name + "' has non-positive extent");
      }
    }
    if (!(s.texture_scale > 0.0)) {
      throw std::invalid_argument("surface '" + s.name + "' has non-positive texture_scale");
    }
  }
}

void surface_feature(std::uint64_t face_signature, double texture_scale, double a, double b,
                     float* out) {
  // Three plane waves per channel with wavelengths in [scale, 8 * scale], then scaled to |f|^2 = C so that the inner product with a
  // fixed reference feature peaks at the true correspondence.
  constexpr int kWaves = 3;
  const double amplitude = std::sqrt(2.0 / kWaves);
  double values[kFeatureChannels];
  double norm2 = 0.0;
  for (int c = 0; c < kFeatureChannels; ++c) {
    double value = 0.0;
    for (int k = 0; k < kWaves; ++k) {
      const std::uint64_t key = mix(face_signature, static_cast<std::uint64_t>(c * kWaves + k));
      const double direction = 2.0 * std::numbers::pi * unit_double(splitmix64(key));
      const double wavelength = texture_scale * std::exp2(3.0 * unit_double(splitmix64(key + 1)));
      const double freq = 1.0 / wavelength;
      const double phase = 2.0 * std::numbers::pi * unit_double(splitmix64(key + 2));
      value += amplitude * std::sin(2.0 * std::numbers::pi * freq *
                                        (std::cos(direction) * a + std::sin(direction) * b) +
                                    phase);
    }
    values[c] = value;
    norm2 += value * value;
  }
  const double scale = norm2 > 0.0 ? std::sqrt(kFeatureChannels / norm2) : 0.0;
  for (int c = 0; c < kFeatureChannels; ++c) out[c] = static_cast<float>(values[c] * scale);
}

FrameBundle render(const SceneSpec& spec, const CameraIntrinsics& k, const RigidTransform& pose,
                   double t, int workers) {
  spec.validate();
  k.validate();
  if (!(t >= 0.0)) throw std::invalid_argument("render: time must be non-negative");

  FrameBundle out;
  out.k = k;
  out.pose = pose;
  out.feature = FeatureMap(k.height, k.width, kFeatureChannels);
  out.depth_gt = DepthMap(k.height, k.width, 0.0);
  out.surface_index = Raster<int>(k.height, k.width, -1);

  const std::vector<Face> faces = build_faces(spec, t);
  const Mat3 cam_to_world = pose.rotation().transpose();
  const Vec3 origin = -(cam_to_world * pose.translation());

  parallel_for(0, k.height, workers, [&](int y) {
    for (int x = 0; x < k.width; ++x) {
      // Camera-frame direction with unit z, so the ray parameter is the depth.
      const Vec3 dir = cam_to_world * Vec3((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      double best = std::numeric_limits<double>::infinity();
      const Face* hit_face = nullptr;
      double hit_a = 0.0;
      double hit_b = 0.0;
      for (const Face& f : faces) {
        const double denom = f.normal.dot(dir);
        if (std::abs(denom) < 1e-12) continue;
        const double s = f.normal.dot(f.center - origin) / denom;
        if (!(s >= spec.d_min && s <= spec.d_max) || s >= best) continue;
        const Vec3 rel = origin + s * dir - f.center;
        const double a = f.e1.dot(rel);
        const double b = f.e2.dot(rel);
        if (std::abs(a) > f.half1 || std::abs(b) > f.half2) continue;
        best = s;
        hit_face = &f;
        hit_a = a;
        hit_b = b;
      }
      if (hit_face == nullptr) continue;
      out.depth_gt(y, x) = best;
      out.surface_index(y, x) = hit_face->surface;
      surface_feature(hit_face->signature, hit_face->texture_scale, hit_a, hit_b,
                      out.feature.at(y, x).data());
    }
  });
  return out;
}

FramePair make_pair(const SceneSpec& spec, const CameraIntrinsics& k,
                    const RigidTransform& ref_pose, const RigidTransform& src_pose, double dt,
                    int workers) {
  FramePair pair;
  pair.ref = render(spec, k, ref_pose, 0.0, workers);
  pair.src = render(spec, k, src_pose, dt, workers);
  pair.ref_to_src = src_pose * ref_pose.inverse();
  return pair;
}

CameraIntrinsics default_intrinsics() { return {200.0, 200.0, 128.0, 96.0, 256, 192}; }

SceneSpec canonical_static_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  Surface wall;
  wall.name = "wall";
  wall.center = {0.0, 0.0, 14.0};
  wall.extent = {40.0, 30.0, 0.0};
  wall.signature = 1;
  wall.texture_scale = 0.14;
  Surface left;
  left.name = "left_panel";
  left.center = {-3.0, 1.0, 6.0};
  left.extent = {3.0, 2.5, 0.0};
  left.signature = 2;
  left.texture_scale = 0.06;
  Surface right;
  right.name = "right_panel";
  right.center = {2.5, -1.0, 9.0};
  right.extent = {4.0, 3.0, 0.0};
  right.signature = 3;
  right.texture_scale = 0.09;
  spec.surfaces = {wall, left, right};
  return spec;
}

SceneSpec moving_object_scene(std::uint64_t seed, double speed) {
  SceneSpec spec = canonical_static_scene(seed);
  Surface box;
  box.name = "mover";
  box.kind = SurfaceKind::kBox;
  box.center = {-2.0, -3.5, 12.0};
  box.extent = {2.0, 2.0, 2.0};
  box.velocity = {speed, 0.0, 0.0};
  box.signature = 4;
  box.texture_scale = 0.12;
  spec.surfaces.push_back(box);
  return spec;
}

SceneSpec random_scene(std::uint64_t seed, int n_surfaces) {
  if (n_surfaces < 0) throw std::invalid_argument("random_scene: negative surface count");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SceneSpec spec;
  spec.seed = seed;
  Surface wall;
  wall.name = "wall";
  wall.center = {0.0, 0.0, 45.0};
  wall.extent = {90.0, 70.0, 0.0};
  wall.signature = 1;
  wall.texture_scale = 0.45;
  spec.surfaces.push_back(wall);
  for (int i = 0; i < n_surfaces; ++i) {
    Surface s;
    s.name = "surface_" + std::to_string(i);
    s.kind = unit(rng) < 0.5 ? SurfaceKind::kPlane : SurfaceKind::kBox;
    const double depth = 6.0 + 30.0 * unit(rng);
    s.center = {(unit(rng) - 0.5) * depth, (unit(rng) - 0.5) * 0.7 * depth, depth};
    s.rotation = {0.0, (unit(rng) - 0.5) * 1.2, 0.0};
    s.extent = {1.0 + 4.0 * unit(rng), 1.0 + 3.0 * unit(rng), 1.0 + 3.0 * unit(rng)};
    s.signature = static_cast<std::uint64_t>(i) + 2;
    s.texture_scale = depth / 100.0;
    spec.surfaces.push_back(s);
  }
  return spec;
}

}  // namespace dynstereo
