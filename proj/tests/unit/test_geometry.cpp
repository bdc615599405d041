#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dynstereo/geometry.hpp"
#include "dynstereo/scene.hpp"

namespace dynstereo {
namespace {

CameraIntrinsics cam(double fx, double fy, double cx, double cy, int w = 128, int h = 128) {
  return {fx, fy, cx, cy, w, h};
}

TEST(Unproject, PrincipalRay) {
  const Vec3 p = unproject(cam(1, 1, 0, 0, 4, 4), 0, 0, 5);
  EXPECT_EQ(p, Vec3(0, 0, 5));
}

TEST(Unproject, PrincipalPointMapsToOpticalAxis) {
  const Vec3 p = unproject(cam(100, 100, 50, 50), 50, 50, 2);
  EXPECT_EQ(p, Vec3(0, 0, 2));
}

TEST(Unproject, AnisotropicFocal) {
  // K^-1 (164, 132, 1) = ((164 - 64) / 200, (132 - 32) / 100, 1) = (0.5, 1, 1); times d = 4.
  const Vec3 p = unproject(cam(200, 100, 64, 32, 256, 256), 164, 132, 4);
  EXPECT_NEAR(p.x(), 2.0, 1e-12);
  EXPECT_NEAR(p.y(), 4.0, 1e-12);
  EXPECT_NEAR(p.z(), 4.0, 1e-12);
}

TEST(Unproject, RejectsNonPositiveDepth) {
  EXPECT_THROW(unproject(cam(1, 1, 0, 0, 4, 4), 0, 0, 0.0), std::invalid_argument);
  EXPECT_THROW(unproject(cam(1, 1, 0, 0, 4, 4), 0, 0, -1.0), std::invalid_argument);
}

TEST(Intrinsics, Validation) {
  EXPECT_THROW(cam(0, 1, 0, 0).validate(), std::invalid_argument);
  EXPECT_THROW(cam(1, 1, 128, 0).validate(), std::invalid_argument);
  EXPECT_THROW(cam(1, 1, -1, 0).validate(), std::invalid_argument);
  EXPECT_NO_THROW(cam(1, 1, 0, 127.5).validate());
}

TEST(RigidTransform, RejectsNonRotation) {
  Mat3 r = Mat3::Identity();
  r(0, 0) = -1;  // det = -1
  EXPECT_THROW(RigidTransform(r, Vec3::Zero()), std::invalid_argument);
  r = Mat3::Identity() * 1.001;
  EXPECT_THROW(RigidTransform(r, Vec3::Zero()), std::invalid_argument);
}

TEST(RigidTransform, InverseAndCompose) {
  const RigidTransform t = RigidTransform::from_rotation_vector({0.1, -0.2, 0.3}, {1, 2, 3});
  const RigidTransform id = t * t.inverse();
  EXPECT_LT((id.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(id.translation().norm(), 1e-12);
  const Vec3 p(0.3, -4, 7);
  EXPECT_LT((t.inverse().apply(t.apply(p)) - p).norm(), 1e-12);
}

TEST(Warp, IdentityIsExact) {
  const CameraIntrinsics k = cam(100, 100, 64, 64);
  const PixelDepth r = warp_to_source(k, k, RigidTransform::identity(), 17.25, 90.5, 7.0);
  ASSERT_TRUE(r.valid);
  EXPECT_NEAR(r.u, 17.25, 1e-12);
  EXPECT_NEAR(r.v, 90.5, 1e-12);
  EXPECT_NEAR(r.z, 7.0, 1e-12);
}

TEST(Warp, IdentityKeepsBorderPixelsValid) {
  const CameraIntrinsics k = default_intrinsics();
  for (int x : {0, k.width - 1}) {
    for (int y : {0, k.height - 1}) {
      for (double d : {2.0, 13.7, 58.0}) {
        EXPECT_TRUE(warp_to_source(k, k, RigidTransform::identity(), x, y, d).valid);
      }
    }
  }
}

TEST(Warp, MotionAlongOpticalAxis) {
  const CameraIntrinsics k = cam(100, 100, 64, 64);
  const PixelDepth r =
      warp_to_source(k, k, RigidTransform::from_translation({0, 0, -1}), 64, 64, 5.0);
  ASSERT_TRUE(r.valid);
  EXPECT_NEAR(r.z, 4.0, 1e-12);
  EXPECT_NEAR(r.u, 64.0, 1e-12);
  EXPECT_NEAR(r.v, 64.0, 1e-12);
}

TEST(Warp, LateralTranslationShiftsByDisparity) {
  const CameraIntrinsics k = cam(100, 100, 64, 64);
  const PixelDepth r =
      warp_to_source(k, k, RigidTransform::from_translation({0.5, 0, 0}), 64, 64, 5.0);
  ASSERT_TRUE(r.valid);
  EXPECT_NEAR(r.u - 64.0, 100 * 0.5 / 5, 1e-12);
}

TEST(Warp, BehindCameraAndOutOfImageAreInvalid) {
  const CameraIntrinsics k = cam(100, 100, 64, 64);
  EXPECT_FALSE(warp_to_source(k, k, RigidTransform::from_translation({0, 0, -6}), 64, 64, 5.0).valid);
  EXPECT_FALSE(warp_to_source(k, k, RigidTransform::from_translation({5, 0, 0}), 64, 64, 5.0).valid);
  EXPECT_FALSE(warp_to_source(k, k, RigidTransform::identity(), 64, 64, 0.0).valid);
}

TEST(Warp, DistinctIntrinsics) {
  const CameraIntrinsics a = cam(100, 100, 64, 64);
  const CameraIntrinsics b = cam(200, 150, 60, 70, 256, 256);
  const PixelDepth r = warp_to_source(a, b, RigidTransform::identity(), 74, 44, 3.0);
  ASSERT_TRUE(r.valid);
  EXPECT_NEAR(r.u, 200 * 0.1 + 60, 1e-12);
  EXPECT_NEAR(r.v, 150 * -0.2 + 70, 1e-12);
}

TEST(Warp, RoundTripProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const CameraIntrinsics k = default_intrinsics();
  int checked = 0;
  for (int i = 0; i < 20000; ++i) {
    const RigidTransform m = RigidTransform::from_rotation_vector(
        {0.2 * (unit(rng) - 0.5), 0.2 * (unit(rng) - 0.5), 0.2 * (unit(rng) - 0.5)},
        {2 * (unit(rng) - 0.5), 2 * (unit(rng) - 0.5), 2 * (unit(rng) - 0.5)});
    const double u = unit(rng) * (k.width - 1);
    const double v = unit(rng) * (k.height - 1);
    const double d = 2 + 56 * unit(rng);
    const PixelDepth fwd = warp_to_source(k, k, m, u, v, d);
    if (!fwd.valid) continue;
    EXPECT_GT(fwd.z, 0.0);
    const PixelDepth back = warp_to_source(k, k, m.inverse(), fwd.u, fwd.v, fwd.z);
    ASSERT_TRUE(back.valid);
    EXPECT_NEAR(back.u, u, 1e-6);
    EXPECT_NEAR(back.v, v, 1e-6);
    EXPECT_NEAR(back.z, d, 1e-6);
    ++checked;
  }
  EXPECT_GT(checked, 5000);
}

TEST(Project, InvertsUnproject) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const CameraIntrinsics k = cam(321.5, 287.25, 100.5, 80.25, 200, 160);
  for (int i = 0; i < 10000; ++i) {
    const double u = -50 + 300 * unit(rng);
    const double v = -50 + 260 * unit(rng);
    const double d = 1e-3 + 100 * unit(rng);
    const PixelDepth p = project(k, unproject(k, u, v, d));
    ASSERT_TRUE(p.valid);
    EXPECT_NEAR(p.u, u, 1e-9);
    EXPECT_NEAR(p.v, v, 1e-9);
    EXPECT_NEAR(p.z, d, 1e-9);
  }
}

TEST(Bilinear, IntegerAndMidpoint) {
  FeatureMap fm(3, 4, 2);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 4; ++x) {
      fm.at(y, x)[0] = static_cast<float>(10 * y + x);
      fm.at(y, x)[1] = static_cast<float>(-x);
    }
  }
  auto f = bilinear_sample(fm, 2, 1);
  ASSERT_TRUE(f);
  EXPECT_EQ((*f)[0], 12.0f);
  EXPECT_EQ((*f)[1], -2.0f);
  f = bilinear_sample(fm, 2.5, 1);
  ASSERT_TRUE(f);
  EXPECT_FLOAT_EQ((*f)[0], (12.0f + 13.0f) / 2);
  f = bilinear_sample(fm, 3, 2);  // far corner
  ASSERT_TRUE(f);
  EXPECT_EQ((*f)[0], 23.0f);
}

TEST(Bilinear, OutOfBounds) {
  FeatureMap fm(5, 5, 1);
  EXPECT_FALSE(bilinear_sample(fm, -0.1, 3));
  EXPECT_FALSE(bilinear_sample(fm, 4.01, 3));
  EXPECT_FALSE(bilinear_sample(fm, 2, 4.5));
  EXPECT_FALSE(bilinear_sample(FeatureMap(), 0, 0));
}

TEST(Bilinear, DepthMap) {
  DepthMap m(2, 2);
  m(0, 0) = 1;
  m(0, 1) = 3;
  m(1, 0) = 5;
  m(1, 1) = 7;
  EXPECT_DOUBLE_EQ(*bilinear_sample(m, 0.5, 0.5), 4.0);
  EXPECT_FALSE(bilinear_sample(m, 1.5, 0));
}

}  // namespace
}  // namespace dynstereo
