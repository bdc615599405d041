#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dynstereo/nms.hpp"

namespace dynstereo {
namespace {

constexpr double kPi = std::numbers::pi;

Box3D box(double x, double y, double dx, double dy, double yaw, double score, int cls = 0) {
  return {x, y, 0.5, dx, dy, 1.0, yaw, 0.0, 0.0, score, cls};
}

NmsConfig cfg_with(double radius, double w = 0.5, bool agnostic = false) {
  NmsConfig c;
  c.circle_radius = radius;
  c.w = w;
  c.class_agnostic = agnostic;
  return c;
}

TEST(CircleNms, SpecExamples) {
  EXPECT_EQ(circle_nms({box(1, 2, 4, 2, 0, 0.5)}, cfg_with(1)), std::vector<int>{0});
  EXPECT_EQ(circle_nms({box(1, 2, 4, 2, 0, 0.9), box(1, 2, 4, 2, 0, 0.8)}, cfg_with(1)),
            std::vector<int>{0});
  EXPECT_EQ(circle_nms({box(0, 0, 4, 2, 0, 0.9), box(2, 0, 4, 2, 0, 0.8)}, cfg_with(1)),
            (std::vector<int>{0, 1}));
}

TEST(CircleNms, SelectionOrderAndClasses) {
  const std::vector<Box3D> boxes = {box(0, 0, 1, 1, 0, 0.3), box(0.1, 0, 1, 1, 0, 0.9, 1),
                                    box(5, 0, 1, 1, 0, 0.6), box(0.2, 0, 1, 1, 0, 0.6)};
  EXPECT_EQ(circle_nms(boxes, cfg_with(1)), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(circle_nms(boxes, cfg_with(1, 0.5, true)), (std::vector<int>{1, 2}));
}

TEST(CircleNms, EqualScoresBreakTiesByIndex) {
  const std::vector<Box3D> boxes = {box(0, 0, 1, 1, 0, 0.5), box(0.1, 0, 1, 1, 0, 0.5)};
  EXPECT_EQ(circle_nms(boxes, cfg_with(1)), std::vector<int>{0});
}

TEST(Thresholds, SpecArithmetic) {
  const Box3D a = box(0, 0, 4, 2, 0, 0.9);
  auto [xt, yt] = size_aware_thresholds(a, a, 1.0);
  EXPECT_DOUBLE_EQ(xt, 4.0);
  EXPECT_DOUBLE_EQ(yt, 8.0);
  const Box3D r = box(0, 0, 4, 2, kPi / 2, 0.9);
  std::tie(xt, yt) = size_aware_thresholds(r, r, 1.0);
  EXPECT_NEAR(xt, 8.0, 1e-12);
  EXPECT_NEAR(yt, 4.0, 1e-12);
  std::tie(xt, yt) = size_aware_thresholds(a, a, 0.5);
  EXPECT_DOUBLE_EQ(xt, 2.0);
  EXPECT_DOUBLE_EQ(yt, 4.0);
}

TEST(Thresholds, FoldedYaw) {
  const Box3D a = box(0, 0, 4, 2, 0.3, 0.9);
  const auto base = size_aware_thresholds(a, a, 1.0);
  for (double yaw : {-0.3, 0.3 + kPi, kPi - 0.3, 0.3 - kPi}) {
    const Box3D b = box(0, 0, 4, 2, yaw, 0.9);
    const auto t = size_aware_thresholds(b, b, 1.0);
    EXPECT_NEAR(t.first, base.first, 1e-12);
    EXPECT_NEAR(t.second, base.second, 1e-12);
  }
}

TEST(Thresholds, SymmetryAndRotationProperty) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int i = 0; i < 5000; ++i) {
    const Box3D a = box(0, 0, 0.3 + 5 * unit(rng), 0.3 + 3 * unit(rng), 8 * (unit(rng) - 0.5), 0.5);
    const Box3D b = box(0, 0, 0.3 + 5 * unit(rng), 0.3 + 3 * unit(rng), 8 * (unit(rng) - 0.5), 0.5);
    const double w = 0.1 + unit(rng);
    const auto ab = size_aware_thresholds(a, b, w);
    const auto ba = size_aware_thresholds(b, a, w);
    ASSERT_EQ(ab.first, ba.first);
    ASSERT_EQ(ab.second, ba.second);
    // Rotating the frame by pi/2 swaps the axes; by pi leaves them unchanged.
    Box3D a90 = a, b90 = b, a180 = a, b180 = b;
    a90.yaw += kPi / 2;
    b90.yaw += kPi / 2;
    a180.yaw += kPi;
    b180.yaw += kPi;
    const auto r90 = size_aware_thresholds(a90, b90, w);
    const auto r180 = size_aware_thresholds(a180, b180, w);
    ASSERT_NEAR(r90.first, ab.second, 1e-9);
    ASSERT_NEAR(r90.second, ab.first, 1e-9);
    ASSERT_NEAR(r180.first, ab.first, 1e-9);
    ASSERT_NEAR(r180.second, ab.second, 1e-9);
  }
}

TEST(SizeAware, SuppressesOnlyWhenBothAxesClose) {
  // x_thre = 0.5 * (2 + 2) = 2, y_thre = 0.5 * (4 + 4) = 4 for two (4 x 2) boxes at yaw 0.
  const Box3D a = box(0, 0, 4, 2, 0, 0.9);
  EXPECT_EQ(size_aware_circle_nms({a, box(1.9, 3.9, 4, 2, 0, 0.8)}, cfg_with(1)).size(), 1u);
  EXPECT_EQ(size_aware_circle_nms({a, box(2.0, 0, 4, 2, 0, 0.8)}, cfg_with(1)).size(), 2u);
  EXPECT_EQ(size_aware_circle_nms({a, box(0, 4.0, 4, 2, 0, 0.8)}, cfg_with(1)).size(), 2u);
  EXPECT_EQ(size_aware_circle_nms({a}, cfg_with(1)), std::vector<int>{0});
}

TEST(RotatedIou, SpecExamples) {
  const Box3D a = box(0, 0, 1, 1, 0, 0.5);
  EXPECT_NEAR(rotated_iou(a, a), 1.0, 1e-12);
  EXPECT_EQ(rotated_iou(a, box(3, 0, 1, 1, 0, 0.5)), 0.0);
  EXPECT_NEAR(rotated_iou(a, box(0.5, 0, 1, 1, 0, 0.5)), 1.0 / 3, 1e-12);
  EXPECT_NEAR(rotated_iou(a, box(0, 0.5, 1, 1, 0, 0.5)), 1.0 / 3, 1e-12);
}

TEST(RotatedIou, KnownRotations) {
  // Square rotated 45 degrees inside a unit square: octagon of area 2(sqrt2 - 1).
  const Box3D a = box(0, 0, 1, 1, 0, 0.5);
  const Box3D b = box(0, 0, 1, 1, kPi / 4, 0.5);
  const double inter = 2 * (std::sqrt(2.0) - 1);
  EXPECT_NEAR(rotated_iou(a, b), inter / (2 - inter), 1e-12);
  // A 4 x 2 box and its 90-degree rotation: cross of area 4.
  EXPECT_NEAR(rotated_iou(box(0, 0, 4, 2, 0, 0.5), box(0, 0, 4, 2, kPi / 2, 0.5)), 4.0 / 12, 1e-12);
  // Pi rotation is the same box.
  EXPECT_NEAR(rotated_iou(box(1, 2, 4, 2, 0.3, 0.5), box(1, 2, 4, 2, 0.3 + kPi, 0.5)), 1.0, 1e-12);
}

TEST(RotatedIou, Footprint) {
  const auto c = box(0, 0, 4, 2, 0, 0.5).corners();
  double xmax = -1e9, ymax = -1e9;
  for (const auto& p : c) {
    xmax = std::max(xmax, p[0]);
    ymax = std::max(ymax, p[1]);
  }
  EXPECT_NEAR(xmax, 1.0, 1e-12);
  EXPECT_NEAR(ymax, 2.0, 1e-12);
  double area = 0;
  for (int i = 0; i < 4; ++i) {
    const auto& p = c[i];
    const auto& q = c[(i + 1) % 4];
    area += p[0] * q[1] - q[0] * p[1];
  }
  EXPECT_NEAR(area / 2, 8.0, 1e-12);  // positive: counter-clockwise
}

TEST(RotatedIou, SymmetricBoundedProperty) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int i = 0; i < 3000; ++i) {
    const Box3D a = box(3 * unit(rng), 3 * unit(rng), 0.2 + 4 * unit(rng), 0.2 + 2 * unit(rng),
                        7 * unit(rng), 0.5);
    const Box3D b = box(3 * unit(rng), 3 * unit(rng), 0.2 + 4 * unit(rng), 0.2 + 2 * unit(rng),
                        7 * unit(rng), 0.5);
    const double ab = rotated_iou(a, b);
    ASSERT_GE(ab, 0.0);
    ASSERT_LE(ab, 1.0 + 1e-12);
    ASSERT_NEAR(ab, rotated_iou(b, a), 1e-12);
  }
}

TEST(Oracle, SpecExamples) {
  const Box3D a = box(0, 0, 4, 2, 0, 0.9);
  Box3D b = a;
  b.score = 0.95;
  EXPECT_EQ(iou_nms_oracle({a, b, a}, 0.2), std::vector<int>{1});
  EXPECT_EQ(iou_nms_oracle({a, box(10, 0, 4, 2, 0, 0.8), box(0, 10, 4, 2, 0, 0.7)}, 0.2),
            (std::vector<int>{0, 1, 2}));
  Box3D other = a;
  other.class_id = 1;
  other.score = 0.5;
  EXPECT_EQ(iou_nms_oracle({a, other}, 0.2).size(), 2u);
  EXPECT_EQ(iou_nms_oracle({a, other}, 0.2, true).size(), 1u);
}

TEST(AllVariants, TopScoringBoxAlwaysKept) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto boxes = random_suite(seed, 40);
    const int top = static_cast<int>(
        std::max_element(boxes.begin(), boxes.end(),
                         [](const Box3D& l, const Box3D& r) { return l.score < r.score; }) -
        boxes.begin());
    for (bool agnostic : {false, true}) {
      const NmsConfig c = cfg_with(2.0, 0.6, agnostic);
      EXPECT_EQ(circle_nms(boxes, c).front(), top);
      EXPECT_EQ(size_aware_circle_nms(boxes, c).front(), top);
      EXPECT_EQ(iou_nms_oracle(boxes, 0.2, agnostic).front(), top);
    }
  }
}

TEST(Fixtures, SameOffsetDefeatsCircle) {
  const auto boxes = same_offset_fixture();
  EXPECT_GT(rotated_iou(boxes[0], boxes[1]), 0.2);
  EXPECT_EQ(rotated_iou(boxes[2], boxes[3]), 0.0);
  const auto oracle = iou_nms_oracle(boxes, 0.2);
  for (double r : {0.25, 0.5, 1.0, 1.5, 1.6, 2.0, 4.0}) {
    EXPECT_LT(jaccard(circle_nms(boxes, cfg_with(r)), oracle), 1.0) << r;
  }
  EXPECT_DOUBLE_EQ(jaccard(size_aware_circle_nms(boxes, cfg_with(1, 0.5)), oracle), 1.0);
}

TEST(Fixtures, ZeroIouDefeatsCircle) {
  const auto boxes = zero_iou_fixture();
  EXPECT_EQ(rotated_iou(boxes[0], boxes[1]), 0.0);
  EXPECT_NEAR(rotated_iou(boxes[0], boxes[2]), 2.6 / 6.6, 1e-12);
  const auto oracle = iou_nms_oracle(boxes, 0.2);
  EXPECT_EQ(oracle, (std::vector<int>{0, 1}));
  for (double r : {0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 4.0}) {
    EXPECT_LT(jaccard(circle_nms(boxes, cfg_with(r)), oracle), 1.0) << r;
  }
  EXPECT_EQ(size_aware_circle_nms(boxes, cfg_with(1, 0.5)), oracle);
}

TEST(Jaccard, Basics) {
  EXPECT_DOUBLE_EQ(jaccard({}, {}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard({1, 2}, {2, 3}), 1.0 / 3);
  EXPECT_DOUBLE_EQ(jaccard({3, 1}, {1, 3}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard({1}, {}), 0.0);
}

TEST(Suite, SeededAndValid) {
  const auto a = random_suite(3);
  const auto b = random_suite(3);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_GT(a.size(), 70u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_NO_THROW(a[i].validate());
  }
  EXPECT_NE(random_suite(4).front().x, a.front().x);
}

TEST(BoxValidate, Rejects) {
  Box3D b = box(0, 0, 1, 1, 0, 0.5);
  b.dx = 0;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  b = box(0, 0, 1, 1, 0, 1.5);
  EXPECT_THROW(b.validate(), std::invalid_argument);
  EXPECT_THROW(cfg_with(0).validate(), std::invalid_argument);
  EXPECT_THROW(cfg_with(1, 0).validate(), std::invalid_argument);
}

TEST(BoxCsv, RoundTripIsExact) {
  const auto boxes = random_suite(11, 20);
  std::stringstream ss;
  write_boxes_csv(ss, boxes);
  const auto back = read_boxes_csv(ss);
  ASSERT_EQ(back.size(), boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    EXPECT_EQ(back[i].x, boxes[i].x);
    EXPECT_EQ(back[i].yaw, boxes[i].yaw);
    EXPECT_EQ(back[i].vy, boxes[i].vy);
    EXPECT_EQ(back[i].score, boxes[i].score);
    EXPECT_EQ(back[i].class_id, boxes[i].class_id);
  }
}

TEST(BoxCsv, Errors) {
  std::stringstream bad_header("x,y\n");
  EXPECT_THROW(read_boxes_csv(bad_header), std::runtime_error);
  std::stringstream short_row("x,y,z,dx,dy,dz,yaw,vx,vy,score,class\n1,2,3\n");
  try {
    read_boxes_csv(short_row);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::stringstream bad_dims("x,y,z,dx,dy,dz,yaw,vx,vy,score,class\n0,0,0,1,1,1,0,0,0,0.5,0\n0,0,0,-1,1,1,0,0,0,0.5,0\n");
  EXPECT_THROW(read_boxes_csv(bad_dims), std::runtime_error);
}

TEST(SpeedFilter, SplitsAtThreshold) {
  std::vector<Box3D> boxes(3, box(0, 0, 1, 1, 0, 0.5));
  boxes[1].vx = 0.6;
  boxes[1].vy = 0.8;  // speed exactly 1
  boxes[2].vx = 3;
  EXPECT_EQ(filter_by_speed(boxes, 1.0, true).size(), 1u);
  EXPECT_EQ(filter_by_speed(boxes, 1.0, false).size(), 2u);
}

}  // namespace
}  // namespace dynstereo
