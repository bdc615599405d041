#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace dynstereo {

/// 3D detection box. BEV footprint: d_x (length) lies along the box's local y axis and d_y
/// (width) along its local x axis, rotated counter-clockwise by yaw. At yaw = 0 the box spans
/// d_y in global x and d_x in global y, matching the axis pairing of the size-aware thresholds.
struct Box3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double dx = 1.0;
  double dy = 1.0;
  double dz = 1.0;
  double yaw = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double score = 0.0;
  int class_id = 0;

  void validate() const;
  /// Footprint corners in counter-clockwise order.
  std::array<std::array<double, 2>, 4> corners() const;
};

struct NmsConfig {
  double w = 0.5;
  double circle_radius = 1.0;
  bool class_agnostic = false;

  void validate() const;
};

/// Greedy circle NMS. Returned indices are in selection order (descending score, ties by index).
std::vector<int> circle_nms(const std::vector<Box3D>& boxes, const NmsConfig& cfg);

/// Per-axis suppression thresholds with yaw folded to [0, pi/2] through |sin| and |cos|.
std::pair<double, double> size_aware_thresholds(const Box3D& a, const Box3D& b, double w);

/// Greedy NMS suppressing when both |dx| < x_thre and |dy| < y_thre on the global BEV axes.
std::vector<int> size_aware_circle_nms(const std::vector<Box3D>& boxes, const NmsConfig& cfg);

/// Exact BEV IoU of the two footprints.
double rotated_iou(const Box3D& a, const Box3D& b);

/// Greedy NMS suppressing when rotated IoU with a kept box exceeds iou_thre.
std::vector<int> iou_nms_oracle(const std::vector<Box3D>& boxes, double iou_thre,
                                bool class_agnostic = false);

/// |A n B| / |A u B| of two index sets; 1 when both are empty.
double jaccard(std::vector<int> a, std::vector<int> b);

/// Seeded detection suite: clustered multi-class objects (parked car rows, pedestrian groups,
/// pedestrians and cyclists beside vehicles) with jittered duplicate detections per object.
std::vector<Box3D> random_suite(std::uint64_t seed, int n_objects = 70);

/// Two pairs sharing the same center offset: a pair of cars that overlap heavily and a pair of
/// pedestrians that do not overlap. Circle NMS cannot tell the pairs apart.
std::vector<Box3D> same_offset_fixture();
/// A top box with a thin zero-IoU neighbour close to its center and a heavily overlapping
/// duplicate farther away.
std::vector<Box3D> zero_iou_fixture();

/// CSV with header x,y,z,dx,dy,dz,yaw,vx,vy,score,class.
void write_boxes_csv(std::ostream& os, const std::vector<Box3D>& boxes);
std::vector<Box3D> read_boxes_csv(std::istream& is);

/// Boxes whose BEV speed is above (moving = true) or at most (moving = false) `threshold`.
std::vector<Box3D> filter_by_speed(const std::vector<Box3D>& boxes, double threshold, bool moving);

}  // namespace dynstereo
