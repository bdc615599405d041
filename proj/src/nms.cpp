#include "dynstereo/nms.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dynstereo {
namespace {

using Point = std::array<double, 2>;
using Polygon = std::vector<Point>;

std::vector<int> greedy_order(const std::vector<Box3D>& boxes) {
  std::vector<int> order(boxes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return boxes[a].score > boxes[b].score; });
  return order;
}

template <typename Suppress>
std::vector<int> greedy_nms(const std::vector<Box3D>& boxes, bool class_agnostic,
                            Suppress&& suppress) {
  for (const Box3D& b : boxes) b.validate();
  std::vector<int> kept;
  for (int i : greedy_order(boxes)) {
    bool drop = false;
    for (int k : kept) {
      if (!class_agnostic && boxes[k].class_id != boxes[i].class_id) continue;
      if (suppress(boxes[k], boxes[i])) {
        drop = true;
        break;
      }
    }
    if (!drop) kept.push_back(i);
  }
  return kept;
}

double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double area(const Polygon& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point& a = p[i];
    const Point& b = p[(i + 1) % p.size()];
    s += a[0] * b[1] - a[1] * b[0];
  }
  return 0.5 * std::abs(s);
}

// Sutherland-Hodgman clip of `subject` against the convex counter-clockwise `clip`.
Polygon clip_convex(Polygon subject, const Polygon& clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const Point& a = clip[e];
    const Point& b = clip[(e + 1) % clip.size()];
    Polygon out;
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Point& p = subject[i];
      const Point& q = subject[(i + 1) % subject.size()];
      const double cp = cross(a, b, p);
      const double cq = cross(a, b, q);
      if (cp >= 0.0) out.push_back(p);
      if ((cp >= 0.0) != (cq >= 0.0)) {
        const double t = cp / (cp - cq);
        out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
      }
    }
    subject = std::move(out);
  }
  return subject;
}

double speed(const Box3D& b) { return std::hypot(b.vx, b.vy); }

struct ClassShape {
  double dx, dy, dz;
};

// Car, truck, pedestrian, cyclist.
constexpr std::array<ClassShape, 4> kShapes{{{4.6, 1.9, 1.7}, {8.5, 2.6, 3.2},
                                             {0.75, 0.7, 1.75}, {1.8, 0.65, 1.4}}};

}  // namespace

void Box3D::validate() const {
  if (!(dx > 0.0 && dy > 0.0 && dz > 0.0)) throw std::invalid_argument("box dims must be positive");
  if (!(score >= 0.0 && score <= 1.0)) throw std::invalid_argument("box score must be in [0, 1]");
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(yaw)) {
    throw std::invalid_argument("box center and yaw must be finite");
  }
}

std::array<std::array<double, 2>, 4> Box3D::corners() const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double hu = dy / 2;  // along local x = (c, s)
  const double hv = dx / 2;  // along local y = (-s, c)
  std::array<Point, 4> out;
  const double su[4] = {-1, 1, 1, -1};
  const double sv[4] = {-1, -1, 1, 1};
  for (int i = 0; i < 4; ++i) {
    out[i] = {x + su[i] * hu * c - sv[i] * hv * s, y + su[i] * hu * s + sv[i] * hv * c};
  }
  return out;
}

void NmsConfig::validate() const {
  if (!(w > 0.0)) throw std::invalid_argument("nms: w must be positive");
  if (!(circle_radius > 0.0)) throw std::invalid_argument("nms: circle_radius must be positive");
}

std::vector<int> circle_nms(const std::vector<Box3D>& boxes, const NmsConfig& cfg) {
  cfg.validate();
  const double r2 = cfg.circle_radius * cfg.circle_radius;
  return greedy_nms(boxes, cfg.class_agnostic, [r2](const Box3D& a, const Box3D& b) {
    const double ddx = a.x - b.x;
    const double ddy = a.y - b.y;
    return ddx * ddx + ddy * ddy < r2;
  });
}

std::pair<double, double> size_aware_thresholds(const Box3D& a, const Box3D& b, double w) {
  const double s1 = std::abs(std::sin(a.yaw));
  const double c1 = std::abs(std::cos(a.yaw));
  const double s2 = std::abs(std::sin(b.yaw));
  const double c2 = std::abs(std::cos(b.yaw));
  // Per-box terms first so that swapping a and b gives bit-identical sums.
  const double x_thre = w * ((s1 * a.dx + c1 * a.dy) + (s2 * b.dx + c2 * b.dy));
  const double y_thre = w * ((s1 * a.dy + c1 * a.dx) + (s2 * b.dy + c2 * b.dx));
  return {x_thre, y_thre};
}

std::vector<int> size_aware_circle_nms(const std::vector<Box3D>& boxes, const NmsConfig& cfg) {
  cfg.validate();
  return greedy_nms(boxes, cfg.class_agnostic, [w = cfg.w](const Box3D& a, const Box3D& b) {
    const auto [xt, yt] = size_aware_thresholds(a, b, w);
    return std::abs(a.x - b.x) < xt && std::abs(a.y - b.y) < yt;
  });
}

double rotated_iou(const Box3D& a, const Box3D& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const Polygon pa(ca.begin(), ca.end());
  const Polygon pb(cb.begin(), cb.end());
  const Polygon inter = clip_convex(pa, pb);
  const double ai = inter.size() < 3 ? 0.0 : area(inter);
  const double au = a.dx * a.dy + b.dx * b.dy - ai;
  if (!(au > 0.0)) return 0.0;
  return std::clamp(ai / au, 0.0, 1.0);
}

std::vector<int> iou_nms_oracle(const std::vector<Box3D>& boxes, double iou_thre,
                                bool class_agnostic) {
  return greedy_nms(boxes, class_agnostic, [iou_thre](const Box3D& a, const Box3D& b) {
    return rotated_iou(a, b) > iou_thre;
  });
}

double jaccard(std::vector<int> a, std::vector<int> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (a.empty() && b.empty()) return 1.0;
  std::vector<int> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  const double inter = static_cast<double>(common.size());
  return inter / (static_cast<double>(a.size() + b.size()) - inter);
}

std::vector<Box3D> random_suite(std::uint64_t seed, int n_objects) {
  if (n_objects < 0) throw std::invalid_argument("random_suite: negative object count");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double kHalfArea = 40.0;

  auto make = [&](int cls, double x, double y, double yaw) {
    Box3D b;
    b.class_id = cls;
    b.x = x;
    b.y = y;
    b.yaw = yaw;
    b.dx = kShapes[cls].dx * (0.9 + 0.2 * unit(rng));
    b.dy = kShapes[cls].dy * (0.9 + 0.2 * unit(rng));
    b.dz = kShapes[cls].dz;
    b.z = b.dz / 2;
    return b;
  };

  std::vector<Box3D> objects;
  auto try_place = [&](const Box3D& b) {
    if (std::abs(b.x) > kHalfArea || std::abs(b.y) > kHalfArea) return false;
    for (const Box3D& o : objects) {
      if (rotated_iou(o, b) > 0.0) return false;
    }
    objects.push_back(b);
    return true;
  };

  int attempts = 0;
  while (static_cast<int>(objects.size()) < n_objects && attempts++ < 50 * (n_objects + 1)) {
    const double cx = (2.0 * unit(rng) - 1.0) * kHalfArea;
    const double cy = (2.0 * unit(rng) - 1.0) * kHalfArea;
    const double heading = unit(rng) < 0.5 ? 0.0 : std::numbers::pi / 2;
    const double kind = unit(rng);
    if (kind < 0.35) {
      // Parked row of cars (trucks now and then) with small gaps, plus curbside pedestrians.
      const int n = 2 + static_cast<int>(unit(rng) * 4);
      double along = 0.0;
      for (int i = 0; i < n; ++i) {
        const int cls = unit(rng) < 0.2 ? 1 : 0;
        const double yaw = heading + 0.05 * normal(rng);
        Box3D b = make(cls, 0.0, 0.0, yaw);
        along += b.dx / 2;
        b.x = cx - std::sin(heading) * along;
        b.y = cy + std::cos(heading) * along;
        try_place(b);
        along += b.dx / 2 + 0.3 + 0.9 * unit(rng);
        if (unit(rng) < 0.4) {
          const double side = b.dy / 2 + 0.4 + 0.3 * unit(rng);
          try_place(make(unit(rng) < 0.7 ? 2 : 3, b.x + std::cos(heading) * side,
                         b.y + std::sin(heading) * side, 2.0 * std::numbers::pi * unit(rng)));
        }
      }
    } else if (kind < 0.65) {
      // Pedestrian group.
      const int n = 2 + static_cast<int>(unit(rng) * 5);
      for (int i = 0; i < n; ++i) {
        try_place(make(2, cx + 1.6 * normal(rng), cy + 1.6 * normal(rng),
                       2.0 * std::numbers::pi * unit(rng)));
      }
    } else if (kind < 0.85) {
      // Cyclist or pedestrian passing a vehicle.
      Box3D v = make(unit(rng) < 0.7 ? 0 : 1, cx, cy, heading + 0.05 * normal(rng));
      if (try_place(v)) {
        const double side = v.dy / 2 + 0.35 + 0.35 * unit(rng);
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        const double slide = (unit(rng) - 0.5) * v.dx * 0.6;
        try_place(make(unit(rng) < 0.5 ? 3 : 2,
                       cx + sign * std::cos(heading) * side - std::sin(heading) * slide,
                       cy + sign * std::sin(heading) * side + std::cos(heading) * slide,
                       heading + 0.1 * normal(rng)));
      }
    } else {
      try_place(make(static_cast<int>(unit(rng) * 4), cx, cy, 2.0 * std::numbers::pi * unit(rng)));
    }
  }
  if (static_cast<int>(objects.size()) > n_objects) objects.resize(static_cast<std::size_t>(n_objects));

  std::vector<Box3D> dets;
  for (const Box3D& o : objects) {
    Box3D best = o;
    best.x += 0.03 * o.dy * normal(rng);
    best.y += 0.03 * o.dx * normal(rng);
    best.score = 0.5 + 0.5 * unit(rng);
    dets.push_back(best);
    const int dups = static_cast<int>(unit(rng) * 4);
    for (int d = 0; d < dups; ++d) {
      Box3D dup = o;
      const double c = std::cos(o.yaw);
      const double s = std::sin(o.yaw);
      const double du = 0.12 * o.dy * normal(rng);
      const double dv = 0.12 * o.dx * normal(rng);
      dup.x += du * c - dv * s;
      dup.y += du * s + dv * c;
      dup.yaw += 0.08 * normal(rng);
      dup.dx *= 1.0 + 0.08 * normal(rng);
      dup.dy *= 1.0 + 0.08 * normal(rng);
      dup.dx = std::max(dup.dx, 0.1);
      dup.dy = std::max(dup.dy, 0.1);
      dup.score = best.score * (0.3 + 0.65 * unit(rng));
      dets.push_back(dup);
    }
    if (unit(rng) < 0.3) {
      // Same object also reported under the confusable class.
      Box3D alt = best;
      alt.class_id = o.class_id ^ 1;
      alt.x += 0.05 * o.dy * normal(rng);
      alt.y += 0.05 * o.dx * normal(rng);
      alt.score = best.score * (0.2 + 0.5 * unit(rng));
      dets.push_back(alt);
    }
  }
  std::shuffle(dets.begin(), dets.end(), rng);
  return dets;
}

std::vector<Box3D> same_offset_fixture() {
  Box3D car_a{0.0, 0.0, 0.85, 4.6, 1.9, 1.7, 0.0, 0.0, 0.0, 0.9, 0};
  Box3D car_b = car_a;
  car_b.y = 1.5;
  car_b.score = 0.8;
  Box3D ped_a{20.0, 0.0, 0.9, 0.7, 0.7, 1.75, 0.0, 0.0, 0.0, 0.85, 0};
  Box3D ped_b = ped_a;
  ped_b.y = 1.5;
  ped_b.score = 0.75;
  return {car_a, car_b, ped_a, ped_b};
}

std::vector<Box3D> zero_iou_fixture() {
  Box3D top{0.0, 0.0, 0.85, 4.6, 1.9, 1.7, 0.0, 0.0, 0.0, 0.95, 0};
  // Thin box flush against the long side: center 1.3 m away, no overlap.
  Box3D thin{1.3, 0.0, 0.5, 3.0, 0.3, 1.0, 0.0, 0.0, 0.0, 0.7, 0};
  // Duplicate shifted along the length: center 2.0 m away, IoU 2.6 / 6.6.
  Box3D dup = top;
  dup.y = 2.0;
  dup.score = 0.6;
  return {top, thin, dup};
}

void write_boxes_csv(std::ostream& os, const std::vector<Box3D>& boxes) {
  os << "x,y,z,dx,dy,dz,yaw,vx,vy,score,class\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (const Box3D& b : boxes) {
    line.str("");
    line << b.x << ',' << b.y << ',' << b.z << ',' << b.dx << ',' << b.dy << ',' << b.dz << ','
         << b.yaw << ',' << b.vx << ',' << b.vy << ',' << b.score << ',' << b.class_id << '\n';
    os << line.str();
  }
}

std::vector<Box3D> read_boxes_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("box csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,z,dx,dy,dz,yaw,vx,vy,score,class") {
    throw std::runtime_error("box csv: unexpected header '" + line + "'");
  }
  std::vector<Box3D> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) {
      throw std::runtime_error("box csv line " + std::to_string(lineno) + ": expected 11 fields");
    }
    Box3D b;
    try {
      double* fields[10] = {&b.x, &b.y, &b.z, &b.dx, &b.dy, &b.dz, &b.yaw, &b.vx, &b.vy, &b.score};
      for (int i = 0; i < 10; ++i) *fields[i] = std::stod(cells[i]);
      b.class_id = std::stoi(cells[10]);
      b.validate();
    } catch (const std::exception& e) {
      throw std::runtime_error("box csv line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(b);
  }
  return out;
}

std::vector<Box3D> filter_by_speed(const std::vector<Box3D>& boxes, double threshold, bool moving) {
  std::vector<Box3D> out;
  for (const Box3D& b : boxes) {
    if ((speed(b) > threshold) == moving) out.push_back(b);
  }
  return out;
}

}  // namespace dynstereo
