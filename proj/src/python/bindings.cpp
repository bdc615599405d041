#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "dynstereo/config.hpp"
#include "dynstereo/experiments.hpp"
#include "dynstereo/fusion.hpp"
#include "dynstereo/geometry.hpp"
#include "dynstereo/metrics.hpp"
#include "dynstereo/nms.hpp"
#include "dynstereo/pool.hpp"
#include "dynstereo/scene.hpp"
#include "dynstereo/stereo.hpp"

namespace py = pybind11;
using namespace dynstereo;

namespace {

using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;
using I32Array = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

DepthMap to_depth_map(const F64Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  DepthMap m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::memcpy(m.values().data(), a.data(), m.size() * sizeof(double));
  return m;
}

F64Array from_depth_map(const DepthMap& m) {
  F64Array out({m.height(), m.width()});
  std::memcpy(out.mutable_data(), m.values().data(), m.size() * sizeof(double));
  return out;
}

std::vector<Box3D> to_boxes(const F64Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 11) {
    throw std::invalid_argument("boxes must have shape (N, 11): x,y,z,dx,dy,dz,yaw,vx,vy,score,class");
  }
  std::vector<Box3D> out;
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    const double* r = a.data(i, 0);
    Box3D b{r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8], r[9], static_cast<int>(r[10])};
    b.validate();
    out.push_back(b);
  }
  return out;
}

F64Array from_boxes(const std::vector<Box3D>& boxes) {
  F64Array out({static_cast<py::ssize_t>(boxes.size()), py::ssize_t{11}});
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box3D& b = boxes[i];
    const double row[11] = {b.x, b.y, b.z, b.dx, b.dy, b.dz, b.yaw, b.vx, b.vy, b.score,
                            static_cast<double>(b.class_id)};
    std::memcpy(out.mutable_data(static_cast<py::ssize_t>(i), 0), row, sizeof row);
  }
  return out;
}

Box3D to_box(const F64Array& a) {
  if (a.ndim() != 1 || a.shape(0) != 11) throw std::invalid_argument("box must have 11 entries");
  const double* r = a.data();
  Box3D b{r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8], r[9], static_cast<int>(r[10])};
  b.validate();
  return b;
}

PointFeatureBatch to_batch(const I32Array& ix, const I32Array& iy, const F32Array& features,
                           int grid_x, int grid_y) {
  if (features.ndim() != 2) throw std::invalid_argument("features must have shape (N, C)");
  PointFeatureBatch b;
  b.grid_x = grid_x;
  b.grid_y = grid_y;
  b.channels = static_cast<int>(features.shape(1));
  b.ix.assign(ix.data(), ix.data() + ix.size());
  b.iy.assign(iy.data(), iy.data() + iy.size());
  b.features.assign(features.data(), features.data() + features.size());
  b.validate();
  return b;
}

py::tuple from_grid(const BevGrid& g) {
  F32Array out({g.grid_x, g.grid_y, g.channels});
  std::memcpy(out.mutable_data(), g.data.data(), g.data.size() * sizeof(float));
  return py::make_tuple(out, g.skipped);
}

py::dict metrics_dict(const DepthMetrics& m) {
  py::dict d;
  d["silog"] = m.silog;
  d["abs_rel"] = m.abs_rel;
  d["sq_rel"] = m.sq_rel;
  d["log10"] = m.log10;
  d["rmse"] = m.rmse;
  d["count"] = m.count;
  return d;
}

ExperimentConfig config_from(const py::object& path) {
  if (path.is_none()) return {};
  return load_config(py::str(path).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Temporal stereo depth, BEV pooling and size-aware NMS core.";

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
             CameraIntrinsics k{fx, fy, cx, cy, width, height};
             k.validate();
             return k;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"),
           py::arg("height"))
      .def_readonly("fx", &CameraIntrinsics::fx)
      .def_readonly("fy", &CameraIntrinsics::fy)
      .def_readonly("cx", &CameraIntrinsics::cx)
      .def_readonly("cy", &CameraIntrinsics::cy)
      .def_readonly("width", &CameraIntrinsics::width)
      .def_readonly("height", &CameraIntrinsics::height);

  py::class_<RigidTransform>(m, "RigidTransform")
      .def(py::init<>())
      .def(py::init<const Mat3&, const Vec3&>(), py::arg("rotation"), py::arg("translation"))
      .def_static("from_translation", &RigidTransform::from_translation)
      .def_static("from_rotation_vector", &RigidTransform::from_rotation_vector,
                  py::arg("rotation_vector"), py::arg("translation"))
      .def_property_readonly("rotation", &RigidTransform::rotation)
      .def_property_readonly("translation", &RigidTransform::translation)
      .def("apply", &RigidTransform::apply)
      .def("inverse", &RigidTransform::inverse)
      .def("__mul__", &RigidTransform::operator*);

  m.def("default_intrinsics", &default_intrinsics);
  m.def("unproject", &unproject, py::arg("k"), py::arg("u"), py::arg("v"), py::arg("depth"));
  m.def(
      "project",
      [](const CameraIntrinsics& k, const Vec3& p) {
        const PixelDepth r = project(k, p);
        return py::make_tuple(r.u, r.v, r.z, r.valid);
      },
      py::arg("k"), py::arg("point"), "Returns (u, v, z, valid).");
  m.def(
      "warp_to_source",
      [](const CameraIntrinsics& k_ref, const CameraIntrinsics& k_src, const RigidTransform& m2,
         double u, double v, double d) {
        const PixelDepth r = warp_to_source(k_ref, k_src, m2, u, v, d);
        return py::make_tuple(r.u, r.v, r.z, r.valid);
      },
      py::arg("k_ref"), py::arg("k_src"), py::arg("ref_to_src"), py::arg("u"), py::arg("v"),
      py::arg("depth"), "Returns (u, v, z, valid).");

  py::class_<StereoConfig>(m, "StereoConfig")
      .def(py::init<>())
      .def_readwrite("candidates", &StereoConfig::candidates)
      .def_readwrite("n_splits", &StereoConfig::n_splits)
      .def_readwrite("n_iters", &StereoConfig::n_iters)
      .def_readwrite("spread", &StereoConfig::spread)
      .def_readwrite("temperature", &StereoConfig::temperature)
      .def_readwrite("sigma_min", &StereoConfig::sigma_min)
      .def_readwrite("sigma_max", &StereoConfig::sigma_max)
      .def_readwrite("d_min", &StereoConfig::d_min)
      .def_readwrite("d_max", &StereoConfig::d_max)
      .def_readwrite("n_bins", &StereoConfig::n_bins)
      .def_readwrite("min_spacing", &StereoConfig::min_spacing)
      .def("bin_depths", &StereoConfig::bin_depths);

  m.def(
      "update_sigma",
      [](double sigma_old, double p_mu, const StereoConfig& cfg) {
        return update_sigma(sigma_old, p_mu, cfg);
      },
      py::arg("sigma_old"), py::arg("p_mu"), py::arg("cfg") = StereoConfig{});
  m.def(
      "candidate_depths",
      [](double mu, double sigma, double lo, double hi, const StereoConfig& cfg) {
        return candidate_depths(mu, sigma, DepthRange{lo, hi}, cfg);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("lo"), py::arg("hi"),
      py::arg("cfg") = StereoConfig{});
  m.def("gaussian_confidence", &gaussian_confidence, py::arg("depth"), py::arg("mu"),
        py::arg("sigma"));

  m.def(
      "run_depth_scenario",
      [](const std::string& scene, const Vec3& baseline, double dt, std::uint64_t seed,
         int workers) {
        ExperimentConfig cfg;
        cfg.seed = seed;
        cfg.workers = workers;
        const DepthScenario sc{"scenario", scene, baseline, dt};
        DepthScenarioResult r;
        {
          py::gil_scoped_release release;
          r = run_depth_scenario(cfg, sc);
        }
        py::dict out;
        for (const SubsetMetrics& s : r.subsets) {
          py::dict d;
          d["mono"] = metrics_dict(s.mono);
          py::list st, fu;
          for (const auto& x : s.stereo) st.append(metrics_dict(x));
          for (const auto& x : s.fused) fu.append(metrics_dict(x));
          d["stereo"] = st;
          d["fused"] = fu;
          out[py::str(s.subset)] = d;
        }
        out["median_mu_error"] = r.median_mu_error;
        out["mean_weight"] = r.mean_weight;
        out["median_monotone"] = r.median_monotone;
        out["rmse_improved"] = r.rmse_improved;
        out["max_mu_drift"] = r.max_mu_drift;
        const GaussianDepthField& f = r.final_field;
        F64Array mu({f.height(), f.width(), f.n_splits()});
        F64Array sigma({f.height(), f.width(), f.n_splits()});
        std::memcpy(mu.mutable_data(), f.mu_values().data(), f.mu_values().size() * sizeof(double));
        std::memcpy(sigma.mutable_data(), f.sigma_values().data(),
                    f.sigma_values().size() * sizeof(double));
        out["mu"] = mu;
        out["sigma"] = sigma;
        return out;
      },
      py::arg("scene") = "builtin:canonical_static",
      py::arg("baseline") = Vec3(0.5, 0.0, 0.0), py::arg("dt") = 0.5, py::arg("seed") = 42,
      py::arg("workers") = 1,
      "Runs mono / stereo / fused on one scene; returns metrics per subset and the final field.");

  m.def(
      "depth_metrics",
      [](const F64Array& pred, const F64Array& gt) {
        return metrics_dict(depth_metrics(to_depth_map(pred), to_depth_map(gt)));
      },
      py::arg("pred"), py::arg("gt"));
  m.def(
      "render_depth",
      [](const std::string& scene, double t) {
        const SceneSpec spec = resolve_scene(scene, ".");
        return from_depth_map(render(spec, default_intrinsics(), RigidTransform::identity(), t).depth_gt);
      },
      py::arg("scene") = "builtin:canonical_static", py::arg("t") = 0.0);

  m.def(
      "circle_nms",
      [](const F64Array& boxes, double radius, bool class_agnostic) {
        NmsConfig c;
        c.circle_radius = radius;
        c.class_agnostic = class_agnostic;
        return circle_nms(to_boxes(boxes), c);
      },
      py::arg("boxes"), py::arg("circle_radius"), py::arg("class_agnostic") = false);
  m.def(
      "size_aware_circle_nms",
      [](const F64Array& boxes, double w, bool class_agnostic) {
        NmsConfig c;
        c.w = w;
        c.class_agnostic = class_agnostic;
        return size_aware_circle_nms(to_boxes(boxes), c);
      },
      py::arg("boxes"), py::arg("w") = 0.5, py::arg("class_agnostic") = false);
  m.def(
      "iou_nms_oracle",
      [](const F64Array& boxes, double iou_thre, bool class_agnostic) {
        return iou_nms_oracle(to_boxes(boxes), iou_thre, class_agnostic);
      },
      py::arg("boxes"), py::arg("iou_thre"), py::arg("class_agnostic") = false);
  m.def(
      "size_aware_thresholds",
      [](const F64Array& a, const F64Array& b, double w) {
        return size_aware_thresholds(to_box(a), to_box(b), w);
      },
      py::arg("a"), py::arg("b"), py::arg("w"));
  m.def(
      "rotated_iou", [](const F64Array& a, const F64Array& b) { return rotated_iou(to_box(a), to_box(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "random_suite", [](std::uint64_t seed, int n) { return from_boxes(random_suite(seed, n)); },
      py::arg("seed"), py::arg("n_objects") = 70);
  m.def("jaccard", &jaccard, py::arg("a"), py::arg("b"));
  m.def(
      "match_and_recall",
      [](const F64Array& pred, const F64Array& gt) {
        const RecallReport r = match_and_recall(to_boxes(pred), to_boxes(gt));
        py::dict d;
        d["thresholds"] = r.thresholds;
        d["recall"] = r.recall;
        d["mean_distance"] = r.mean_distance;
        d["empty_gt"] = r.empty_gt;
        return d;
      },
      py::arg("pred"), py::arg("gt"));

  m.def(
      "pool_v1",
      [](const I32Array& ix, const I32Array& iy, const F32Array& features, int gx, int gy) {
        return from_grid(pool_v1(to_batch(ix, iy, features, gx, gy)));
      },
      py::arg("ix"), py::arg("iy"), py::arg("features"), py::arg("grid_x"), py::arg("grid_y"),
      "Returns (grid[X, Y, C], skipped).");
  m.def(
      "pool_v2",
      [](const I32Array& ix, const I32Array& iy, const F32Array& features, int gx, int gy,
         int workers, bool atomic) {
        const PointFeatureBatch b = to_batch(ix, iy, features, gx, gy);
        BevGrid g;
        {
          py::gil_scoped_release release;
          g = pool_v2(b, workers, atomic ? PoolMode::kAtomic : PoolMode::kDeterministic);
        }
        return from_grid(g);
      },
      py::arg("ix"), py::arg("iy"), py::arg("features"), py::arg("grid_x"), py::arg("grid_y"),
      py::arg("workers") = 1, py::arg("atomic") = false, "Returns (grid[X, Y, C], skipped).");

  auto command = [&m](const char* name, CommandResult (*fn)(const ExperimentConfig&)) {
    m.def(
        name,
        [fn](const py::object& config, py::object seed) {
          ExperimentConfig cfg = config_from(config);
          if (!seed.is_none()) cfg.seed = seed.cast<std::uint64_t>();
          CommandResult r;
          {
            py::gil_scoped_release release;
            r = fn(cfg);
          }
          return py::make_tuple(r.report.dump(), r.invariants_passed);
        },
        py::arg("config") = py::none(), py::arg("seed") = py::none(),
        "Runs the command; returns (report JSON text without timestamp, invariants_passed).");
  };
  command("cmd_depth", cmd_depth);
  command("cmd_nms", cmd_nms);
  command("cmd_pool", cmd_pool);
  command("cmd_gen_scene", cmd_gen_scene);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
}
