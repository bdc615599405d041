#include "dynstereo/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "dynstereo/fusion.hpp"
#include "dynstereo/nms.hpp"
#include "dynstereo/parallel.hpp"
#include "dynstereo/pool.hpp"

namespace dynstereo {
namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

json metrics_json(const DepthMetrics& m) {
  return {{"silog", m.silog}, {"abs_rel", m.abs_rel}, {"sq_rel", m.sq_rel},
          {"log10", m.log10}, {"rmse", m.rmse},       {"count", m.count}};
}

std::string metrics_csv(const DepthMetrics& m) {
  return fmt(m.silog) + "," + fmt(m.abs_rel) + "," + fmt(m.sq_rel) + "," + fmt(m.log10) + "," +
         fmt(m.rmse) + "," + std::to_string(m.count);
}

json invariants_json(const std::vector<InvariantCheck>& checks) {
  json out = json::array();
  for (const auto& c : checks) out.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return out;
}

bool all_pass(const std::vector<InvariantCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

json report_header(const char* kind, const ExperimentConfig& cfg) {
  json j;
  j["report"] = kind;
  j["report_schema_version"] = kReportSchemaVersion;
  j["config"] = config_to_json(cfg);
  return j;
}

InvariantCheck normalized_check(const std::string& name, const DepthDistribution& d) {
  double worst = 0.0;
  for (std::size_t p = 0; p < d.pixels(); ++p) {
    double s = 0.0;
    for (double v : d.at(p)) s += v;
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return {name, worst <= 1e-6, "max |sum - 1| = " + fmt(worst)};
}

}  // namespace

const SubsetMetrics* DepthScenarioResult::subset(const std::string& name) const {
  for (const auto& s : subsets) {
    if (s.subset == name) return &s;
  }
  return nullptr;
}

DepthScenarioResult run_depth_scenario(const ExperimentConfig& cfg, const DepthScenario& scenario) {
  cfg.validate();
  const StereoConfig& sc = cfg.stereo;
  const SceneSpec spec = resolve_scene(scenario.scene, cfg.base_dir);
  const RigidTransform ref_pose = RigidTransform::identity();
  const RigidTransform src_pose = RigidTransform::from_translation(-scenario.baseline);
  const FramePair pair = make_pair(spec, cfg.camera, ref_pose, src_pose, scenario.dt, cfg.workers);

  const std::vector<double> bins = sc.bin_depths();
  MonoModel mono_model = cfg.mono;
  mono_model.seed = cfg.seed;
  const DepthDistribution mono_ref = mono_depth(pair.ref, mono_model, bins);
  mono_model.seed = cfg.seed + 1;
  const DepthDistribution mono_src = mono_depth(pair.src, mono_model, bins);
  const DepthMap mono_src_expected = expected_depth(mono_src);
  const DepthMap mono_ref_expected = expected_depth(mono_ref);
  const std::vector<double> weights = split_weights(mono_ref, sc);
  const std::vector<GaussianDepthField> trace =
      iterate_trace(pair.ref, pair.src, pair.ref_to_src, init_hypothesis(mono_ref, sc), sc, cfg.workers);

  DepthScenarioResult r;
  r.name = scenario.name;
  const DepthMap& gt = pair.ref.depth_gt;
  const int h = gt.height();
  const int w = gt.width();

  Raster<unsigned char> all(h, w, 0), moving(h, w, 0), still(h, w, 0);
  std::size_t n_moving = 0;
  std::size_t n_still = 0;
  for (std::size_t p = 0; p < gt.size(); ++p) {
    if (!(gt[p] > 0.0)) continue;
    all[p] = 1;
    const Surface& s = spec.surfaces[static_cast<std::size_t>(pair.ref.surface_index[p])];
    if (s.velocity.norm() > 0.0) {
      moving[p] = 1;
      ++n_moving;
    } else {
      still[p] = 1;
      ++n_still;
    }
  }
  if (n_moving + n_still == 0) throw std::runtime_error("scenario '" + scenario.name + "' sees no surface");
  std::vector<std::pair<std::string, const Raster<unsigned char>*>> masks{{"all", &all}};
  if (n_moving > 0 && n_still > 0) {
    masks.push_back({"static", &still});
    masks.push_back({"moving", &moving});
  }
  for (const auto& [name, mask] : masks) {
    SubsetMetrics m;
    m.subset = name;
    m.mono = depth_metrics(mono_ref_expected, gt, *mask);
    r.subsets.push_back(m);
  }

  r.invariants.push_back(normalized_check("mono_normalized", mono_ref));
  bool stereo_norm = true;
  bool fused_norm = true;
  bool weights_in_range = true;
  bool field_in_range = true;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const GaussianDepthField& f = trace[k];
    for (std::size_t p = 0; p < f.pixels(); ++p) {
      for (int s = 0; s < sc.n_splits; ++s) {
        const DepthRange range = sc.split_range(s);
        const double mu = f.mu(p, s);
        const double sg = f.sigma(p, s);
        if (!(mu >= range.lo && mu <= range.hi) || !(sg >= sc.sigma_min && sg <= sc.sigma_max)) {
          field_in_range = false;
        }
        r.max_mu_drift = std::max(r.max_mu_drift, std::abs(mu - trace[0].mu(p, s)));
      }
    }
    const DepthDistribution stereo = render_stereo_depth(f, sc, weights);
    const DepthMap mu = dominant_mu(f, weights);
    const WeightMap wm = weight_map(mono_src_expected, mu, pair.ref_to_src, cfg.camera, cfg.camera, cfg.tau_w);
    const DepthDistribution fused = fuse(mono_ref, stereo, wm);
    stereo_norm = stereo_norm && normalized_check("", stereo).pass;
    fused_norm = fused_norm && normalized_check("", fused).pass;
    const DepthMap stereo_e = expected_depth(stereo);
    const DepthMap fused_e = expected_depth(fused);
    for (std::size_t i = 0; i < masks.size(); ++i) {
      r.subsets[i].stereo.push_back(depth_metrics(stereo_e, gt, *masks[i].second));
      r.subsets[i].fused.push_back(depth_metrics(fused_e, gt, *masks[i].second));
    }
    std::vector<double> err;
    double wsum = 0.0;
    for (std::size_t p = 0; p < gt.size(); ++p) {
      if (!all[p]) continue;
      err.push_back(std::abs(f.mu(p, sc.split_of(gt[p])) - gt[p]));
      wsum += wm[p];
      if (!(wm[p] >= 0.0 && wm[p] <= 1.0)) weights_in_range = false;
    }
    r.median_mu_error.push_back(median(err));
    r.mean_weight.push_back(wsum / static_cast<double>(err.size()));
  }
  r.median_monotone = true;
  for (std::size_t k = 1; k < r.median_mu_error.size(); ++k) {
    if (r.median_mu_error[k] > r.median_mu_error[k - 1]) r.median_monotone = false;
  }
  r.rmse_improved = r.subsets[0].stereo.back().rmse < r.subsets[0].stereo.front().rmse;

  r.invariants.push_back({"stereo_normalized", stereo_norm, "all iterations"});
  r.invariants.push_back({"fused_normalized", fused_norm, "all iterations"});
  r.invariants.push_back({"field_within_bounds", field_in_range, "mu in split, sigma in [min, max]"});
  r.invariants.push_back({"weights_in_unit_interval", weights_in_range, "all iterations"});
  bool finite = true;
  for (const auto& s : r.subsets) {
    auto ok = [](const DepthMetrics& m) {
      return std::isfinite(m.silog) && std::isfinite(m.abs_rel) && std::isfinite(m.rmse) &&
             std::isfinite(m.sq_rel) && std::isfinite(m.log10);
    };
    finite = finite && ok(s.mono) && std::all_of(s.stereo.begin(), s.stereo.end(), ok) &&
             std::all_of(s.fused.begin(), s.fused.end(), ok);
  }
  r.invariants.push_back({"metrics_finite", finite, ""});
  const bool static_scene = std::all_of(spec.surfaces.begin(), spec.surfaces.end(),
                                        [](const Surface& s) { return s.velocity.norm() == 0.0; });
  r.fixed_point_expected = static_scene && scenario.baseline.norm() == 0.0;
  if (r.fixed_point_expected) {
    r.invariants.push_back({"zero_parallax_fixed_point", r.max_mu_drift <= 1e-6,
                            "max |mu_k - mu_0| = " + fmt(r.max_mu_drift)});
  }
  r.final_field = trace.back();
  return r;
}

CommandResult cmd_depth(const ExperimentConfig& cfg) {
  CommandResult out;
  out.report = report_header("depth", cfg);
  json scenarios = json::array();
  std::string csv = "scenario,subset,variant,iterations,silog,abs_rel,sq_rel,log10,rmse,count\n";
  std::string trend = "scenario,iterations,median_abs_mu_error,mean_weight\n";
  for (const DepthScenario& sc : cfg.scenarios) {
    const DepthScenarioResult r = run_depth_scenario(cfg, sc);
    json j;
    j["name"] = r.name;
    j["scene"] = sc.scene;
    json subsets = json::array();
    for (const SubsetMetrics& s : r.subsets) {
      json rows = json::array();
      rows.push_back({{"variant", "mono"}, {"iterations", nullptr}, {"metrics", metrics_json(s.mono)}});
      csv += r.name + "," + s.subset + ",mono,," + metrics_csv(s.mono) + "\n";
      for (std::size_t k = 0; k < s.stereo.size(); ++k) {
        rows.push_back({{"variant", "stereo"}, {"iterations", k}, {"metrics", metrics_json(s.stereo[k])}});
        csv += r.name + "," + s.subset + ",stereo," + std::to_string(k) + "," + metrics_csv(s.stereo[k]) + "\n";
      }
      for (std::size_t k = 0; k < s.fused.size(); ++k) {
        rows.push_back({{"variant", "fused"}, {"iterations", k}, {"metrics", metrics_json(s.fused[k])}});
        csv += r.name + "," + s.subset + ",fused," + std::to_string(k) + "," + metrics_csv(s.fused[k]) + "\n";
      }
      subsets.push_back({{"subset", s.subset}, {"rows", rows}});
    }
    j["subsets"] = subsets;
    for (std::size_t k = 0; k < r.median_mu_error.size(); ++k) {
      trend += r.name + "," + std::to_string(k) + "," + fmt(r.median_mu_error[k]) + "," +
               fmt(r.mean_weight[k]) + "\n";
    }
    j["trend"] = {{"median_abs_mu_error", r.median_mu_error},
                  {"mean_weight", r.mean_weight},
                  {"median_monotone", r.median_monotone},
                  {"rmse_improved", r.rmse_improved}};
    j["max_mu_drift"] = r.max_mu_drift;
    j["invariants"] = invariants_json(r.invariants);
    out.invariants_passed = out.invariants_passed && all_pass(r.invariants);
    std::ostringstream field;
    write_field(field, r.final_field);
    const std::string field_name = r.name + "_field.bin";
    out.files.emplace_back(field_name, field.str());
    j["field_file"] = field_name;
    scenarios.push_back(j);
  }
  out.report["scenarios"] = scenarios;
  out.report["invariants_passed"] = out.invariants_passed;
  out.files.emplace_back("depth_metrics.csv", csv);
  out.files.emplace_back("depth_trend.csv", trend);
  return out;
}

CommandResult cmd_nms(const ExperimentConfig& cfg) {
  cfg.validate();
  const NmsExperiment& e = cfg.nms;
  CommandResult out;
  out.report = report_header("nms", cfg);
  std::vector<InvariantCheck> checks;
  std::string csv = "mode,method,param,mean_jaccard\n";

  std::vector<std::vector<Box3D>> suites(static_cast<std::size_t>(e.suites));
  parallel_for(0, e.suites, cfg.workers, [&](int s) {
    suites[static_cast<std::size_t>(s)] = random_suite(cfg.seed + static_cast<std::uint64_t>(s), e.objects);
  });

  json modes = json::array();
  double gap[2] = {0.0, 0.0};
  bool top_kept = true;
  for (int agnostic = 0; agnostic < 2; ++agnostic) {
    const std::size_t nr = e.radius_grid.size();
    const std::size_t nw = e.w_grid.size();
    std::vector<double> per(suites.size() * (nr + nw), 0.0);
    std::vector<unsigned char> top(suites.size(), 1);
    parallel_for(0, e.suites, cfg.workers, [&](int s) {
      const auto& boxes = suites[static_cast<std::size_t>(s)];
      const std::vector<int> oracle = iou_nms_oracle(boxes, e.iou_thre, agnostic);
      const int best = oracle.empty() ? -1 : oracle.front();
      double* row = per.data() + static_cast<std::size_t>(s) * (nr + nw);
      NmsConfig c = e.nms;
      c.class_agnostic = agnostic;
      for (std::size_t i = 0; i < nr; ++i) {
        c.circle_radius = e.radius_grid[i];
        const auto kept = circle_nms(boxes, c);
        row[i] = jaccard(kept, oracle);
        if (kept.empty() || kept.front() != best) top[static_cast<std::size_t>(s)] = 0;
      }
      for (std::size_t i = 0; i < nw; ++i) {
        c.w = e.w_grid[i];
        const auto kept = size_aware_circle_nms(boxes, c);
        row[nr + i] = jaccard(kept, oracle);
        if (kept.empty() || kept.front() != best) top[static_cast<std::size_t>(s)] = 0;
      }
    });
    top_kept = top_kept && std::all_of(top.begin(), top.end(), [](unsigned char t) { return t != 0; });
    std::vector<double> mean(nr + nw, 0.0);
    for (std::size_t s = 0; s < suites.size(); ++s) {
      for (std::size_t i = 0; i < nr + nw; ++i) mean[i] += per[s * (nr + nw) + i];
    }
    for (double& m : mean) m /= static_cast<double>(suites.size());
    const std::string mode = agnostic ? "class_agnostic" : "class_aware";
    json circle = json::array();
    json size_aware = json::array();
    std::size_t bc = 0;
    std::size_t bs = nr;
    for (std::size_t i = 0; i < nr; ++i) {
      circle.push_back({{"circle_radius", e.radius_grid[i]}, {"mean_jaccard", mean[i]}});
      csv += mode + ",circle," + fmt(e.radius_grid[i]) + "," + fmt(mean[i]) + "\n";
      if (mean[i] > mean[bc]) bc = i;
    }
    for (std::size_t i = nr; i < nr + nw; ++i) {
      size_aware.push_back({{"w", e.w_grid[i - nr]}, {"mean_jaccard", mean[i]}});
      csv += mode + ",size_aware," + fmt(e.w_grid[i - nr]) + "," + fmt(mean[i]) + "\n";
      if (mean[i] > mean[bs]) bs = i;
    }
    gap[agnostic] = mean[bs] - mean[bc];
    modes.push_back({{"mode", mode},
                     {"circle", circle},
                     {"size_aware", size_aware},
                     {"best", {{"circle_radius", e.radius_grid[bc]},
                               {"circle_jaccard", mean[bc]},
                               {"w", e.w_grid[bs - nr]},
                               {"size_aware_jaccard", mean[bs]},
                               {"gap", gap[agnostic]},
                               {"size_aware_better", mean[bs] > mean[bc]}}}});
  }
  out.report["suites"] = e.suites;
  out.report["modes"] = modes;
  out.report["agnostic_gap_larger"] = gap[1] > gap[0];
  checks.push_back({"top_score_always_kept", top_kept, "every method, suite and grid point"});

  bool symmetric = true;
  for (const auto& boxes : suites) {
    for (std::size_t i = 0; i + 1 < boxes.size() && i < 50; ++i) {
      if (size_aware_thresholds(boxes[i], boxes[i + 1], e.nms.w) !=
          size_aware_thresholds(boxes[i + 1], boxes[i], e.nms.w)) {
        symmetric = false;
      }
    }
  }
  checks.push_back({"thresholds_symmetric", symmetric, "adjacent pairs of every suite"});

  json fixtures = json::array();
  std::string fixture_csv = "fixture,method,kept\n";
  auto ids = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    std::string s;
    for (int i : v) s += (s.empty() ? "" : " ") + std::to_string(i);
    return s;
  };
  for (const auto& [name, boxes] : {std::pair{std::string("same_offset"), same_offset_fixture()},
                                    std::pair{std::string("zero_iou"), zero_iou_fixture()}}) {
    NmsConfig c = e.nms;
    c.class_agnostic = true;
    const auto oracle = iou_nms_oracle(boxes, e.iou_thre, true);
    const auto sa = size_aware_circle_nms(boxes, c);
    json circle_rows = json::array();
    int circle_errors = 0;
    for (double rad : e.radius_grid) {
      c.circle_radius = rad;
      const auto kept = circle_nms(boxes, c);
      const bool agrees = jaccard(kept, oracle) == 1.0;
      circle_errors += !agrees;
      circle_rows.push_back({{"circle_radius", rad}, {"kept", ids(kept)}, {"agrees", agrees}});
      fixture_csv += name + ",circle@" + fmt(rad) + "," + ids(kept) + "\n";
    }
    fixture_csv += name + ",oracle," + ids(oracle) + "\n";
    fixture_csv += name + ",size_aware@" + fmt(e.nms.w) + "," + ids(sa) + "\n";
    fixtures.push_back({{"fixture", name},
                        {"oracle_kept", ids(oracle)},
                        {"size_aware_kept", ids(sa)},
                        {"size_aware_agrees", jaccard(sa, oracle) == 1.0},
                        {"circle", circle_rows},
                        {"circle_disagreements", circle_errors}});
  }
  out.report["fixtures"] = fixtures;

  std::ostringstream suite0;
  write_boxes_csv(suite0, suites.front());
  out.files.emplace_back("nms_suite0.csv", suite0.str());
  if (!e.input.empty()) {
    std::ifstream in(cfg.base_dir / e.input);
    const std::vector<Box3D> boxes = read_boxes_csv(in);
    auto pick = [&](const std::vector<int>& kept) {
      std::vector<Box3D> sel;
      for (int i : kept) sel.push_back(boxes[static_cast<std::size_t>(i)]);
      std::ostringstream os;
      write_boxes_csv(os, sel);
      return os.str();
    };
    out.files.emplace_back("nms_kept_circle.csv", pick(circle_nms(boxes, e.nms)));
    out.files.emplace_back("nms_kept_size_aware.csv", pick(size_aware_circle_nms(boxes, e.nms)));
    out.files.emplace_back("nms_kept_oracle.csv",
                           pick(iou_nms_oracle(boxes, e.iou_thre, e.nms.class_agnostic)));
    out.report["input"] = {{"path", e.input}, {"boxes", boxes.size()}};
  }
  out.report["invariants"] = invariants_json(checks);
  out.invariants_passed = all_pass(checks);
  out.report["invariants_passed"] = out.invariants_passed;
  out.files.emplace_back("nms_agreement.csv", csv);
  out.files.emplace_back("nms_fixtures.csv", fixture_csv);
  return out;
}

CommandResult cmd_pool(const ExperimentConfig& cfg) {
  cfg.validate();
  CommandResult out;
  out.report = report_header("pool", cfg);
  std::vector<InvariantCheck> checks;
  json rows = json::array();
  std::string csv = "variant,N,X,Y,C,workers,median_ms,speedup\n";
  for (const PoolSize& s : cfg.pool.sizes) {
    const PointFeatureBatch batch = random_batch(s.n, s.x, s.y, s.c, cfg.seed);
    const BevGrid v1 = pool_v1(batch);
    for (int w : cfg.pool.workers) {
      const BevGrid det = pool_v2(batch, w, PoolMode::kDeterministic);
      const BevGrid atom = pool_v2(batch, w, PoolMode::kAtomic);
      const bool identical = det.data.size() == v1.data.size() &&
                             std::memcmp(det.data.data(), v1.data.data(), v1.data.size() * sizeof(float)) == 0;
      const double rel = max_relative_difference(atom, v1);
      const std::string tag = "N=" + std::to_string(s.n) + " C=" + std::to_string(s.c) +
                              " workers=" + std::to_string(w);
      checks.push_back({"deterministic_bit_identical " + tag, identical, ""});
      checks.push_back({"atomic_within_1e-5 " + tag, rel < 1e-5, "max rel diff " + fmt(rel)});
      for (const PoolBenchRow& r : bench_pool(s.n, s.x, s.y, s.c, w, cfg.pool.repeats, cfg.seed)) {
        if (r.variant == "v1" && w != cfg.pool.workers.front()) continue;
        rows.push_back({{"variant", r.variant}, {"N", r.n}, {"X", r.x}, {"Y", r.y}, {"C", r.c},
                        {"workers", r.workers}, {"median_ms", r.median_ms}, {"speedup", r.speedup}});
        csv += r.variant + "," + std::to_string(r.n) + "," + std::to_string(r.x) + "," +
               std::to_string(r.y) + "," + std::to_string(r.c) + "," + std::to_string(r.workers) +
               "," + fmt(r.median_ms) + "," + fmt(r.speedup) + "\n";
      }
    }
  }
  out.report["hardware_threads"] = std::thread::hardware_concurrency();
  out.report["rows"] = rows;
  out.report["invariants"] = invariants_json(checks);
  out.invariants_passed = all_pass(checks);
  out.report["invariants_passed"] = out.invariants_passed;
  out.files.emplace_back("pool_bench.csv", csv);
  return out;
}

CommandResult cmd_gen_scene(const ExperimentConfig& cfg) {
  cfg.validate();
  CommandResult out;
  out.report = report_header("gen_scene", cfg);
  const SceneSpec spec = random_scene(cfg.seed, cfg.gen_scene.n_surfaces);
  const FrameBundle frame = render(spec, cfg.camera, RigidTransform::identity(), 0.0, cfg.workers);
  std::vector<std::size_t> pixels(spec.surfaces.size(), 0);
  std::size_t covered = 0;
  bool in_range = true;
  for (std::size_t p = 0; p < frame.depth_gt.size(); ++p) {
    const int s = frame.surface_index[p];
    if (s < 0) continue;
    ++covered;
    ++pixels[static_cast<std::size_t>(s)];
    if (!(frame.depth_gt[p] >= spec.d_min && frame.depth_gt[p] <= spec.d_max)) in_range = false;
  }
  json surfaces = json::array();
  for (std::size_t i = 0; i < spec.surfaces.size(); ++i) {
    surfaces.push_back({{"name", spec.surfaces[i].name},
                        {"kind", spec.surfaces[i].kind == SurfaceKind::kPlane ? "plane" : "box"},
                        {"visible_pixels", pixels[i]}});
  }
  std::vector<InvariantCheck> checks{{"depth_within_scene_range", in_range, ""}};
  out.report["scene_file"] = "scene.yaml";
  out.report["surfaces"] = surfaces;
  out.report["coverage"] = static_cast<double>(covered) / static_cast<double>(frame.depth_gt.size());
  out.report["invariants"] = invariants_json(checks);
  out.invariants_passed = all_pass(checks);
  out.report["invariants_passed"] = out.invariants_passed;
  out.files.emplace_back("scene.yaml", scene_to_yaml(spec));
  return out;
}

void write_command_outputs(const CommandResult& result, const std::string& name,
                           const std::filesystem::path& dir, const std::string& generated_at) {
  std::filesystem::create_directories(dir);
  json report = result.report;
  report["generated_at"] = generated_at;
  {
    std::ofstream os(dir / (name + ".json"), std::ios::binary);
    os << report.dump(2) << "\n";
    if (!os) throw std::runtime_error("cannot write " + (dir / (name + ".json")).string());
  }
  for (const auto& [file, bytes] : result.files) {
    std::ofstream os(dir / file, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("cannot write " + (dir / file).string());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace dynstereo
