#include "dynstereo/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace dynstereo {
namespace {

using Handler = std::function<void(const YAML::Node&)>;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& message) const {
    throw ConfigError(source_, mark.line + 1, mark.column + 1, message);
  }

  void map(const YAML::Node& node, const std::string& what,
           const std::map<std::string, Handler>& fields) const {
    if (!node.IsMap()) fail(node.Mark(), what + " must be a mapping");
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      const auto it = fields.find(key);
      if (it == fields.end()) fail(kv.first.Mark(), "unknown key '" + key + "' in " + what);
      it->second(kv.second);
    }
  }

  template <typename T>
  T get(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node.Mark(), what + " must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node.Mark(), "cannot parse " + what + " from '" + node.Scalar() + "'");
    }
  }

  template <typename T>
  std::vector<T> list(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node.Mark(), what + " must be a sequence");
    std::vector<T> out;
    for (const auto& item : node) out.push_back(get<T>(item, what + " entry"));
    return out;
  }

  Vec3 vec3(const YAML::Node& node, const std::string& what, bool allow_two = false) const {
    const std::vector<double> v = list<double>(node, what);
    if (allow_two && v.size() == 2) return {v[0], v[1], 0.0};
    if (v.size() != 3) fail(node.Mark(), what + " must have 3 entries");
    return {v[0], v[1], v[2]};
  }

  template <typename Fn>
  void checked(const YAML::Node& node, Fn&& validate) const {
    try {
      validate();
    } catch (const std::invalid_argument& e) {
      fail(node.Mark(), e.what());
    }
  }

 private:
  std::string source_;
};

YAML::Node parse_yaml(const std::string& text, const std::string& source) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source, e.mark.line + 1, e.mark.column + 1, e.msg);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int read_schema(const Reader& r, const YAML::Node& node, int expected) {
  const int v = r.get<int>(node, "schema_version");
  if (v != expected) {
    r.fail(node.Mark(), "unsupported schema_version " + std::to_string(v) + " (expected " +
                            std::to_string(expected) + ")");
  }
  return v;
}

SceneSpec read_scene(const Reader& r, const YAML::Node& root) {
  SceneSpec spec;
  bool has_version = false;
  r.map(root, "scene",
        {{"schema_version",
          [&](const YAML::Node& n) {
            spec.schema_version = read_schema(r, n, kSceneSchemaVersion);
            has_version = true;
          }},
         {"seed", [&](const YAML::Node& n) { spec.seed = r.get<std::uint64_t>(n, "seed"); }},
         {"d_min", [&](const YAML::Node& n) { spec.d_min = r.get<double>(n, "d_min"); }},
         {"d_max", [&](const YAML::Node& n) { spec.d_max = r.get<double>(n, "d_max"); }},
         {"surfaces", [&](const YAML::Node& n) {
            if (!n.IsSequence()) r.fail(n.Mark(), "surfaces must be a sequence");
            for (const auto& item : n) {
              Surface s;
              r.map(item, "surface",
                    {{"name", [&](const YAML::Node& v) { s.name = r.get<std::string>(v, "name"); }},
                     {"kind",
                      [&](const YAML::Node& v) {
                        const auto kind = r.get<std::string>(v, "kind");
                        if (kind == "plane") {
                          s.kind = SurfaceKind::kPlane;
                        } else if (kind == "box") {
                          s.kind = SurfaceKind::kBox;
                        } else {
                          r.fail(v.Mark(), "kind must be 'plane' or 'box', got '" + kind + "'");
                        }
                      }},
                     {"center", [&](const YAML::Node& v) { s.center = r.vec3(v, "center"); }},
                     {"rotation", [&](const YAML::Node& v) { s.rotation = r.vec3(v, "rotation"); }},
                     {"extent", [&](const YAML::Node& v) { s.extent = r.vec3(v, "extent", true); }},
                     {"velocity", [&](const YAML::Node& v) { s.velocity = r.vec3(v, "velocity"); }},
                     {"signature",
                      [&](const YAML::Node& v) { s.signature = r.get<std::uint64_t>(v, "signature"); }},
                     {"texture_scale", [&](const YAML::Node& v) {
                        s.texture_scale = r.get<double>(v, "texture_scale");
                      }}});
              SceneSpec one;
              one.surfaces = {s};
              r.checked(item, [&] { one.validate(); });
              spec.surfaces.push_back(s);
            }
          }}});
  if (!has_version) r.fail(root.Mark(), "scene is missing schema_version");
  r.checked(root, [&] { spec.validate(); });
  return spec;
}

void read_stereo(const Reader& r, const YAML::Node& node, StereoConfig& c) {
  r.map(node, "stereo",
        {{"candidates", [&](const YAML::Node& v) { c.candidates = r.get<int>(v, "candidates"); }},
         {"n_splits", [&](const YAML::Node& v) { c.n_splits = r.get<int>(v, "n_splits"); }},
         {"n_iters", [&](const YAML::Node& v) { c.n_iters = r.get<int>(v, "n_iters"); }},
         {"spread", [&](const YAML::Node& v) { c.spread = r.get<double>(v, "spread"); }},
         {"temperature", [&](const YAML::Node& v) { c.temperature = r.get<double>(v, "temperature"); }},
         {"sigma_min", [&](const YAML::Node& v) { c.sigma_min = r.get<double>(v, "sigma_min"); }},
         {"sigma_max", [&](const YAML::Node& v) { c.sigma_max = r.get<double>(v, "sigma_max"); }},
         {"d_min", [&](const YAML::Node& v) { c.d_min = r.get<double>(v, "d_min"); }},
         {"d_max", [&](const YAML::Node& v) { c.d_max = r.get<double>(v, "d_max"); }},
         {"n_bins", [&](const YAML::Node& v) { c.n_bins = r.get<int>(v, "n_bins"); }},
         {"min_spacing", [&](const YAML::Node& v) { c.min_spacing = r.get<double>(v, "min_spacing"); }}});
  r.checked(node, [&] { c.validate(); });
}

void read_mono(const Reader& r, const YAML::Node& node, MonoModel& m) {
  r.map(node, "mono",
        {{"bias_frac", [&](const YAML::Node& v) { m.bias_frac = r.get<double>(v, "bias_frac"); }},
         {"jitter_frac", [&](const YAML::Node& v) { m.jitter_frac = r.get<double>(v, "jitter_frac"); }},
         {"smoothing_bins",
          [&](const YAML::Node& v) { m.smoothing_bins = r.get<double>(v, "smoothing_bins"); }}});
  r.checked(node, [&] { m.validate(); });
}

void read_camera(const Reader& r, const YAML::Node& node, CameraIntrinsics& k) {
  r.map(node, "camera",
        {{"fx", [&](const YAML::Node& v) { k.fx = r.get<double>(v, "fx"); }},
         {"fy", [&](const YAML::Node& v) { k.fy = r.get<double>(v, "fy"); }},
         {"cx", [&](const YAML::Node& v) { k.cx = r.get<double>(v, "cx"); }},
         {"cy", [&](const YAML::Node& v) { k.cy = r.get<double>(v, "cy"); }},
         {"width", [&](const YAML::Node& v) { k.width = r.get<int>(v, "width"); }},
         {"height", [&](const YAML::Node& v) { k.height = r.get<int>(v, "height"); }}});
  r.checked(node, [&] { k.validate(); });
}

void read_scenarios(const Reader& r, const YAML::Node& node, std::vector<DepthScenario>& out) {
  if (!node.IsSequence()) r.fail(node.Mark(), "scenarios must be a sequence");
  out.clear();
  for (const auto& item : node) {
    DepthScenario s;
    r.map(item, "scenario",
          {{"name", [&](const YAML::Node& v) { s.name = r.get<std::string>(v, "name"); }},
           {"scene", [&](const YAML::Node& v) { s.scene = r.get<std::string>(v, "scene"); }},
           {"baseline", [&](const YAML::Node& v) { s.baseline = r.vec3(v, "baseline"); }},
           {"dt", [&](const YAML::Node& v) { s.dt = r.get<double>(v, "dt"); }}});
    if (s.name.empty()) r.fail(item.Mark(), "scenario needs a name");
    if (!(s.dt >= 0.0)) r.fail(item.Mark(), "scenario dt must be >= 0");
    out.push_back(s);
  }
}

void read_nms(const Reader& r, const YAML::Node& node, NmsExperiment& e) {
  r.map(node, "nms",
        {{"w", [&](const YAML::Node& v) { e.nms.w = r.get<double>(v, "w"); }},
         {"circle_radius",
          [&](const YAML::Node& v) { e.nms.circle_radius = r.get<double>(v, "circle_radius"); }},
         {"class_agnostic",
          [&](const YAML::Node& v) { e.nms.class_agnostic = r.get<bool>(v, "class_agnostic"); }},
         {"iou_thre", [&](const YAML::Node& v) { e.iou_thre = r.get<double>(v, "iou_thre"); }},
         {"suites", [&](const YAML::Node& v) { e.suites = r.get<int>(v, "suites"); }},
         {"objects", [&](const YAML::Node& v) { e.objects = r.get<int>(v, "objects"); }},
         {"w_grid", [&](const YAML::Node& v) { e.w_grid = r.list<double>(v, "w_grid"); }},
         {"radius_grid",
          [&](const YAML::Node& v) { e.radius_grid = r.list<double>(v, "radius_grid"); }},
         {"input", [&](const YAML::Node& v) { e.input = r.get<std::string>(v, "input"); }}});
  r.checked(node, [&] { e.nms.validate(); });
  if (!(e.iou_thre > 0.0 && e.iou_thre < 1.0)) r.fail(node.Mark(), "nms iou_thre must be in (0, 1)");
  if (e.suites < 1 || e.objects < 1) r.fail(node.Mark(), "nms suites and objects must be >= 1");
  if (e.w_grid.empty() || e.radius_grid.empty()) r.fail(node.Mark(), "nms grids must be non-empty");
  for (double w : e.w_grid) {
    if (!(w > 0.0)) r.fail(node.Mark(), "nms w_grid entries must be positive");
  }
  for (double rad : e.radius_grid) {
    if (!(rad > 0.0)) r.fail(node.Mark(), "nms radius_grid entries must be positive");
  }
}

void read_pool(const Reader& r, const YAML::Node& node, PoolExperiment& p) {
  r.map(node, "pool",
        {{"sizes",
          [&](const YAML::Node& v) {
            if (!v.IsSequence()) r.fail(v.Mark(), "pool sizes must be a sequence");
            p.sizes.clear();
            for (const auto& item : v) {
              PoolSize s;
              r.map(item, "pool size",
                    {{"n", [&](const YAML::Node& x) { s.n = r.get<std::size_t>(x, "n"); }},
                     {"x", [&](const YAML::Node& x) { s.x = r.get<int>(x, "x"); }},
                     {"y", [&](const YAML::Node& x) { s.y = r.get<int>(x, "y"); }},
                     {"c", [&](const YAML::Node& x) { s.c = r.get<int>(x, "c"); }}});
              if (s.n == 0 || s.x <= 0 || s.y <= 0 || s.c <= 0) {
                r.fail(item.Mark(), "pool size entries must be positive");
              }
              p.sizes.push_back(s);
            }
          }},
         {"workers", [&](const YAML::Node& v) { p.workers = r.list<int>(v, "workers"); }},
         {"repeats", [&](const YAML::Node& v) { p.repeats = r.get<int>(v, "repeats"); }}});
  if (p.workers.empty()) r.fail(node.Mark(), "pool workers must be non-empty");
  for (int w : p.workers) {
    if (w < 1) r.fail(node.Mark(), "pool workers entries must be >= 1");
  }
  if (p.repeats < 1) r.fail(node.Mark(), "pool repeats must be >= 1");
}

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

nlohmann::ordered_json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, int column,
                         const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

void ExperimentConfig::validate() const {
  if (schema_version != kConfigSchemaVersion) {
    throw std::invalid_argument("unsupported config schema_version");
  }
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  camera.validate();
  stereo.validate();
  mono.validate();
  nms.nms.validate();
  if (!(tau_w > 0.0)) throw std::invalid_argument("tau_w must be positive");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  const Reader r(source);
  const YAML::Node root = parse_yaml(text, source);
  ExperimentConfig cfg;
  bool has_version = false;
  r.map(root, "config",
        {{"schema_version",
          [&](const YAML::Node& n) {
            cfg.schema_version = read_schema(r, n, kConfigSchemaVersion);
            has_version = true;
          }},
         {"seed", [&](const YAML::Node& n) { cfg.seed = r.get<std::uint64_t>(n, "seed"); }},
         {"out", [&](const YAML::Node& n) { cfg.out = r.get<std::string>(n, "out"); }},
         {"workers",
          [&](const YAML::Node& n) {
            cfg.workers = r.get<int>(n, "workers");
            if (cfg.workers < 1) r.fail(n.Mark(), "workers must be >= 1");
          }},
         {"camera", [&](const YAML::Node& n) { read_camera(r, n, cfg.camera); }},
         {"scenarios", [&](const YAML::Node& n) { read_scenarios(r, n, cfg.scenarios); }},
         {"stereo", [&](const YAML::Node& n) { read_stereo(r, n, cfg.stereo); }},
         {"mono", [&](const YAML::Node& n) { read_mono(r, n, cfg.mono); }},
         {"fusion",
          [&](const YAML::Node& n) {
            r.map(n, "fusion", {{"tau_w", [&](const YAML::Node& v) {
                                   cfg.tau_w = r.get<double>(v, "tau_w");
                                   if (!(cfg.tau_w > 0.0)) r.fail(v.Mark(), "tau_w must be positive");
                                 }}});
          }},
         {"nms", [&](const YAML::Node& n) { read_nms(r, n, cfg.nms); }},
         {"pool", [&](const YAML::Node& n) { read_pool(r, n, cfg.pool); }},
         {"gen_scene", [&](const YAML::Node& n) {
            r.map(n, "gen_scene", {{"n_surfaces", [&](const YAML::Node& v) {
                                      cfg.gen_scene.n_surfaces = r.get<int>(v, "n_surfaces");
                                      if (cfg.gen_scene.n_surfaces < 0) {
                                        r.fail(v.Mark(), "n_surfaces must be >= 0");
                                      }
                                    }}});
          }}});
  if (!has_version) r.fail(root.Mark(), "config is missing schema_version");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  ExperimentConfig cfg = parse_config(read_file(path), path.string());
  cfg.base_dir = path.parent_path();
  for (const DepthScenario& s : cfg.scenarios) {
    if (s.scene.rfind("builtin:", 0) == 0) continue;
    const std::filesystem::path p = cfg.base_dir / s.scene;
    if (!std::filesystem::exists(p)) {
      throw ConfigError(path.string(), 0, 0, "scenario '" + s.name + "' scene not found: " + p.string());
    }
  }
  if (!cfg.nms.input.empty() && !std::filesystem::exists(cfg.base_dir / cfg.nms.input)) {
    throw ConfigError(path.string(), 0, 0, "nms input not found: " + cfg.nms.input);
  }
  return cfg;
}

SceneSpec parse_scene(const std::string& text, const std::string& source) {
  return read_scene(Reader(source), parse_yaml(text, source));
}

SceneSpec load_scene(const std::filesystem::path& path) {
  return parse_scene(read_file(path), path.string());
}

std::string scene_to_yaml(const SceneSpec& spec) {
  YAML::Emitter out;
  auto seq3 = [&](const Vec3& v) {
    out << YAML::Flow << YAML::BeginSeq << shortest(v.x()) << shortest(v.y()) << shortest(v.z())
        << YAML::EndSeq;
  };
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << spec.schema_version;
  out << YAML::Key << "seed" << YAML::Value << spec.seed;
  out << YAML::Key << "d_min" << YAML::Value << shortest(spec.d_min);
  out << YAML::Key << "d_max" << YAML::Value << shortest(spec.d_max);
  out << YAML::Key << "surfaces" << YAML::Value << YAML::BeginSeq;
  for (const Surface& s : spec.surfaces) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "kind" << YAML::Value << (s.kind == SurfaceKind::kPlane ? "plane" : "box");
    out << YAML::Key << "center" << YAML::Value;
    seq3(s.center);
    out << YAML::Key << "rotation" << YAML::Value;
    seq3(s.rotation);
    out << YAML::Key << "extent" << YAML::Value;
    seq3(s.extent);
    out << YAML::Key << "velocity" << YAML::Value;
    seq3(s.velocity);
    out << YAML::Key << "signature" << YAML::Value << s.signature;
    out << YAML::Key << "texture_scale" << YAML::Value << shortest(s.texture_scale);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

SceneSpec resolve_scene(const std::string& ref, const std::filesystem::path& base_dir,
                        std::uint64_t builtin_seed) {
  if (ref == "builtin:canonical_static") return canonical_static_scene(builtin_seed);
  if (ref == "builtin:moving_object") return moving_object_scene(builtin_seed);
  if (ref.rfind("builtin:", 0) == 0) throw std::invalid_argument("unknown builtin scene " + ref);
  return load_scene(base_dir / ref);
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema_version"] = cfg.schema_version;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out;
  j["workers"] = cfg.workers;
  const CameraIntrinsics& k = cfg.camera;
  j["camera"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
                 {"width", k.width}, {"height", k.height}};
  nlohmann::ordered_json scenarios = nlohmann::ordered_json::array();
  for (const DepthScenario& s : cfg.scenarios) {
    scenarios.push_back({{"name", s.name}, {"scene", s.scene}, {"baseline", vec_json(s.baseline)},
                         {"dt", s.dt}});
  }
  j["scenarios"] = scenarios;
  const StereoConfig& st = cfg.stereo;
  j["stereo"] = {{"candidates", st.candidates}, {"n_splits", st.n_splits},
                 {"n_iters", st.n_iters},       {"spread", st.spread},
                 {"temperature", st.temperature}, {"sigma_min", st.sigma_min},
                 {"sigma_max", st.sigma_max},   {"d_min", st.d_min},
                 {"d_max", st.d_max},           {"n_bins", st.n_bins},
                 {"min_spacing", st.min_spacing}};
  j["mono"] = {{"bias_frac", cfg.mono.bias_frac},
               {"jitter_frac", cfg.mono.jitter_frac},
               {"smoothing_bins", cfg.mono.smoothing_bins}};
  j["fusion"] = {{"tau_w", cfg.tau_w}};
  j["nms"] = {{"w", cfg.nms.nms.w},
              {"circle_radius", cfg.nms.nms.circle_radius},
              {"class_agnostic", cfg.nms.nms.class_agnostic},
              {"iou_thre", cfg.nms.iou_thre},
              {"suites", cfg.nms.suites},
              {"objects", cfg.nms.objects},
              {"w_grid", cfg.nms.w_grid},
              {"radius_grid", cfg.nms.radius_grid},
              {"input", cfg.nms.input}};
  nlohmann::ordered_json sizes = nlohmann::ordered_json::array();
  for (const PoolSize& s : cfg.pool.sizes) sizes.push_back({{"n", s.n}, {"x", s.x}, {"y", s.y}, {"c", s.c}});
  j["pool"] = {{"sizes", sizes}, {"workers", cfg.pool.workers}, {"repeats", cfg.pool.repeats}};
  j["gen_scene"] = {{"n_surfaces", cfg.gen_scene.n_surfaces}};
  return j;
}

}  // namespace dynstereo
