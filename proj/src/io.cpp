#include "dsk3dom/io.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dsk3dom {

using nlohmann::json;

namespace {

constexpr const char* kLogHeader = "# dsk3dom measurement log v1";
constexpr const char* kSnapshotHeader = "# dsk3dom snapshot v1";

[[noreturn]] void schema_error(const std::string& context, const std::string& message) {
  throw std::runtime_error(context + ": " + message);
}

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& context) {
  if (!obj.is_object()) schema_error(context, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) schema_error(context, "unknown key '" + key + "'");
  }
}

double get_number(const json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key)) schema_error(context, std::string("missing key '") + key + "'");
  if (!obj[key].is_number()) schema_error(context, std::string("'") + key + "' must be a number");
  return obj[key].get<double>();
}

double get_number_or(const json& obj, const char* key, double fallback,
                     const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) schema_error(context, std::string("'") + key + "' must be a number");
  return obj[key].get<double>();
}

Vec3 get_vec3(const json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key)) schema_error(context, std::string("missing key '") + key + "'");
  const json& arr = obj[key];
  if (!arr.is_array() || arr.size() != 3)
    schema_error(context, std::string("'") + key + "' must be an array of 3 numbers");
  return Vec3(arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>());
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

RunConfig load_config(const std::filesystem::path& path) {
  const json j = load_json(path);
  const std::string ctx = path.string();
  require_keys(j, {"grid", "filter", "seed", "snapshot_stride", "log", "out"}, ctx);

  RunConfig cfg;
  if (j.contains("grid")) {
    const json& g = j["grid"];
    require_keys(g, {"min_corner", "cell_edge", "dims"}, ctx + ": grid");
    cfg.grid.min_corner = get_vec3(g, "min_corner", ctx + ": grid");
    cfg.grid.cell_edge = get_number(g, "cell_edge", ctx + ": grid");
    const json& dims = g.contains("dims") ? g["dims"] : json{};
    if (!dims.is_array() || dims.size() != 3)
      schema_error(ctx + ": grid", "'dims' must be an array of 3 integers");
    for (int a = 0; a < 3; ++a) cfg.grid.dims[a] = dims[a].get<int>();
  }
  if (!cfg.grid.valid()) schema_error(ctx, "grid has non-positive edge or dims");

  const json f = j.contains("filter") ? j["filter"] : json::object();
  require_keys(f,
               {"gamma", "alpha", "birth_prob", "dirichlet_prior_sum", "sigma_p", "sigma_v",
                "persistence_prob", "birth_velocity_max", "kernel_length", "kernel_scale",
                "particle_scale", "ground_filter"},
               ctx + ": filter");
  FilterParams& fp = cfg.filter;
  fp.gamma = get_number_or(f, "gamma", 0.99, ctx);
  fp.alpha = get_number_or(f, "alpha", 0.9, ctx);
  fp.birth_prob = get_number_or(f, "birth_prob", 0.02, ctx);
  fp.dirichlet_prior_sum = get_number_or(f, "dirichlet_prior_sum", 0.001, ctx);
  fp.motion.sigma_p = get_number_or(f, "sigma_p", 0.05, ctx);
  fp.motion.sigma_v = get_number_or(f, "sigma_v", 0.1, ctx);
  fp.motion.p_S = get_number_or(f, "persistence_prob", 0.99, ctx);
  fp.motion.v_max_birth = get_number_or(f, "birth_velocity_max", 3.0, ctx);
  fp.kernel.length = get_number_or(f, "kernel_length", 0.5, ctx);
  fp.kernel.sigma_0 = get_number_or(f, "kernel_scale", 0.1, ctx);
  cfg.particle_scale = get_number_or(f, "particle_scale", 0.05, ctx);
  if (f.contains("ground_filter") && !f["ground_filter"].is_null())
    fp.ground_filter = f["ground_filter"].get<double>();

  if (!(fp.gamma >= 0.0 && fp.gamma <= 1.0) || !(fp.alpha >= 0.0 && fp.alpha <= 1.0) ||
      !(fp.birth_prob >= 0.0 && fp.birth_prob <= 1.0))
    schema_error(ctx, "gamma, alpha, birth_prob must lie in [0, 1]");
  if (!(fp.dirichlet_prior_sum > 0.0)) schema_error(ctx, "dirichlet_prior_sum must be positive");
  if (!(cfg.particle_scale > 0.0)) schema_error(ctx, "particle_scale must be positive");
  fp.nu = static_cast<int>(std::lround(kFullScaleNu * cfg.particle_scale));
  fp.nu_b = static_cast<int>(std::lround(kFullScaleNuB * cfg.particle_scale));

  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      schema_error(ctx, "'seed' must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("snapshot_stride")) {
    cfg.snapshot_stride = j["snapshot_stride"].get<int>();
    if (cfg.snapshot_stride < 1) schema_error(ctx, "snapshot_stride must be >= 1");
  }
  if (j.contains("log")) cfg.log_path = j["log"].get<std::string>();
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
  return cfg;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const json j = load_json(path);
  const std::string ctx = path.string();
  require_keys(j, {"name", "duration", "ground_plane", "lidar", "ego", "objects"}, ctx);

  Scenario s;
  if (j.contains("name")) s.name = j["name"].get<std::string>();
  s.duration = get_number(j, "duration", ctx);
  if (!(s.duration > 0.0)) schema_error(ctx, "duration must be positive");
  if (j.contains("ground_plane") && !j["ground_plane"].is_null())
    s.ground_plane = j["ground_plane"].get<double>();

  if (j.contains("lidar")) {
    const json& l = j["lidar"];
    require_keys(l, {"channels", "vertical_fov_deg", "azimuth_step_deg", "max_range", "rate"},
                 ctx + ": lidar");
    s.lidar.channels = static_cast<int>(get_number_or(l, "channels", 16, ctx));
    s.lidar.vertical_fov_deg = get_number_or(l, "vertical_fov_deg", 15.0, ctx);
    s.lidar.azimuth_step_deg = get_number_or(l, "azimuth_step_deg", 1.0, ctx);
    s.lidar.max_range = get_number_or(l, "max_range", 10.0, ctx);
    s.lidar.rate = get_number_or(l, "rate", 10.0, ctx);
    if (s.lidar.channels < 1 || !(s.lidar.max_range > 0.0) || !(s.lidar.rate > 0.0) ||
        !(s.lidar.azimuth_step_deg > 0.0))
      schema_error(ctx, "invalid lidar parameters");
  }

  if (j.contains("ego")) {
    if (!j["ego"].is_array()) schema_error(ctx, "'ego' must be an array of waypoints");
    for (const json& w : j["ego"]) {
      require_keys(w, {"t", "position"}, ctx + ": ego waypoint");
      EgoWaypoint wp;
      wp.t = get_number(w, "t", ctx);
      wp.position = get_vec3(w, "position", ctx);
      if (!s.ego_waypoints.empty() && wp.t < s.ego_waypoints.back().t)
        schema_error(ctx, "ego waypoints must be sorted by t");
      s.ego_waypoints.push_back(wp);
    }
  }

  if (j.contains("objects")) {
    if (!j["objects"].is_array()) schema_error(ctx, "'objects' must be an array");
    for (const json& o : j["objects"]) {
      require_keys(o,
                   {"id", "shape", "half_extents", "radius", "half_height", "position",
                    "quaternion", "velocity"},
                   ctx + ": object");
      ObjectSpec obj;
      if (!o.contains("id") || !o["id"].is_string())
        schema_error(ctx + ": object", "missing string 'id'");
      obj.id = o["id"].get<std::string>();
      const std::string shape = o.contains("shape") ? o["shape"].get<std::string>() : "";
      const std::string octx = ctx + ": object '" + obj.id + "'";
      if (shape == "box") {
        BoxShape box;
        box.half_extents = get_vec3(o, "half_extents", octx);
        if (!(box.half_extents.minCoeff() > 0.0)) schema_error(octx, "half_extents must be positive");
        obj.shape = box;
      } else if (shape == "cylinder") {
        CylinderShape cyl;
        cyl.radius = get_number(o, "radius", octx);
        cyl.half_height = get_number(o, "half_height", octx);
        if (!(cyl.radius > 0.0 && cyl.half_height > 0.0))
          schema_error(octx, "radius and half_height must be positive");
        obj.shape = cyl;
      } else {
        schema_error(octx, "shape must be 'box' or 'cylinder'");
      }
      obj.pose.translation = get_vec3(o, "position", octx);
      if (o.contains("quaternion")) {
        const json& q = o["quaternion"];
        if (!q.is_array() || q.size() != 4)
          schema_error(octx, "'quaternion' must be [x, y, z, w]");
        obj.pose.rotation =
            Quat(q[3].get<double>(), q[0].get<double>(), q[1].get<double>(), q[2].get<double>())
                .normalized();
      }
      if (o.contains("velocity")) obj.velocity = get_vec3(o, "velocity", octx);
      s.objects.push_back(std::move(obj));
    }
  }
  return s;
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

LogWriter::LogWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out_ << kLogHeader << "\n";
}

void LogWriter::write(const SimulatedFrame& frame) {
  out_ << format_double(frame.timestamp);
  const Pose& p = frame.sensor_pose;
  out_ << ' ' << format_double(p.translation.x()) << ' ' << format_double(p.translation.y())
       << ' ' << format_double(p.translation.z()) << ' ' << format_double(p.rotation.x()) << ' '
       << format_double(p.rotation.y()) << ' ' << format_double(p.rotation.z()) << ' '
       << format_double(p.rotation.w());
  out_ << ' ' << frame.rays.size();
  for (const auto& sr : frame.rays) {
    out_ << ' ' << sr.channel << ' ' << format_double(sr.azimuth_deg) << ' ' << (sr.ray.hit ? 1 : 0)
         << ' ' << format_double(sr.ray.endpoint.x()) << ' ' << format_double(sr.ray.endpoint.y())
         << ' ' << format_double(sr.ray.endpoint.z());
  }
  out_ << '\n';
}

namespace {

class TokenReader {
 public:
  TokenReader(const std::string& line, const std::string& context, std::size_t line_number)
      : stream_(line), context_(context), line_(line_number) {}

  double next_double(const char* field) {
    std::string tok = next_token(field);
    double v;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) fail(field, tok);
    return v;
  }
  long long next_int(const char* field) {
    std::string tok = next_token(field);
    long long v;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) fail(field, tok);
    return v;
  }

 private:
  std::string next_token(const char* field) {
    std::string tok;
    if (!(stream_ >> tok)) fail(field, "<end of line>");
    return tok;
  }
  [[noreturn]] void fail(const char* field, const std::string& got) {
    throw std::runtime_error(context_ + ":" + std::to_string(line_) + ": bad field '" + field +
                             "' (got '" + got + "')");
  }

  std::istringstream stream_;
  std::string context_;
  std::size_t line_;
};

}  // namespace

std::vector<SimulatedFrame> read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kLogHeader)
    throw std::runtime_error(path.string() + ":1: not a dsk3dom measurement log");

  std::vector<SimulatedFrame> frames;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    TokenReader tokens(line, path.string(), line_number);
    SimulatedFrame frame;
    frame.timestamp = tokens.next_double("timestamp");
    Vec3 tr;
    tr.x() = tokens.next_double("tx");
    tr.y() = tokens.next_double("ty");
    tr.z() = tokens.next_double("tz");
    const double qx = tokens.next_double("qx");
    const double qy = tokens.next_double("qy");
    const double qz = tokens.next_double("qz");
    const double qw = tokens.next_double("qw");
    frame.sensor_pose.translation = tr;
    frame.sensor_pose.rotation = Quat(qw, qx, qy, qz);
    const long long nrays = tokens.next_int("ray count");
    if (nrays < 0) throw std::runtime_error(path.string() + ": negative ray count");
    frame.rays.resize(static_cast<std::size_t>(nrays));
    for (auto& sr : frame.rays) {
      sr.channel = static_cast<int>(tokens.next_int("channel"));
      sr.azimuth_deg = tokens.next_double("azimuth");
      sr.ray.hit = tokens.next_int("hit flag") != 0;
      sr.ray.endpoint.x() = tokens.next_double("endpoint x");
      sr.ray.endpoint.y() = tokens.next_double("endpoint y");
      sr.ray.endpoint.z() = tokens.next_double("endpoint z");
      sr.ray.origin = tr;
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

Snapshot make_snapshot(std::uint64_t frame_index, double timestamp, const Pose& sensor_pose,
                       const GridMap& map) {
  Snapshot snap;
  snap.frame_index = frame_index;
  snap.timestamp = timestamp;
  snap.grid = map.spec();
  snap.sensor_pose = sensor_pose;
  const auto& dims = snap.grid.dims;
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) {
        const CellState& state = map.cell(snap.grid.flat(i, j, k));
        if (state.bba.mass(FocalElement::Unknown) < 1.0)
          snap.cells.push_back({i, j, k, state});
      }
  return snap;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snapshot) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << kSnapshotHeader << "\n";
  out << "frame " << snapshot.frame_index << "\n";
  out << "t " << format_double(snapshot.timestamp) << "\n";
  const GridSpec& g = snapshot.grid;
  out << "grid " << format_double(g.min_corner.x()) << ' ' << format_double(g.min_corner.y())
      << ' ' << format_double(g.min_corner.z()) << ' ' << format_double(g.cell_edge) << ' '
      << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << "\n";
  const Pose& p = snapshot.sensor_pose;
  out << "pose " << format_double(p.translation.x()) << ' ' << format_double(p.translation.y())
      << ' ' << format_double(p.translation.z()) << ' ' << format_double(p.rotation.x()) << ' '
      << format_double(p.rotation.y()) << ' ' << format_double(p.rotation.z()) << ' '
      << format_double(p.rotation.w()) << "\n";
  out << "cells " << snapshot.cells.size() << "\n";
  for (const auto& c : snapshot.cells) {
    const auto& m = c.state.bba.masses();
    out << c.i << ' ' << c.j << ' ' << c.k;
    for (double v : m) out << ' ' << format_double(v);
    out << ' ' << format_double(c.state.rho_p) << ' ' << format_double(c.state.rho_b) << ' '
        << format_double(c.state.mean_velocity.x()) << ' '
        << format_double(c.state.mean_velocity.y()) << ' '
        << format_double(c.state.mean_velocity.z()) << "\n";
  }
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t line_number = 0;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line))
      throw std::runtime_error(path.string() + ": truncated snapshot at line " +
                               std::to_string(line_number + 1));
    ++line_number;
    return line;
  };

  if (next_line() != kSnapshotHeader)
    throw std::runtime_error(path.string() + ":1: not a dsk3dom snapshot");

  Snapshot snap;
  {
    std::istringstream is(next_line());
    std::string tag;
    is >> tag >> snap.frame_index;
    if (tag != "frame") throw std::runtime_error(path.string() + ": expected 'frame' line");
  }
  {
    TokenReader tokens(next_line().substr(2), path.string(), line_number);
    snap.timestamp = tokens.next_double("t");
  }
  {
    std::string& l = next_line();
    if (l.rfind("grid ", 0) != 0) throw std::runtime_error(path.string() + ": expected 'grid' line");
    TokenReader tokens(l.substr(5), path.string(), line_number);
    snap.grid.min_corner.x() = tokens.next_double("min x");
    snap.grid.min_corner.y() = tokens.next_double("min y");
    snap.grid.min_corner.z() = tokens.next_double("min z");
    snap.grid.cell_edge = tokens.next_double("cell edge");
    for (int a = 0; a < 3; ++a)
      snap.grid.dims[a] = static_cast<int>(tokens.next_int("dims"));
  }
  {
    std::string& l = next_line();
    if (l.rfind("pose ", 0) != 0) throw std::runtime_error(path.string() + ": expected 'pose' line");
    TokenReader tokens(l.substr(5), path.string(), line_number);
    snap.sensor_pose.translation.x() = tokens.next_double("tx");
    snap.sensor_pose.translation.y() = tokens.next_double("ty");
    snap.sensor_pose.translation.z() = tokens.next_double("tz");
    const double qx = tokens.next_double("qx");
    const double qy = tokens.next_double("qy");
    const double qz = tokens.next_double("qz");
    const double qw = tokens.next_double("qw");
    snap.sensor_pose.rotation = Quat(qw, qx, qy, qz);
  }
  std::size_t count = 0;
  {
    std::istringstream is(next_line());
    std::string tag;
    is >> tag >> count;
    if (tag != "cells") throw std::runtime_error(path.string() + ": expected 'cells' line");
  }
  snap.cells.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    TokenReader tokens(next_line(), path.string(), line_number);
    SnapshotCell c;
    c.i = static_cast<int>(tokens.next_int("i"));
    c.j = static_cast<int>(tokens.next_int("j"));
    c.k = static_cast<int>(tokens.next_int("k"));
    std::array<double, kFocalCount> m{};
    for (auto& v : m) v = tokens.next_double("mass");
    c.state.bba = Bba::unchecked(m);
    c.state.rho_p = tokens.next_double("rho_p");
    c.state.rho_b = tokens.next_double("rho_b");
    c.state.mean_velocity.x() = tokens.next_double("vx");
    c.state.mean_velocity.y() = tokens.next_double("vy");
    c.state.mean_velocity.z() = tokens.next_double("vz");
    snap.cells.push_back(c);
  }
  return snap;
}

std::vector<CellState> dense_cells(const Snapshot& snapshot) {
  std::vector<CellState> cells(static_cast<std::size_t>(snapshot.grid.cell_count()));
  for (const auto& c : snapshot.cells)
    cells[static_cast<std::size_t>(snapshot.grid.flat(c.i, c.j, c.k))] = c.state;
  return cells;
}

std::string snapshot_filename(std::uint64_t frame_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snapshot_%06llu.dsnap",
                static_cast<unsigned long long>(frame_index));
  return buf;
}

}  // namespace dsk3dom
