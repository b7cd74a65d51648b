#include "finrot/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace finrot {

namespace {

using nlohmann::json;

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace

std::string group_to_json(const FiniteGroup& g) {
  json j;
  j["name"] = g.name;
  j["order"] = g.order;
  json quats = json::array();
  for (const Rotation& r : g.elements)
    quats.push_back(json::array({r.q.w, r.q.x, r.q.y, r.q.z}));
  j["quaternions"] = std::move(quats);
  json cayley = json::array();
  for (int i = 0; i < g.order; ++i) {
    json row = json::array();
    for (int k = 0; k < g.order; ++k) row.push_back(g.at(i, k));
    cayley.push_back(std::move(row));
  }
  j["cayley"] = std::move(cayley);
  j["inverse"] = g.inverse;
  j["hash"] = hash_hex(group_hash(g));
  return j.dump(1) + "\n";
}

FiniteGroup group_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("group JSON parse error: ") + e.what());
  }
  FiniteGroup g;
  try {
    g.name = j.at("name").get<std::string>();
    g.order = j.at("order").get<int>();
    const json& quats = j.at("quaternions");
    const json& cayley = j.at("cayley");
    if (g.order < 1 || int(quats.size()) != g.order || int(cayley.size()) != g.order)
      throw std::invalid_argument("group JSON: order disagrees with table sizes");
    for (const json& q : quats) {
      if (!q.is_array() || q.size() != 4)
        throw std::invalid_argument("group JSON: quaternion must be [w, x, y, z]");
      // Keep the stored bits: from_quat would renormalize and perturb the
      // last ulp, shifting the hash of a freshly round-tripped group. Unit
      // length is checked here; canonical sign falls to verify_group.
      const Quat v{q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                   q[3].get<double>()};
      const double n2 = v.w * v.w + v.x * v.x + v.y * v.y + v.z * v.z;
      if (std::fabs(n2 - 1.0) > 1e-9)
        throw std::invalid_argument("group JSON: quaternion not unit length");
      g.elements.push_back(Rotation{v, quat_to_matrix(v)});
    }
    for (const json& row : cayley) {
      if (int(row.size()) != g.order)
        throw std::invalid_argument("group JSON: ragged cayley row");
      for (const json& v : row) {
        const int idx = v.get<int>();
        if (idx < 0 || idx >= g.order)
          throw std::invalid_argument("group JSON: cayley index out of range");
        g.cayley.push_back(idx);
      }
    }
    g.inverse = j.at("inverse").get<std::vector<int>>();
    if (int(g.inverse.size()) != g.order)
      throw std::invalid_argument("group JSON: inverse size mismatch");
    for (int v : g.inverse)
      if (v < 0 || v >= g.order)
        throw std::invalid_argument("group JSON: inverse index out of range");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("group JSON: ") + e.what());
  }
  return g;
}

std::string hspace_to_json(const HSpace& h) {
  json j;
  j["kind"] = to_string(h.kind);
  j["eta"] = h.eta;
  j["stabilizer_order"] = h.stabilizer_order;
  if (h.group) {
    j["group"] = h.group->name;
    j["group_hash"] = hash_hex(group_hash(*h.group));
  }
  json pts = json::array();
  for (const Vec3& p : h.points) pts.push_back(vec_json(p));
  j["points"] = std::move(pts);
  json action = json::array();
  const int order = h.group ? h.group->order : 0;
  for (int g = 0; g < order; ++g) {
    json row = json::array();
    for (int x = 0; x < h.size(); ++x) row.push_back(h.act(g, x));
    action.push_back(std::move(row));
  }
  j["action"] = std::move(action);
  return j.dump(1) + "\n";
}

std::string config_to_json(const CameraConfig& cfg) {
  json j;
  j["kind"] = to_string(cfg.kind);
  j["panorama_k"] = cfg.panorama_k;
  j["radius"] = cfg.radius;
  j["group"] = cfg.group->name;
  j["group_hash"] = hash_hex(group_hash(*cfg.group));
  j["space"] = to_string(cfg.space->kind);
  json poses = json::array();
  for (const CameraPose& p : cfg.poses)
    poses.push_back(json{{"position", vec_json(p.position)},
                         {"optical_axis", vec_json(p.optical_axis)},
                         {"up", vec_json(p.up)}});
  j["poses"] = std::move(poses);
  j["assignment"] = cfg.assignment;
  return j.dump(1) + "\n";
}

CameraConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config JSON parse error: ") + e.what());
  }
  try {
    const ConfigKind kind = parse_config_kind(j.at("kind").get<std::string>());
    const double radius = j.at("radius").get<double>();
    const int pk = j.value("panorama_k", 0);
    CameraConfig cfg = gen_config(kind, radius, pk);
    const json& poses = j.at("poses");
    if (int(poses.size()) != cfg.n_views())
      throw std::invalid_argument("config JSON: pose count disagrees with kind");
    for (size_t i = 0; i < poses.size(); ++i) {
      CameraPose& p = cfg.poses[i];
      p.position = vec_from(poses[i].at("position"));
      p.optical_axis = vec_from(poses[i].at("optical_axis"));
      p.up = vec_from(poses[i].at("up"));
    }
    cfg.assignment = j.at("assignment").get<std::vector<int>>();
    if (int(cfg.assignment.size()) != cfg.n_views())
      throw std::invalid_argument("config JSON: assignment size mismatch");
    return cfg;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config JSON: ") + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("short write to " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace finrot
