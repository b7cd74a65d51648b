#include "finrot/view_config.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "finrot/platonic.hpp"

namespace finrot {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Up for a camera at unit direction p: the north pole projected into the
// tangent plane, or +x when p is a pole (the projection vanishes there).
Vec3 default_up(const Vec3& p) {
  Vec3 north{0, 0, 1};
  Vec3 t = north - p * dot(north, p);
  if (norm(t) < 1e-9) return {1, 0, 0};
  return normalized(t);
}

CameraPose pose_at(const Vec3& dir, const Vec3& up, double radius) {
  CameraPose pose;
  pose.position = dir * radius;
  pose.optical_axis = -dir;
  pose.up = up;
  return pose;
}

// First edge-trisection point: between the pole vertex and its greatest
// neighbor in (z, y, x) order, one third of the way along.
Vec3 reference_trisection() {
  std::vector<Vec3> v = icosahedron_vertices();
  const double edge = norm(v[1] - v[0]);
  int nb = -1;
  for (int i = 1; i < 12; ++i)
    if (std::abs(norm(v[static_cast<size_t>(i)] - v[0]) - edge) < 1e-9) {
      nb = i;
      break;
    }
  return normalized(v[0] * (2.0 / 3.0) + v[static_cast<size_t>(nb)] * (1.0 / 3.0));
}

// Orbit of one reference pose under the whole group; pose i is element i
// applied to the reference, and the assignment is re-derived (not assumed)
// by matching each pose's world rotation back to an element.
void fill_orbit(CameraConfig& cfg, const CameraPose& ref) {
  const FiniteGroup& g = *cfg.group;
  const Mat3 r_ref = ref.world_rotation();
  cfg.poses.reserve(static_cast<size_t>(g.order));
  cfg.assignment.resize(static_cast<size_t>(g.order));
  for (int e = 0; e < g.order; ++e) {
    CameraPose p = rotated_pose(ref, g.elements[static_cast<size_t>(e)].m);
    NearestElement match = nearest_element(g, Rotation::from_matrix(p.world_rotation() * r_ref.transposed()), 1e-9);
    if (!match.exact || match.index != e)
      throw std::logic_error("orbit pose does not match its generating element");
    cfg.assignment[static_cast<size_t>(e)] = match.index;
    cfg.poses.push_back(p);
  }
}

} // namespace

Mat3 CameraPose::world_rotation() const {
  Vec3 backward = -optical_axis;
  Vec3 right = cross(up, backward);
  Mat3 m;
  m(0, 0) = right.x; m(0, 1) = up.x; m(0, 2) = backward.x;
  m(1, 0) = right.y; m(1, 1) = up.y; m(1, 2) = backward.y;
  m(2, 0) = right.z; m(2, 1) = up.z; m(2, 2) = backward.z;
  return m;
}

CameraPose rotated_pose(const CameraPose& p, const Mat3& m) {
  CameraPose out;
  out.position = m * p.position;
  out.optical_axis = m * p.optical_axis;
  out.up = m * p.up;
  return out;
}

std::string to_string(ConfigKind k) {
  switch (k) {
    case ConfigKind::V12x5: return "12x5";
    case ConfigKind::V20x3: return "20x3";
    case ConfigKind::V60x1: return "60x1";
    case ConfigKind::Aligned12: return "a12";
    case ConfigKind::Aligned20: return "a20";
    case ConfigKind::CyclicPanorama: return "pano";
  }
  return "?";
}

ConfigKind parse_config_kind(const std::string& s) {
  if (s == "12x5") return ConfigKind::V12x5;
  if (s == "20x3") return ConfigKind::V20x3;
  if (s == "60x1") return ConfigKind::V60x1;
  if (s == "a12" || s == "aligned12") return ConfigKind::Aligned12;
  if (s == "a20" || s == "aligned20") return ConfigKind::Aligned20;
  if (s == "pano" || s == "panorama") return ConfigKind::CyclicPanorama;
  throw std::invalid_argument("unknown view configuration kind: " + s);
}

CameraConfig gen_config(ConfigKind kind, double radius, int panorama_k) {
  if (radius <= 0) throw std::invalid_argument("gen_config: radius must be positive");
  CameraConfig cfg;
  cfg.kind = kind;
  cfg.radius = radius;

  if (kind == ConfigKind::CyclicPanorama) {
    if (panorama_k < 1) throw std::invalid_argument("gen_config: panorama needs k >= 1");
    cfg.panorama_k = panorama_k;
    auto g = std::make_shared<FiniteGroup>(build_group(GroupSpec{GroupSpec::Kind::Cyclic, panorama_k}));
    cfg.group = g;
    cfg.space = std::make_shared<HSpace>(build_hspace(*g, HSpaceKind::Group));
    // Equatorial ring: reference on +x looking inward, up at the pole.
    fill_orbit(cfg, pose_at({1, 0, 0}, {0, 0, 1}, radius));
    return cfg;
  }

  auto g = std::make_shared<FiniteGroup>(build_group("ico"));
  cfg.group = g;

  switch (kind) {
    case ConfigKind::V12x5:
      cfg.space = std::make_shared<HSpace>(build_hspace(*g, HSpaceKind::Group));
      fill_orbit(cfg, pose_at(icosahedron_vertices()[0], default_up(icosahedron_vertices()[0]), radius));
      break;
    case ConfigKind::V20x3:
      cfg.space = std::make_shared<HSpace>(build_hspace(*g, HSpaceKind::Group));
      fill_orbit(cfg, pose_at(icosahedron_face_centers()[0], default_up(icosahedron_face_centers()[0]), radius));
      break;
    case ConfigKind::V60x1: {
      cfg.space = std::make_shared<HSpace>(build_hspace(*g, HSpaceKind::Group));
      Vec3 t = reference_trisection();
      fill_orbit(cfg, pose_at(t, default_up(t), radius));
      break;
    }
    case ConfigKind::Aligned12:
    case ConfigKind::Aligned20: {
      cfg.space = std::make_shared<HSpace>(build_hspace(
          *g, kind == ConfigKind::Aligned12 ? HSpaceKind::Vertices12 : HSpaceKind::Faces20));
      const std::vector<Vec3>& pts = cfg.space->points;
      for (size_t x = 0; x < pts.size(); ++x) {
        cfg.poses.push_back(pose_at(pts[x], default_up(pts[x]), radius));
        cfg.assignment.push_back(static_cast<int>(x));
      }
      break;
    }
    default:
      throw std::logic_error("unreachable");
  }
  return cfg;
}

std::vector<int> permutation_under_rotation(const CameraConfig& cfg, int k) {
  if (!cfg.grouped())
    throw std::invalid_argument("permutation_under_rotation: grouped configurations only");
  const FiniteGroup& g = *cfg.group;
  if (k < 0 || k >= g.order) throw std::invalid_argument("element index out of range");
  const Mat3& mk = g.elements[static_cast<size_t>(k)].m;

  const int n = cfg.n_views();
  std::vector<int> pi(static_cast<size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    Mat3 target = rotated_pose(cfg.poses[static_cast<size_t>(i)], mk).world_rotation();
    int best = -1;
    double best_d = 1e300;
    for (int j = 0; j < n; ++j) {
      double d = frobenius_distance(cfg.poses[static_cast<size_t>(j)].world_rotation(), target);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best_d > 1e-6)
      throw std::runtime_error("view configuration is not closed under this rotation (residual " +
                               std::to_string(best_d) + ")");
    pi[static_cast<size_t>(i)] = best;
  }

  // Cross-check against the algebraic prediction assignment^-1 (k .) assignment.
  std::vector<int> inv_assign(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) inv_assign[static_cast<size_t>(cfg.assignment[static_cast<size_t>(i)])] = i;
  for (int i = 0; i < n; ++i) {
    int predicted = inv_assign[static_cast<size_t>(g.at(k, cfg.assignment[static_cast<size_t>(i)]))];
    if (predicted != pi[static_cast<size_t>(i)])
      throw std::runtime_error("geometric pose matching disagrees with the Cayley prediction");
  }
  return pi;
}

std::vector<InPlaneFamily> in_plane_families(const CameraConfig& cfg) {
  if (cfg.kind != ConfigKind::V12x5 && cfg.kind != ConfigKind::V20x3)
    throw std::invalid_argument("in_plane_families: defined for 12x5 and 20x3 only");
  const FiniteGroup& g = *cfg.group;
  auto viewpoints = cfg.kind == ConfigKind::V12x5
                        ? build_hspace(g, HSpaceKind::Vertices12).points
                        : build_hspace(g, HSpaceKind::Faces20).points;

  std::vector<InPlaneFamily> families(viewpoints.size());
  for (size_t x = 0; x < viewpoints.size(); ++x) families[x].viewpoint = static_cast<int>(x);
  for (int i = 0; i < cfg.n_views(); ++i) {
    Vec3 dir = normalized(cfg.poses[static_cast<size_t>(i)].position);
    int vp = -1;
    for (size_t x = 0; x < viewpoints.size(); ++x)
      if (dot(dir, viewpoints[x]) > 1.0 - 1e-9) {
        vp = static_cast<int>(x);
        break;
      }
    if (vp < 0) throw std::logic_error("pose position is not a configured viewpoint");
    families[static_cast<size_t>(vp)].poses.push_back(i);
  }

  // Order each family by in-plane angle so consecutive poses differ by one
  // stabilizer step.
  for (InPlaneFamily& fam : families) {
    const CameraPose& first = cfg.poses[static_cast<size_t>(fam.poses[0])];
    Vec3 axis = normalized(first.position);
    Vec3 u0 = first.up;
    auto angle_of = [&](int idx) {
      const Vec3& u = cfg.poses[static_cast<size_t>(idx)].up;
      double a = std::atan2(dot(axis, cross(u0, u)), dot(u0, u));
      return a < -1e-12 ? a + 2 * kPi : a;
    };
    std::sort(fam.poses.begin(), fam.poses.end(),
              [&](int a, int b) { return angle_of(a) < angle_of(b); });
  }
  return families;
}

} // namespace finrot
