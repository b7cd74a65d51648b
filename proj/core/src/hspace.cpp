#include "finrot/hspace.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "finrot/platonic.hpp"

namespace finrot {

namespace {

// Generic direction used to realize X = G as a point orbit. Not on any
// rotation axis of the supported groups; freeness is asserted at build time.
const Vec3 kGenericPoint = normalized({0.271828, 0.577215, 0.814159});

std::vector<int> action_table_from_geometry(const FiniteGroup& g, const std::vector<Vec3>& pts) {
  const int nx = static_cast<int>(pts.size());
  std::vector<int> action(static_cast<size_t>(g.order) * nx, -1);
  for (int e = 0; e < g.order; ++e)
    for (int x = 0; x < nx; ++x) {
      Vec3 moved = g.elements[e].m * pts[x];
      int best = -1;
      double best_d = 1e30;
      for (int y = 0; y < nx; ++y) {
        double d = norm(moved - pts[y]);
        if (d < best_d) {
          best_d = d;
          best = y;
        }
      }
      if (best_d > 1e-9) throw std::logic_error("group does not permute the point set");
      action[static_cast<size_t>(e) * nx + x] = best;
    }
  return action;
}

} // namespace

std::string to_string(HSpaceKind k) {
  switch (k) {
    case HSpaceKind::Vertices12: return "v12";
    case HSpaceKind::Faces20: return "f20";
    case HSpaceKind::Group: return "group";
  }
  return {};
}

HSpaceKind parse_hspace_kind(const std::string& s) {
  if (s == "v12" || s == "vertices12") return HSpaceKind::Vertices12;
  if (s == "f20" || s == "faces20") return HSpaceKind::Faces20;
  if (s == "group") return HSpaceKind::Group;
  throw std::invalid_argument("unknown hspace kind: " + s);
}

HSpace build_hspace(const FiniteGroup& g, HSpaceKind kind) {
  HSpace h;
  h.group = &g;
  h.kind = kind;
  h.eta = 0;

  switch (kind) {
    case HSpaceKind::Vertices12:
    case HSpaceKind::Faces20: {
      if (g.order != 60)
        throw std::invalid_argument("vertex/face spaces require the icosahedral group");
      h.points = kind == HSpaceKind::Vertices12 ? icosahedron_vertices() : icosahedron_face_centers();
      h.action = action_table_from_geometry(g, h.points);
      break;
    }
    case HSpaceKind::Group: {
      h.points.reserve(g.order);
      for (const auto& e : g.elements) h.points.push_back(e.m * kGenericPoint);
      for (int i = 0; i < g.order; ++i)
        for (int j = i + 1; j < g.order; ++j)
          if (norm(h.points[i] - h.points[j]) < 1e-6)
            throw std::logic_error("base point orbit is not free");
      h.action.resize(static_cast<size_t>(g.order) * g.order);
      for (int e = 0; e < g.order; ++e)
        for (int x = 0; x < g.order; ++x) h.action[static_cast<size_t>(e) * g.order + x] = g.at(e, x);
      break;
    }
  }

  h.stabilizer_order = g.order / h.size();
  if (h.stabilizer_order * h.size() != g.order)
    throw std::logic_error("orbit size does not divide group order");
  return h;
}

std::vector<int> stabilizer(const HSpace& h, int x) {
  if (x < 0 || x >= h.size()) throw std::invalid_argument("stabilizer: point index out of range");
  std::vector<int> fix;
  for (int e = 0; e < h.group->order; ++e)
    if (h.act(e, x) == x) fix.push_back(e);
  // A fixed-point set of a group action is automatically closed; assert it.
  auto cl = generated_closure(*h.group, fix);
  if (cl.indices != fix || static_cast<int>(fix.size()) != h.stabilizer_order)
    throw std::logic_error("stabilizer is not a subgroup of the expected order");
  return fix;
}

} // namespace finrot
