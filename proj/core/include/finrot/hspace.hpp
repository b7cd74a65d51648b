#pragma once

#include <string>
#include <vector>

#include "finrot/group.hpp"

namespace finrot {

enum class HSpaceKind { Vertices12, Faces20, Group };

std::string to_string(HSpaceKind k);
HSpaceKind parse_hspace_kind(const std::string& s); // "v12", "f20", "group"

// A homogeneous space of a finite rotation group: a point set X on the unit
// sphere together with the tabulated action of every group element.
//
// Invariants:
//   - action(g, .) is a permutation of X for every g
//   - homomorphism: action(g1, action(g2, x)) = action(g1*g2, x)
//   - geometry: ||Mg * points[x] - points[action(g, x)]|| < 1e-9
//   - transitive: every point is reachable from eta
//   - |stabilizer| * |X| = |G|
//
// Vertices12 and Faces20 are the icosahedron vertex and face-center spaces
// (icosahedral group only). Group is X = G itself under left multiplication,
// realized geometrically as the free orbit of a generic base point.
struct HSpace {
  const FiniteGroup* group = nullptr;
  HSpaceKind kind = HSpaceKind::Group;
  std::vector<Vec3> points;
  std::vector<int> action; // row-major, |G| x |X|
  int eta = 0;             // canonical base point index
  int stabilizer_order = 1;

  int size() const { return static_cast<int>(points.size()); }
  int act(int g, int x) const { return action[static_cast<size_t>(g) * points.size() + x]; }
};

HSpace build_hspace(const FiniteGroup& g, HSpaceKind kind);

inline int act(const HSpace& h, int g, int x) { return h.act(g, x); }

// Elements fixing points[x]; verified to be a subgroup of the stated order.
std::vector<int> stabilizer(const HSpace& h, int x);

} // namespace finrot
