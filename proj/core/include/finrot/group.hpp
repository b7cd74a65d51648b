#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "finrot/rotation.hpp"

namespace finrot {

// A finite subgroup of SO(3) with a fully tabulated composition law.
//
// Invariants:
//   - elements[0] is the identity
//   - cayley is a Latin square with cayley(0, i) = cayley(i, 0) = i
//   - inverse[inverse[i]] = i and cayley(i, inverse[i]) = 0
//   - ||Mi * Mj - M_cayley(i,j)||_F < 1e-9 for all pairs
//
// Element order: Cyclic(k) lists rotations about +z by 2*pi*i/k in index
// order, so table composition is addition mod k. Dihedral(k) lists the k
// rotations first, then the k in-plane flips about axes at angle pi*i/k from
// +x. The polyhedral groups are generated by closure and sorted by
// (rotation angle asc, axis z desc, axis y desc, axis x desc), identity first.
struct FiniteGroup {
  std::string name;
  int order = 0;
  std::vector<Rotation> elements;
  std::vector<int> cayley; // row-major, order x order
  std::vector<int> inverse;

  int at(int i, int j) const { return cayley[static_cast<size_t>(i) * order + j]; }
};

struct GroupSpec {
  enum class Kind { Cyclic, Dihedral, Tetrahedral, Octahedral, Icosahedral };
  Kind kind = Kind::Cyclic;
  int k = 1; // fold count, Cyclic/Dihedral only
};

// Accepted names: "c<k>", "cyclic<k>", "d<k>", "dihedral<k>", "tet", "oct",
// "ico". Throws std::invalid_argument on unknown names or k < 1.
GroupSpec parse_group_name(const std::string& name);

FiniteGroup build_group(const GroupSpec& spec);
FiniteGroup build_group(const std::string& name);

inline int compose(const FiniteGroup& g, int i, int j) { return g.at(i, j); }

struct NearestElement {
  int index = -1;
  double residual = 0; // Frobenius distance to the best match
  bool exact = false;  // residual < tol
};
NearestElement nearest_element(const FiniteGroup& g, const Rotation& r, double tol = 1e-6);

struct ClosureResult {
  std::vector<int> indices; // sorted element indices of the generated subgroup
  int rounds = 0;           // BFS expansion rounds until fixpoint, 0 if seed already closed
};
// Subgroup generated by the seed indices. |result| divides |G| (Lagrange),
// asserted internally.
ClosureResult generated_closure(const FiniteGroup& g, std::span<const int> seed);

// Exact integer product set S * S * ... * S (depth factors). With the
// identity in S this is the receptive field of `depth` stacked localized
// layers with support S.
std::vector<int> product_set(const FiniteGroup& g, std::span<const int> support, int depth);

// Non-identity elements as (index, angle), sorted by angle then index.
std::vector<std::pair<int, double>> smallest_rotations(const FiniteGroup& g);

bool is_abelian(const FiniteGroup& g);

// Re-checks every structural axiom (identity row/column, Latin square,
// inverses, exhaustive associativity, matrix-table consistency, unit
// canonical quaternions). Returns human-readable descriptions of every
// violated axiom, empty when the group is sound.
std::vector<std::string> verify_group(const FiniteGroup& g);

// Stable fingerprint of the element list (name, order, quaternion bits).
// Used to cross-reference files derived from a group.
std::uint64_t group_hash(const FiniteGroup& g);

} // namespace finrot
