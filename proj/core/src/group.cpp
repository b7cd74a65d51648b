#include "finrot/group.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <numbers>
#include <set>
#include <stdexcept>

#include "finrot/platonic.hpp"

namespace finrot {

namespace {

constexpr double kPi = std::numbers::pi;

// Dedup tolerance for closure generation; distinct elements of the groups
// handled here are separated by Frobenius distance > 0.5.
constexpr double kMatchTol = 1e-6;

int find_element(const std::vector<Rotation>& els, const Mat3& m, double tol = kMatchTol) {
  for (size_t i = 0; i < els.size(); ++i)
    if (frobenius_distance(els[i].m, m) < tol) return static_cast<int>(i);
  return -1;
}

std::vector<Rotation> closure_from(const std::vector<Rotation>& gens) {
  std::vector<Rotation> els{Rotation::identity()};
  std::vector<Rotation> frontier = els;
  while (!frontier.empty()) {
    std::vector<Rotation> next;
    for (const auto& f : frontier)
      for (const auto& g : gens) {
        Rotation p = g * f;
        if (find_element(els, p.m) < 0) {
          els.push_back(p);
          next.push_back(p);
        }
      }
    frontier = std::move(next);
    if (els.size() > 60) throw std::logic_error("group closure exceeded order 60");
  }
  return els;
}

// Canonical element order for the polyhedral groups: angle ascending, then
// rotation axis (z, y, x) descending. Keys quantized at 1e-9; distinct
// elements differ by far more than that in angle or axis.
void canonical_sort(std::vector<Rotation>& els) {
  auto q = [](double v) { return std::llround(v * 1e9); };
  std::sort(els.begin(), els.end(), [&](const Rotation& a, const Rotation& b) {
    if (q(a.angle()) != q(b.angle())) return q(a.angle()) < q(b.angle());
    Vec3 aa = a.axis(), ab = b.axis();
    if (q(aa.z) != q(ab.z)) return q(aa.z) > q(ab.z);
    if (q(aa.y) != q(ab.y)) return q(aa.y) > q(ab.y);
    return q(aa.x) > q(ab.x);
  });
}

std::vector<Rotation> make_elements(const GroupSpec& spec) {
  using Kind = GroupSpec::Kind;
  switch (spec.kind) {
    case Kind::Cyclic: {
      std::vector<Rotation> els;
      for (int i = 0; i < spec.k; ++i)
        els.push_back(Rotation::axis_angle({0, 0, 1}, 2 * kPi * i / spec.k));
      return els;
    }
    case Kind::Dihedral: {
      std::vector<Rotation> els;
      for (int i = 0; i < spec.k; ++i)
        els.push_back(Rotation::axis_angle({0, 0, 1}, 2 * kPi * i / spec.k));
      for (int i = 0; i < spec.k; ++i) {
        double a = kPi * i / spec.k;
        els.push_back(Rotation::axis_angle({std::cos(a), std::sin(a), 0}, kPi));
      }
      return els;
    }
    case Kind::Tetrahedral: {
      double s = 1.0 / std::sqrt(3.0);
      auto els = closure_from({Rotation::axis_angle({s, s, s}, 2 * kPi / 3),
                               Rotation::axis_angle({0, 0, 1}, kPi)});
      canonical_sort(els);
      return els;
    }
    case Kind::Octahedral: {
      auto els = closure_from({Rotation::axis_angle({0, 0, 1}, kPi / 2),
                               Rotation::axis_angle({1, 0, 0}, kPi / 2)});
      canonical_sort(els);
      return els;
    }
    case Kind::Icosahedral: {
      // 72 deg about the vertex axis on +z and 120 deg about an adjacent
      // face axis generate the full rotation group of the icosahedron.
      auto fc = icosahedron_face_centers();
      auto els = closure_from({Rotation::axis_angle({0, 0, 1}, 2 * kPi / 5),
                               Rotation::axis_angle(fc[0], 2 * kPi / 3)});
      canonical_sort(els);
      return els;
    }
  }
  throw std::logic_error("unreachable");
}

int expected_order(const GroupSpec& spec) {
  using Kind = GroupSpec::Kind;
  switch (spec.kind) {
    case Kind::Cyclic: return spec.k;
    case Kind::Dihedral: return 2 * spec.k;
    case Kind::Tetrahedral: return 12;
    case Kind::Octahedral: return 24;
    case Kind::Icosahedral: return 60;
  }
  return 0;
}

std::string canonical_name(const GroupSpec& spec) {
  using Kind = GroupSpec::Kind;
  switch (spec.kind) {
    case Kind::Cyclic: return "c" + std::to_string(spec.k);
    case Kind::Dihedral: return "d" + std::to_string(spec.k);
    case Kind::Tetrahedral: return "tet";
    case Kind::Octahedral: return "oct";
    case Kind::Icosahedral: return "ico";
  }
  return {};
}

} // namespace

GroupSpec parse_group_name(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "tet" || s == "tetrahedral") return {GroupSpec::Kind::Tetrahedral, 0};
  if (s == "oct" || s == "octahedral") return {GroupSpec::Kind::Octahedral, 0};
  if (s == "ico" || s == "icosahedral") return {GroupSpec::Kind::Icosahedral, 0};
  auto parse_k = [&](size_t prefix_len) {
    std::string digits = s.substr(prefix_len);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      throw std::invalid_argument("unknown group name: " + name);
    int k = std::stoi(digits);
    if (k < 1) throw std::invalid_argument("group fold count must be >= 1: " + name);
    return k;
  };
  if (s.rfind("cyclic", 0) == 0) return {GroupSpec::Kind::Cyclic, parse_k(6)};
  if (s.rfind("dihedral", 0) == 0) return {GroupSpec::Kind::Dihedral, parse_k(8)};
  if (!s.empty() && s[0] == 'c') return {GroupSpec::Kind::Cyclic, parse_k(1)};
  if (!s.empty() && s[0] == 'd') return {GroupSpec::Kind::Dihedral, parse_k(1)};
  throw std::invalid_argument("unknown group name: " + name);
}

FiniteGroup build_group(const GroupSpec& spec) {
  if ((spec.kind == GroupSpec::Kind::Cyclic || spec.kind == GroupSpec::Kind::Dihedral) && spec.k < 1)
    throw std::invalid_argument("group fold count must be >= 1");

  FiniteGroup g;
  g.name = canonical_name(spec);
  g.elements = make_elements(spec);
  g.order = static_cast<int>(g.elements.size());
  if (g.order != expected_order(spec)) throw std::logic_error("group closure produced wrong order");

  g.cayley.assign(static_cast<size_t>(g.order) * g.order, -1);
  for (int i = 0; i < g.order; ++i)
    for (int j = 0; j < g.order; ++j) {
      Mat3 p = g.elements[i].m * g.elements[j].m;
      int best = -1;
      double best_d = 1e30, second_d = 1e30;
      for (int k = 0; k < g.order; ++k) {
        double d = frobenius_distance(g.elements[k].m, p);
        if (d < best_d) {
          second_d = best_d;
          best_d = d;
          best = k;
        } else if (d < second_d) {
          second_d = d;
        }
      }
      // The product of two table elements must itself be a table element,
      // unambiguously: anything else means the element set is not closed.
      if (best_d > 1e-9 || (g.order > 1 && second_d < 0.1))
        throw std::logic_error("group not closed under composition");
      g.cayley[static_cast<size_t>(i) * g.order + j] = best;
    }

  g.inverse.assign(g.order, -1);
  for (int i = 0; i < g.order; ++i)
    for (int j = 0; j < g.order; ++j)
      if (g.at(i, j) == 0) {
        g.inverse[i] = j;
        break;
      }
  return g;
}

FiniteGroup build_group(const std::string& name) { return build_group(parse_group_name(name)); }

NearestElement nearest_element(const FiniteGroup& g, const Rotation& r, double tol) {
  NearestElement out;
  out.residual = 1e30;
  for (int i = 0; i < g.order; ++i) {
    double d = frobenius_distance(g.elements[i].m, r.m);
    if (d < out.residual) {
      out.residual = d;
      out.index = i;
    }
  }
  out.exact = out.residual < tol;
  return out;
}

ClosureResult generated_closure(const FiniteGroup& g, std::span<const int> seed) {
  for (int s : seed)
    if (s < 0 || s >= g.order) throw std::invalid_argument("closure seed index out of range");
  std::set<int> members{0};
  members.insert(seed.begin(), seed.end());
  std::vector<int> gens(members.begin(), members.end());
  ClosureResult res;
  while (true) {
    std::set<int> next = members;
    for (int a : members)
      for (int b : gens) next.insert(g.at(a, b));
    if (next == members) break;
    members = std::move(next);
    ++res.rounds;
  }
  res.indices.assign(members.begin(), members.end());
  if (g.order % static_cast<int>(res.indices.size()) != 0)
    throw std::logic_error("closure size does not divide group order");
  return res;
}

std::vector<int> product_set(const FiniteGroup& g, std::span<const int> support, int depth) {
  for (int s : support)
    if (s < 0 || s >= g.order) throw std::invalid_argument("support index out of range");
  if (depth < 1) throw std::invalid_argument("product depth must be >= 1");
  std::set<int> cur(support.begin(), support.end());
  for (int d = 1; d < depth; ++d) {
    std::set<int> next;
    for (int a : cur)
      for (int b : support) next.insert(g.at(a, b));
    cur = std::move(next);
  }
  return {cur.begin(), cur.end()};
}

std::vector<std::pair<int, double>> smallest_rotations(const FiniteGroup& g) {
  std::vector<std::pair<int, double>> out;
  for (int i = 1; i < g.order; ++i) out.emplace_back(i, g.elements[i].angle());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  return out;
}

bool is_abelian(const FiniteGroup& g) {
  for (int i = 0; i < g.order; ++i)
    for (int j = i + 1; j < g.order; ++j)
      if (g.at(i, j) != g.at(j, i)) return false;
  return true;
}

std::vector<std::string> verify_group(const FiniteGroup& g) {
  std::vector<std::string> bad;
  const int n = g.order;
  if (n < 1 || static_cast<int>(g.elements.size()) != n ||
      g.cayley.size() != static_cast<size_t>(n) * n || static_cast<int>(g.inverse.size()) != n) {
    bad.push_back("shape: order/elements/cayley/inverse sizes disagree");
    return bad;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (g.at(i, j) < 0 || g.at(i, j) >= n) {
        bad.push_back("table: entry out of range");
        return bad;
      }

  if (frobenius_distance(g.elements[0].m, Mat3{}) > 1e-9)
    bad.push_back("identity: element 0 is not the identity rotation");
  for (int i = 0; i < n && bad.empty(); ++i)
    if (g.at(0, i) != i || g.at(i, 0) != i) bad.push_back("identity: row/column 0 not neutral");

  for (int i = 0; i < n; ++i) {
    std::vector<bool> row(n, false), col(n, false);
    for (int j = 0; j < n; ++j) {
      row[g.at(i, j)] = true;
      col[g.at(j, i)] = true;
    }
    if (std::count(row.begin(), row.end(), true) != n ||
        std::count(col.begin(), col.end(), true) != n) {
      bad.push_back("latin-square: duplicated entry in row or column " + std::to_string(i));
      break;
    }
  }

  for (int i = 0; i < n; ++i) {
    if (g.inverse[g.inverse[i]] != i || g.at(i, g.inverse[i]) != 0 || g.at(g.inverse[i], i) != 0) {
      bad.push_back("inverse: table inconsistent at element " + std::to_string(i));
      break;
    }
  }

  bool assoc_ok = true;
  for (int i = 0; i < n && assoc_ok; ++i)
    for (int j = 0; j < n && assoc_ok; ++j)
      for (int k = 0; k < n; ++k)
        if (g.at(g.at(i, j), k) != g.at(i, g.at(j, k))) {
          bad.push_back("associativity: failed at (" + std::to_string(i) + "," + std::to_string(j) +
                        "," + std::to_string(k) + ")");
          assoc_ok = false;
          break;
        }

  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      worst = std::max(worst,
                       frobenius_distance(g.elements[i].m * g.elements[j].m, g.elements[g.at(i, j)].m));
  if (worst > 1e-9) bad.push_back("matrix-consistency: worst product residual exceeds 1e-9");

  for (int i = 0; i < n; ++i) {
    const Quat& q = g.elements[i].q;
    double nq = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
    Quat c = canonicalized(q);
    if (std::abs(nq - 1.0) > 1e-12 || c.w != q.w || c.x != q.x || c.y != q.y || c.z != q.z) {
      bad.push_back("quaternion: element " + std::to_string(i) + " not unit canonical");
      break;
    }
    if (orthogonality_error(g.elements[i].m) > 1e-12 ||
        frobenius_distance(g.elements[i].m, quat_to_matrix(q)) > 1e-10) {
      bad.push_back("rotation: element " + std::to_string(i) + " matrix/quaternion mismatch");
      break;
    }
  }
  return bad;
}

std::uint64_t group_hash(const FiniteGroup& g) {
  // FNV-1a over the name, order, and raw quaternion bits.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* p, size_t len) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(g.name.data(), g.name.size());
  mix(&g.order, sizeof(g.order));
  for (const auto& e : g.elements) {
    double q[4] = {e.q.w, e.q.x, e.q.y, e.q.z};
    mix(q, sizeof(q));
  }
  return h;
}

} // namespace finrot
