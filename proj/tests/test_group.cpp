#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <finrot/group.hpp>
#include <finrot/rng.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

using namespace finrot;

TEST_CASE("cyclic composition is addition mod k") {
  const FiniteGroup g = build_group("c12");
  REQUIRE(g.order == 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) CHECK(compose(g, i, j) == (i + j) % 12);
  CHECK(compose(g, 3, 5) == 8);
}

TEST_CASE("accepted names and failure modes of the parser") {
  CHECK(parse_group_name("c1").kind == GroupSpec::Kind::Cyclic);
  CHECK(parse_group_name("cyclic7").k == 7);
  CHECK(parse_group_name("d4").kind == GroupSpec::Kind::Dihedral);
  CHECK(parse_group_name("dihedral3").k == 3);
  CHECK(parse_group_name("tet").kind == GroupSpec::Kind::Tetrahedral);
  CHECK(parse_group_name("oct").kind == GroupSpec::Kind::Octahedral);
  CHECK(parse_group_name("ico").kind == GroupSpec::Kind::Icosahedral);
  CHECK_THROWS_AS(parse_group_name("frob"), std::invalid_argument);
  CHECK_THROWS_AS(parse_group_name("c0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_group_name(""), std::invalid_argument);
}

TEST_CASE("polyhedral group orders") {
  CHECK(build_group("tet").order == 12);
  CHECK(build_group("oct").order == 24);
  CHECK(build_group("ico").order == 60);
  CHECK(build_group("d6").order == 12);
}

TEST_CASE("every built group passes verify_group") {
  for (const char* name : {"c1", "c5", "d3", "d8", "tet", "oct", "ico"}) {
    const FiniteGroup g = build_group(name);
    const std::vector<std::string> bad = verify_group(g);
    for (const std::string& msg : bad) MESSAGE(name, ": ", msg);
    CHECK(bad.empty());
  }
}

TEST_CASE("verify_group names the violated axiom") {
  FiniteGroup g = build_group("d4");
  SUBCASE("corrupted cayley row breaks the latin square") {
    g.cayley[size_t(3) * size_t(g.order) + 2] = g.cayley[size_t(3) * size_t(g.order) + 1];
    const auto bad = verify_group(g);
    REQUIRE(!bad.empty());
    bool mentions = false;
    for (const auto& m : bad)
      if (m.find("latin") != std::string::npos || m.find("assoc") != std::string::npos ||
          m.find("matrix") != std::string::npos)
        mentions = true;
    CHECK(mentions);
  }
  SUBCASE("corrupted inverse table") {
    g.inverse[1] = 1 == g.inverse[1] ? 2 : 1;
    CHECK(!verify_group(g).empty());
  }
  SUBCASE("perturbed element matrix") {
    g.elements[2].m(0, 0) += 1e-3;
    CHECK(!verify_group(g).empty());
  }
}

// The octahedral group acting on coordinates is exactly the 24 signed
// permutation matrices with determinant +1. Enumerate those directly and
// match them against the built group one-to-one.
TEST_CASE("octahedral group equals the even signed permutations") {
  const FiniteGroup g = build_group("oct");
  std::vector<Mat3> expected;
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& p : perms)
    for (int signs = 0; signs < 8; ++signs) {
      Mat3 m;
      for (double& v : m.m) v = 0;
      for (int r = 0; r < 3; ++r) m(r, p[r]) = (signs >> r) & 1 ? -1.0 : 1.0;
      if (std::fabs(det(m) - 1.0) < 1e-12) expected.push_back(m);
    }
  REQUIRE(expected.size() == 24);
  std::vector<bool> used(24, false);
  for (const Rotation& e : g.elements) {
    bool found = false;
    for (size_t i = 0; i < expected.size(); ++i) {
      if (!used[i] && frobenius_distance(e.m, expected[i]) < 1e-9) {
        used[i] = true;
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("dihedral layout: k rotations then k flips") {
  const int k = 5;
  const FiniteGroup g = build_group("d5");
  for (int i = 0; i < k; ++i) {
    const double theta = 2 * M_PI * i / k;
    CHECK(g.elements[size_t(i)].angle() ==
          doctest::Approx(std::min(theta, 2 * M_PI - theta)).epsilon(1e-9));
    // rotations keep +z fixed
    const Vec3 z = g.elements[size_t(i)].m * Vec3{0, 0, 1};
    CHECK(z.z == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int i = k; i < 2 * k; ++i) {
    // flips are half-turns that invert +z
    CHECK(g.elements[size_t(i)].angle() == doctest::Approx(M_PI).epsilon(1e-12));
    const Vec3 z = g.elements[size_t(i)].m * Vec3{0, 0, 1};
    CHECK(z.z == doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("closure of a seed is the generated subgroup") {
  const FiniteGroup g = build_group("ico");
  SUBCASE("identity alone is already closed") {
    const std::array<int, 1> seed{0};
    const ClosureResult c = generated_closure(g, seed);
    CHECK(c.indices == std::vector<int>{0});
    CHECK(c.rounds == 0);
  }
  SUBCASE("one 72-degree rotation generates its cyclic subgroup of order 5") {
    int five = -1;
    for (int i = 1; i < g.order; ++i)
      if (std::fabs(g.elements[size_t(i)].angle() - 2 * M_PI / 5) < 1e-9) {
        five = i;
        break;
      }
    REQUIRE(five > 0);
    const std::array<int, 1> seed{five};
    const ClosureResult c = generated_closure(g, seed);
    CHECK(c.indices.size() == 5);
    // brute-force the same subgroup by repeated multiplication
    std::set<int> brute{0};
    int cur = five;
    while (!brute.count(cur)) {
      brute.insert(cur);
      cur = compose(g, cur, five);
    }
    CHECK(std::vector<int>(brute.begin(), brute.end()) == c.indices);
  }
  SUBCASE("subgroup order divides the group order") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      std::array<int, 2> seed{rng.uniform_int(0, g.order - 1), rng.uniform_int(0, g.order - 1)};
      const ClosureResult c = generated_closure(g, seed);
      CHECK(g.order % int(c.indices.size()) == 0);
    }
  }
}

TEST_CASE("product_set grows as BFS balls around the support") {
  const FiniteGroup g = build_group("oct");
  // support: identity plus one 90-degree rotation and its inverse
  const auto small = smallest_rotations(g);
  const int a = small[0].first;
  const std::array<int, 3> s{0, a, g.inverse[size_t(a)]};
  std::vector<int> prev = product_set(g, s, 1);
  CHECK(prev.size() == 3);
  for (int d = 2; d <= 8; ++d) {
    std::vector<int> cur = product_set(g, s, d);
    CHECK(cur.size() >= prev.size());
    CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    prev = std::move(cur);
  }
  // the cyclic subgroup generated by a has order 4; products of its members
  // stay inside it at any depth
  const std::array<int, 2> cyc{0, a};
  const std::vector<int> deep = product_set(g, cyc, 12);
  CHECK(deep.size() == 4);
}

TEST_CASE("smallest_rotations on the octahedral group starts with six quarter turns") {
  const FiniteGroup g = build_group("oct");
  const auto sorted = smallest_rotations(g);
  REQUIRE(sorted.size() == 23); // non-identity elements
  for (int i = 0; i < 6; ++i)
    CHECK(sorted[size_t(i)].second == doctest::Approx(M_PI / 2).epsilon(1e-12));
  CHECK(sorted[6].second > M_PI / 2 + 1e-9);
  CHECK(std::is_sorted(sorted.begin(), sorted.end(),
                       [](const auto& x, const auto& y) { return x.second < y.second; }));
}

TEST_CASE("conjugation preserves the rotation angle") {
  const FiniteGroup g = build_group("ico");
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int a = rng.uniform_int(0, g.order - 1);
    const int h = rng.uniform_int(0, g.order - 1);
    const int conj = compose(g, compose(g, h, a), g.inverse[size_t(h)]);
    CHECK(std::fabs(g.elements[size_t(conj)].angle() - g.elements[size_t(a)].angle()) < 1e-9);
  }
}

TEST_CASE("nearest_element is exact on members and tolerant nearby") {
  const FiniteGroup g = build_group("ico");
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int i = rng.uniform_int(0, g.order - 1);
    const NearestElement hit = nearest_element(g, g.elements[size_t(i)]);
    CHECK(hit.index == i);
    CHECK(hit.exact);
    CHECK(hit.residual < 1e-12);

    // a small perturbation keeps the same nearest element but loses exactness
    const Rotation wiggle = Rotation::axis_angle(normalized({1, 2, 3}), 1e-4);
    const NearestElement near = nearest_element(g, wiggle * g.elements[size_t(i)]);
    CHECK(near.index == i);
    CHECK(!near.exact);
  }
}

TEST_CASE("is_abelian distinguishes the families") {
  CHECK(is_abelian(build_group("c9")));
  CHECK(is_abelian(build_group("d1")));
  CHECK(!is_abelian(build_group("d3")));
  CHECK(!is_abelian(build_group("tet")));
  CHECK(!is_abelian(build_group("ico")));
}

TEST_CASE("group_hash separates groups and is stable across rebuilds") {
  const std::uint64_t h1 = group_hash(build_group("ico"));
  const std::uint64_t h2 = group_hash(build_group("ico"));
  CHECK(h1 == h2);
  CHECK(h1 != group_hash(build_group("oct")));
  CHECK(group_hash(build_group("c4")) != group_hash(build_group("c5")));
}

TEST_CASE("identity is element zero with identity row and column") {
  for (const char* name : {"c3", "d4", "tet"}) {
    const FiniteGroup g = build_group(name);
    CHECK(g.elements[0].angle() == 0.0);
    for (int i = 0; i < g.order; ++i) {
      CHECK(compose(g, 0, i) == i);
      CHECK(compose(g, i, 0) == i);
      CHECK(compose(g, i, g.inverse[size_t(i)]) == 0);
    }
  }
}
