#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <finrot/group.hpp>
#include <finrot/hspace.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

using namespace finrot;

namespace {

// shared across cases; building ico takes a moment
const FiniteGroup& ico() {
  static const FiniteGroup g = build_group("ico");
  return g;
}

void check_space_axioms(const HSpace& h) {
  const FiniteGroup& g = *h.group;
  const int nx = h.size();

  // every action row is a permutation
  for (int k = 0; k < g.order; ++k) {
    std::vector<bool> seen(size_t(nx), false);
    for (int x = 0; x < nx; ++x) {
      const int y = h.act(k, x);
      REQUIRE(y >= 0);
      REQUIRE(y < nx);
      CHECK(!seen[size_t(y)]);
      seen[size_t(y)] = true;
    }
  }

  // homomorphism, exhaustive over pairs on a sample of points
  for (int a = 0; a < g.order; ++a)
    for (int b = 0; b < g.order; ++b) {
      const int ab = compose(g, a, b);
      for (int x = 0; x < nx; x += std::max(1, nx / 4))
        CHECK(h.act(a, h.act(b, x)) == h.act(ab, x));
    }

  // geometric consistency: the tabulated action moves the actual points
  for (int k = 0; k < g.order; ++k)
    for (int x = 0; x < nx; ++x) {
      const Vec3 moved = g.elements[size_t(k)].m * h.points[size_t(x)];
      CHECK(norm(moved - h.points[size_t(h.act(k, x))]) < 1e-9);
    }

  // transitive from eta
  std::set<int> orbit;
  for (int k = 0; k < g.order; ++k) orbit.insert(h.act(k, h.eta));
  CHECK(int(orbit.size()) == nx);

  // orbit-stabilizer
  CHECK(h.stabilizer_order * nx == g.order);
}

} // namespace

TEST_CASE("vertex space of the icosahedral group") {
  const HSpace h = build_hspace(ico(), HSpaceKind::Vertices12);
  CHECK(h.size() == 12);
  CHECK(h.stabilizer_order == 5);
  for (const Vec3& p : h.points) CHECK(std::fabs(norm(p) - 1.0) < 1e-12);
  check_space_axioms(h);
}

TEST_CASE("face space of the icosahedral group") {
  const HSpace h = build_hspace(ico(), HSpaceKind::Faces20);
  CHECK(h.size() == 20);
  CHECK(h.stabilizer_order == 3);
  check_space_axioms(h);
}

TEST_CASE("group as a space over itself") {
  const HSpace h = build_hspace(ico(), HSpaceKind::Group);
  CHECK(h.size() == 60);
  CHECK(h.stabilizer_order == 1);
  check_space_axioms(h);
  // free action: left multiplication, so the action table is the cayley table
  for (int k = 0; k < ico().order; ++k)
    for (int x = 0; x < ico().order; ++x) CHECK(h.act(k, x) == compose(ico(), k, x));
}

TEST_CASE("group space works for small groups too") {
  const FiniteGroup c6 = build_group("c6");
  const HSpace h = build_hspace(c6, HSpaceKind::Group);
  CHECK(h.size() == 6);
  check_space_axioms(h);
}

TEST_CASE("vertex and face spaces require the icosahedral group") {
  const FiniteGroup oct = build_group("oct");
  CHECK_THROWS(build_hspace(oct, HSpaceKind::Vertices12));
  CHECK_THROWS(build_hspace(oct, HSpaceKind::Faces20));
}

TEST_CASE("stabilizer returns a subgroup of the stated order") {
  const HSpace h = build_hspace(ico(), HSpaceKind::Vertices12);
  for (int x = 0; x < h.size(); x += 3) {
    const std::vector<int> stab = stabilizer(h, x);
    REQUIRE(int(stab.size()) == h.stabilizer_order);
    for (int s : stab) CHECK(h.act(s, x) == x);
    // closed under composition
    for (int a : stab)
      for (int b : stab) {
        const int ab = compose(ico(), a, b);
        CHECK(std::find(stab.begin(), stab.end(), ab) != stab.end());
      }
  }
}

TEST_CASE("kind names round trip") {
  for (HSpaceKind k : {HSpaceKind::Vertices12, HSpaceKind::Faces20, HSpaceKind::Group})
    CHECK(parse_hspace_kind(to_string(k)) == k);
  CHECK_THROWS(parse_hspace_kind("nope"));
}
