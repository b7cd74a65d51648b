#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <finrot/group.hpp>
#include <finrot/hspace.hpp>
#include <finrot/rng.hpp>
#include <finrot/signal.hpp>

#include <algorithm>
#include <vector>

using namespace finrot;

namespace {

const FiniteGroup& oct() {
  static const FiniteGroup g = build_group("oct");
  return g;
}
const FiniteGroup& ico() {
  static const FiniteGroup g = build_group("ico");
  return g;
}

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.data) v = rng.normal();
  return t;
}

GroupSignal random_gsignal(const FiniteGroup& g, int b, int c, std::uint64_t seed) {
  return {&g, random_tensor({b, g.order, c}, seed)};
}

HSpaceSignal random_hsignal(const HSpace& h, int b, int c, std::uint64_t seed) {
  return {&h, random_tensor({b, h.size(), c}, seed)};
}

LocalizedFilter random_filter(std::vector<int> support, int ci, int co, std::uint64_t seed) {
  LocalizedFilter f;
  f.weights = random_tensor({co, ci, int(support.size())}, seed);
  f.support = std::move(support);
  return f;
}

} // namespace

// literal triple-loop evaluation of out(y) = sum_{g in S} f(y g^-1) h(g)
Tensor gconv_oracle(const GroupSignal& f, const LocalizedFilter& h) {
  const FiniteGroup& g = *f.group;
  const int B = f.batch(), C = f.channels(), Co = h.out_channels();
  const int S = int(h.support.size());
  Tensor out({B, g.order, Co});
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < g.order; ++y)
      for (int j = 0; j < Co; ++j) {
        double acc = 0;
        for (int s = 0; s < S; ++s) {
          const int src = g.at(y, g.inverse[size_t(h.support[size_t(s)])]);
          for (int i = 0; i < C; ++i)
            acc += f.data[(std::int64_t(b) * g.order + src) * C + i] *
                   h.weights[(std::int64_t(j) * C + i) * S + s];
        }
        out[(std::int64_t(b) * g.order + y) * Co + j] = acc;
      }
  return out;
}

// literal evaluation of out(y) = sum_{g in G} f(g eta) h(g^-1 y), h living on
// the space with zeros off its support
Tensor hconv_oracle(const HSpaceSignal& f, const LocalizedFilter& h) {
  const HSpace& X = *f.space;
  const FiniteGroup& g = *X.group;
  const int B = f.batch(), C = f.channels(), Co = h.out_channels();
  const int S = int(h.support.size());
  Tensor out({B, X.size(), Co});
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < X.size(); ++y)
      for (int j = 0; j < Co; ++j) {
        double acc = 0;
        for (int k = 0; k < g.order; ++k) {
          const int x = X.act(g.inverse[size_t(k)], y);
          const auto slot = std::find(h.support.begin(), h.support.end(), x);
          if (slot == h.support.end()) continue;
          const int s = int(slot - h.support.begin());
          const int src = X.act(k, X.eta);
          for (int i = 0; i < C; ++i)
            acc += f.data[(std::int64_t(b) * X.size() + src) * C + i] *
                   h.weights[(std::int64_t(j) * C + i) * S + s];
        }
        out[(std::int64_t(b) * X.size() + y) * Co + j] = acc;
      }
  return out;
}

// literal evaluation of out(g) = sum_{x in S} f(g x) h(x)
Tensor hcorr_oracle(const HSpaceSignal& f, const LocalizedFilter& h) {
  const HSpace& X = *f.space;
  const FiniteGroup& g = *X.group;
  const int B = f.batch(), C = f.channels(), Co = h.out_channels();
  const int S = int(h.support.size());
  Tensor out({B, g.order, Co});
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < g.order; ++k)
      for (int j = 0; j < Co; ++j) {
        double acc = 0;
        for (int s = 0; s < S; ++s) {
          const int src = X.act(k, h.support[size_t(s)]);
          for (int i = 0; i < C; ++i)
            acc += f.data[(std::int64_t(b) * X.size() + src) * C + i] *
                   h.weights[(std::int64_t(j) * C + i) * S + s];
        }
        out[(std::int64_t(b) * g.order + k) * Co + j] = acc;
      }
  return out;
}

TEST_CASE("gconv matches the literal sum") {
  const FiniteGroup& g = oct();
  const GroupSignal f = random_gsignal(g, 2, 3, 1);
  const LocalizedFilter h = random_filter({0, 1, 5, 9}, 3, 4, 2);
  const GroupSignal out = gconv(f, h);
  REQUIRE(out.data.shape == std::vector<int>{2, g.order, 4});
  CHECK(max_abs_diff(out.data, gconv_oracle(f, h)) < 1e-12);
}

TEST_CASE("gconv with the delta filter is the identity") {
  const GroupSignal f = random_gsignal(oct(), 3, 5, 3);
  const GroupSignal out = gconv(f, delta_filter(5));
  CHECK(max_abs_diff(out.data, f.data) == 0.0);
}

TEST_CASE("gconv is equivariant to every left translation") {
  const FiniteGroup& g = oct();
  const GroupSignal f = random_gsignal(g, 1, 2, 4);
  const LocalizedFilter h = random_filter({0, 2, 7}, 2, 2, 5);
  const GroupSignal base = gconv(f, h);
  for (int k = 0; k < g.order; ++k) {
    const GroupSignal lhs = gconv(apply_action(k, f), h);
    const GroupSignal rhs = apply_action(k, base);
    CHECK(max_abs_diff(lhs.data, rhs.data) < 1e-12);
  }
}

TEST_CASE("apply_action on group signals is f(k^-1 y) and a homomorphism") {
  const FiniteGroup& g = oct();
  const GroupSignal f = random_gsignal(g, 1, 1, 6);
  for (int k = 0; k < g.order; k += 5) {
    const GroupSignal tf = apply_action(k, f);
    for (int y = 0; y < g.order; ++y)
      CHECK(tf.data[y] == f.data[g.at(g.inverse[size_t(k)], y)]);
  }
  const int a = 3, b = 7;
  const GroupSignal ab = apply_action(compose(g, a, b), f);
  const GroupSignal then = apply_action(a, apply_action(b, f));
  CHECK(max_abs_diff(ab.data, then.data) == 0.0);
}

TEST_CASE("hconv matches the literal sum and is equivariant") {
  const HSpace X = build_hspace(ico(), HSpaceKind::Vertices12);
  const HSpaceSignal f = random_hsignal(X, 2, 2, 7);
  const LocalizedFilter h = random_filter({0, 3, 4}, 2, 3, 8);
  const HSpaceSignal out = hconv(f, h);
  REQUIRE(out.data.shape == std::vector<int>{2, 12, 3});
  CHECK(max_abs_diff(out.data, hconv_oracle(f, h)) < 1e-12);
  for (int k = 0; k < ico().order; k += 7) {
    const HSpaceSignal lhs = hconv(apply_action(k, f), h);
    const HSpaceSignal rhs = apply_action(k, out);
    CHECK(max_abs_diff(lhs.data, rhs.data) < 1e-12);
  }
}

TEST_CASE("hcorr matches the literal sum and lifts equivariantly") {
  const HSpace X = build_hspace(ico(), HSpaceKind::Faces20);
  const HSpaceSignal f = random_hsignal(X, 2, 3, 9);
  const LocalizedFilter h = random_filter({0, 1, 2, 10}, 3, 2, 10);
  const GroupSignal out = hcorr(f, h);
  REQUIRE(out.data.shape == std::vector<int>{2, 60, 2});
  CHECK(max_abs_diff(out.data, hcorr_oracle(f, h)) < 1e-12);
  // translation on the space becomes translation on the group
  for (int k = 0; k < ico().order; k += 13) {
    const GroupSignal lhs = hcorr(apply_action(k, f), h);
    const GroupSignal rhs = apply_action(k, out);
    CHECK(max_abs_diff(lhs.data, rhs.data) < 1e-12);
  }
}

TEST_CASE("global_pool is exactly invariant to apply_action") {
  const GroupSignal f = random_gsignal(ico(), 2, 4, 11);
  const Tensor base = global_pool(f.data);
  REQUIRE(base.shape == std::vector<int>{2, 4});
  for (int k = 1; k < ico().order; k += 11) {
    const Tensor moved = global_pool(apply_action(k, f).data);
    CHECK(max_abs_diff(base, moved) < 1e-12);
  }
}

TEST_CASE("masked pool averages only the kept rows") {
  Tensor t({1, 4, 2});
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = double(i);
  const std::vector<unsigned char> keep{1, 0, 0, 1};
  const Tensor out = global_pool_masked(t, keep);
  // rows 0 and 3 kept: channel 0 mean of {0, 6}, channel 1 mean of {1, 7}
  CHECK(out[0] == 3.0);
  CHECK(out[1] == 4.0);
}

TEST_CASE("relu clamps negatives elementwise") {
  Tensor t({2, 1, 3});
  t.data = {-1, 0, 2, -0.5, 3, -4};
  const Tensor out = relu(t);
  CHECK(out.data == std::vector<double>{0, 0, 2, 0, 3, 0});
}

TEST_CASE("support generation warning classifier") {
  const FiniteGroup& g = ico();
  // one 72-degree rotation generates only a 5-cycle
  const auto small = smallest_rotations(g);
  const std::vector<int> cyclic{0, small[0].first};
  CHECK(!support_generates(g, cyclic));
  // identity + smallest rotations from two axes generate everything
  const std::vector<int> spread{0, small[0].first, small[1].first, small[2].first};
  CHECK(support_generates(g, spread) ==
        (generated_closure(g, spread).indices.size() == size_t(g.order)));
}

TEST_CASE("plan caching returns the same object for the same key") {
  const FiniteGroup& g = oct();
  const std::vector<int> support{0, 1, 2};
  const GConvPlan& p1 = gconv_plan(g, support);
  const GConvPlan& p2 = gconv_plan(g, support);
  CHECK(&p1 == &p2);
  CHECK(p1.n == g.order);
  CHECK(p1.s == 3);
}
