#include "finrot/check.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstring>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "finrot/dataset.hpp"
#include "finrot/encoder.hpp"
#include "finrot/group.hpp"
#include "finrot/hspace.hpp"
#include "finrot/mvnet.hpp"
#include "finrot/polar.hpp"
#include "finrot/render.hpp"
#include "finrot/retrieval.hpp"
#include "finrot/rng.hpp"
#include "finrot/shapes.hpp"
#include "finrot/signal.hpp"
#include "finrot/tape.hpp"
#include "finrot/tensor.hpp"
#include "finrot/view_config.hpp"

namespace finrot {
namespace {

// ---- pinned tolerances and budgets -----------------------------------------

constexpr double kTolEquiv = 1e-10;      // criterion 2: equivariance deviation
constexpr double kTolOracle = 1e-12;     // criterion 3: optimized vs literal
constexpr double kTolDegeneracy = 1e-12; // criterion 4: delta-filter collapse
constexpr double kGradStep = 1e-5;       // criterion 6: central-difference step
constexpr double kTolGradRel = 1e-5;     // criterion 6: relative deviation
constexpr double kTolPolarShift = 1e-3;  // criterion 8: one-step shift match
constexpr double kTolPolarInv = 1e-6;    // criterion 8: encoder invariance
constexpr double kTolDescInv = 1e-8;     // criterion 9: descriptor invariance

constexpr double kBudgetGroups = 5;    // seconds, criterion 1
constexpr double kBudgetEquiv = 30;    // criterion 2
constexpr double kBudgetRender = 120;  // criterion 7
constexpr double kBudgetBench = 1200;  // criterion 9 (includes shared training)

// ---- small utilities --------------------------------------------------------

std::string fmt(const char* f, ...) {
  va_list ap;
  va_start(ap, f);
  char buf[768];
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

// Collects violations for one criterion; a criterion passes when none accrue.
struct Ctx {
  CriterionResult& r;
  bool ok = true;

  void req(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    r.notes.push_back("violated: " + what);
  }
  void note(std::string s) { r.notes.push_back(std::move(s)); }
};

Tensor randn(Rng& rng, std::vector<int> shape, double scale = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.data) v = scale * rng.normal();
  return t;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  return same_shape(a, b) &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

std::vector<int> random_support(Rng& rng, int n, int s) {
  std::vector<int> all(static_cast<size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  rng.shuffle(all);
  all.resize(static_cast<size_t>(s));
  std::sort(all.begin(), all.end());
  return all;
}

LocalizedFilter random_filter(Rng& rng, int n, int s, int ci, int co) {
  LocalizedFilter h;
  h.support = random_support(rng, n, s);
  h.weights = randn(rng, {co, ci, s});
  return h;
}

// ---- criterion 1: group axioms ----------------------------------------------

void c1_groups(Ctx& c) {
  for (const char* name : {"c12", "d6", "tet", "oct", "ico"}) {
    FiniteGroup g = build_group(name);
    const std::vector<std::string> bad = verify_group(g);
    for (const auto& m : bad) c.req(false, std::string(name) + ": " + m);
    if (bad.empty())
      c.note(fmt("%s: order %d, Latin square / associativity / inverses / matrix "
                 "consistency all hold",
                 name, g.order));
  }
  FiniteGroup ico = build_group("ico");
  c.req(ico.order == 60, "full rotation group of the icosahedron has 60 elements");
  c.req(!is_abelian(ico), "60-element group is non-abelian");
}

// ---- criterion 2: exact equivariance ----------------------------------------

void c2_equivariance(Ctx& c) {
  Rng rng(2);
  const FiniteGroup g = build_group("ico");
  const HSpace xv = build_hspace(g, HSpaceKind::Vertices12);
  const HSpace xf = build_hspace(g, HSpaceKind::Faces20);

  double worst_g = 0, worst_hc = 0, worst_cr = 0;
  for (int i = 0; i < 100; ++i) {
    const int b = rng.uniform_int(1, 2);
    const int ci = rng.uniform_int(1, 4), co = rng.uniform_int(1, 4);

    {
      const LocalizedFilter h = random_filter(rng, g.order, rng.uniform_int(1, 10), ci, co);
      const GroupSignal f{&g, randn(rng, {b, g.order, ci})};
      const GroupSignal base = gconv(f, h);
      for (int k = 0; k < g.order; ++k) {
        const GroupSignal lhs = gconv(apply_action(k, f), h);
        worst_g = std::max(worst_g, max_abs_diff(lhs.data, apply_action(k, base).data));
      }
    }
    const HSpace& x = (i % 2) ? xf : xv;
    {
      const LocalizedFilter h = random_filter(rng, x.size(), rng.uniform_int(1, 6), ci, co);
      const HSpaceSignal f{&x, randn(rng, {b, x.size(), ci})};
      const HSpaceSignal base = hconv(f, h);
      for (int k = 0; k < g.order; ++k) {
        const HSpaceSignal lhs = hconv(apply_action(k, f), h);
        worst_hc = std::max(worst_hc, max_abs_diff(lhs.data, apply_action(k, base).data));
      }
    }
    {
      const LocalizedFilter h = random_filter(rng, x.size(), rng.uniform_int(1, 6), ci, co);
      const HSpaceSignal f{&x, randn(rng, {b, x.size(), ci})};
      const GroupSignal base = hcorr(f, h);
      for (int k = 0; k < g.order; ++k) {
        const GroupSignal lhs = hcorr(apply_action(k, f), h);
        worst_cr = std::max(worst_cr, max_abs_diff(lhs.data, apply_action(k, base).data));
      }
    }
  }
  c.req(worst_g < kTolEquiv, fmt("gconv equivariance: worst deviation %.3e", worst_g));
  c.req(worst_hc < kTolEquiv, fmt("hconv equivariance: worst deviation %.3e", worst_hc));
  c.req(worst_cr < kTolEquiv, fmt("hcorr equivariance: worst deviation %.3e", worst_cr));
  c.note(fmt("100 signal/filter pairs per op, all 60 actions; worst deviations "
             "gconv %.2e, hconv %.2e, hcorr %.2e (tol %g)",
             worst_g, worst_hc, worst_cr, kTolEquiv));

  // Action homomorphism, bitwise: acting by k1 then k2 equals acting by k1*k2.
  const GroupSignal fg{&g, randn(rng, {2, g.order, 3})};
  const HSpaceSignal fx{&xv, randn(rng, {2, xv.size(), 3})};
  bool homo = true;
  for (int k1 = 0; k1 < g.order && homo; ++k1)
    for (int k2 = 0; k2 < g.order && homo; ++k2) {
      homo = bitwise_equal(apply_action(k1, apply_action(k2, fg)).data,
                           apply_action(g.at(k1, k2), fg).data) &&
             bitwise_equal(apply_action(k1, apply_action(k2, fx)).data,
                           apply_action(g.at(k1, k2), fx).data);
    }
  c.req(homo, "action homomorphism holds bitwise for all 3600 pairs");
  if (homo) c.note("action homomorphism exact (bitwise) on group and space signals");
}

// ---- criterion 3: optimized kernels vs literal sums --------------------------

Tensor gconv_literal(const FiniteGroup& g, const Tensor& f, const LocalizedFilter& h) {
  const int B = f.dim(0), n = f.dim(1), ci = f.dim(2);
  const int co = h.out_channels(), s = static_cast<int>(h.support.size());
  Tensor out = Tensor::zeros({B, n, co});
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < n; ++y)
      for (int jo = 0; jo < co; ++jo) {
        double acc = 0;
        for (int j = 0; j < s; ++j) {
          const int src = g.at(y, g.inverse[static_cast<size_t>(h.support[size_t(j)])]);
          for (int ji = 0; ji < ci; ++ji)
            acc += f.data[(size_t(b) * n + size_t(src)) * ci + size_t(ji)] *
                   h.weights.data[(size_t(jo) * ci + size_t(ji)) * s + size_t(j)];
        }
        out.data[(size_t(b) * n + size_t(y)) * co + size_t(jo)] = acc;
      }
  return out;
}

Tensor hconv_literal(const HSpace& x, const Tensor& f, const LocalizedFilter& h) {
  const FiniteGroup& g = *x.group;
  const int B = f.dim(0), nx = f.dim(1), ci = f.dim(2);
  const int co = h.out_channels(), s = static_cast<int>(h.support.size());
  Tensor out = Tensor::zeros({B, nx, co});
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < nx; ++y)
      for (int jo = 0; jo < co; ++jo) {
        double acc = 0;
        for (int gi = 0; gi < g.order; ++gi) {
          const int xin = x.act(gi, x.eta);
          const int xw = x.act(g.inverse[static_cast<size_t>(gi)], y);
          int j = -1;
          for (int t = 0; t < s; ++t)
            if (h.support[size_t(t)] == xw) j = t;
          if (j < 0) continue;
          for (int ji = 0; ji < ci; ++ji)
            acc += f.data[(size_t(b) * nx + size_t(xin)) * ci + size_t(ji)] *
                   h.weights.data[(size_t(jo) * ci + size_t(ji)) * s + size_t(j)];
        }
        out.data[(size_t(b) * nx + size_t(y)) * co + size_t(jo)] = acc;
      }
  return out;
}

Tensor hcorr_literal(const HSpace& x, const Tensor& f, const LocalizedFilter& h) {
  const FiniteGroup& g = *x.group;
  const int B = f.dim(0), ci = f.dim(2);
  const int co = h.out_channels(), s = static_cast<int>(h.support.size());
  const int nx = x.size();
  Tensor out = Tensor::zeros({B, g.order, co});
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < g.order; ++y)
      for (int jo = 0; jo < co; ++jo) {
        double acc = 0;
        for (int j = 0; j < s; ++j) {
          const int src = x.act(y, h.support[size_t(j)]);
          for (int ji = 0; ji < ci; ++ji)
            acc += f.data[(size_t(b) * nx + size_t(src)) * ci + size_t(ji)] *
                   h.weights.data[(size_t(jo) * ci + size_t(ji)) * s + size_t(j)];
        }
        out.data[(size_t(b) * g.order + size_t(y)) * co + size_t(jo)] = acc;
      }
  return out;
}

void c3_oracles(Ctx& c) {
  Rng rng(3);
  const FiniteGroup g = build_group("ico");
  const HSpace xv = build_hspace(g, HSpaceKind::Vertices12);
  const HSpace xf = build_hspace(g, HSpaceKind::Faces20);

  double worst_g = 0, worst_hc = 0, worst_cr = 0;
  for (int i = 0; i < 50; ++i) {
    const int b = (i % 2) ? 4 : 1;
    const int ci = rng.uniform_int(1, 5), co = rng.uniform_int(1, 5);
    const HSpace& x = (i % 2) ? xf : xv;

    const LocalizedFilter hg = random_filter(rng, g.order, rng.uniform_int(1, 12), ci, co);
    const GroupSignal fg{&g, randn(rng, {b, g.order, ci})};
    worst_g = std::max(worst_g, max_abs_diff(gconv(fg, hg).data, gconv_literal(g, fg.data, hg)));

    const LocalizedFilter hx = random_filter(rng, x.size(), rng.uniform_int(1, 6), ci, co);
    const HSpaceSignal fx{&x, randn(rng, {b, x.size(), ci})};
    worst_hc =
        std::max(worst_hc, max_abs_diff(hconv(fx, hx).data, hconv_literal(x, fx.data, hx)));
    worst_cr =
        std::max(worst_cr, max_abs_diff(hcorr(fx, hx).data, hcorr_literal(x, fx.data, hx)));
  }
  c.req(worst_g < kTolOracle, fmt("gconv vs literal sum: worst deviation %.3e", worst_g));
  c.req(worst_hc < kTolOracle, fmt("hconv vs literal sum: worst deviation %.3e", worst_hc));
  c.req(worst_cr < kTolOracle, fmt("hcorr vs literal sum: worst deviation %.3e", worst_cr));
  c.note(fmt("50 random instances per op; worst deviations gconv %.2e, hconv %.2e, "
             "hcorr %.2e (tol %g)",
             worst_g, worst_hc, worst_cr, kTolOracle));
}

// ---- criterion 4: delta filters collapse to mean view pooling ----------------

void c4_degeneracy(Ctx& c) {
  Rng rng(4);
  const FiniteGroup g = build_group("ico");

  // Signal level: stacked identity convolutions leave the pooled mean alone.
  {
    const GroupSignal f{&g, randn(rng, {2, g.order, 4})};
    const LocalizedFilter d = delta_filter(4);
    GroupSignal h = gconv(gconv(gconv(f, d), d), d);
    const double dev = max_abs_diff(global_pool(h.data), global_pool(f.data));
    c.req(dev < kTolDegeneracy, fmt("pooled delta-conv stack vs pooled input: %.3e", dev));
    c.note(fmt("three stacked delta convolutions: pooled deviation %.2e", dev));
  }

  // Network level: with identity-coupling delta filters and zero biases the
  // aggregation head degenerates to the mean of single-view descriptors.
  for (ConfigKind kind : {ConfigKind::V60x1, ConfigKind::V12x5}) {
    const CameraConfig cfg = gen_config(kind, 2.5);
    const int v = cfg.n_views();

    EncoderConfig ec;
    ec.widths = {4, 5};
    HeadConfig hc;
    hc.layers = 3;
    hc.channels = 5;
    hc.proj = 5;
    hc.support = 7;
    hc.classes = 3;
    hc.norm = false;
    MVNet net = make_mvnet(ec, hc, rng);
    for (size_t l = 0; l < net.head_w.size(); ++l) {
      std::fill(net.head_w[l].data.begin(), net.head_w[l].data.end(), 0.0);
      const int s = net.head_w[l].dim(2);
      for (int ch = 0; ch < hc.channels; ++ch)
        net.head_w[l].data[(size_t(ch) * hc.channels + size_t(ch)) * s] = 1.0;
      std::fill(net.head_b[l].data.begin(), net.head_b[l].data.end(), 0.0);
    }

    const Tensor images = randn(rng, {2 * v, 8, 8, 1});
    std::vector<int> all(static_cast<size_t>(v));
    std::iota(all.begin(), all.end(), 0);

    Tensor full;
    {
      Tape t;
      const NetVars nv = push_net(t, net, false);
      const NetOut out = net_forward(t, net, nv, cfg, t.input(images, false), all);
      full = t.value(out.desc); // [2, 5]
    }
    Tensor mean = Tensor::zeros(full.shape);
    const size_t img_sz = size_t(8) * 8;
    for (int view = 0; view < v; ++view) {
      Tensor one = Tensor::zeros({2, 8, 8, 1});
      for (int b = 0; b < 2; ++b)
        std::copy_n(images.data.begin() + (size_t(b) * v + size_t(view)) * img_sz, img_sz,
                    one.data.begin() + size_t(b) * img_sz);
      Tape t;
      const NetVars nv = push_net(t, net, false);
      const NetOut out = net_forward(t, net, nv, cfg, t.input(std::move(one), false), {view});
      const Tensor& d = t.value(out.desc);
      for (size_t i = 0; i < mean.data.size(); ++i) mean.data[i] += d.data[i] / v;
    }
    const double dev = max_abs_diff(full, mean);
    c.req(dev < kTolDegeneracy,
          fmt("%s: delta-filter descriptor vs mean of single-view descriptors: %.3e",
              to_string(kind).c_str(), dev));
    c.note(fmt("%s head with delta filters: deviation from per-view mean %.2e",
               to_string(kind).c_str(), dev));
  }
}

// ---- criterion 5: receptive fields and support closure -----------------------

void c5_receptive(Ctx& c) {
  const FiniteGroup g = build_group("ico");
  const double a72 = 2.0 * M_PI / 5.0;

  // All elements rotating by exactly 72 degrees (two per five-fold axis).
  std::vector<int> deg72;
  for (int i = 0; i < g.order; ++i)
    if (std::abs(g.elements[size_t(i)].angle() - a72) < 1e-9) deg72.push_back(i);
  c.req(deg72.size() == 12, fmt("expected 12 seventy-two-degree elements, found %zu",
                                deg72.size()));
  if (deg72.empty()) return;

  // A five-element support filling one cyclic subgroup: stacked layers keep
  // the Jacobian confined to the matching coset at every depth.
  const ClosureResult cyc = generated_closure(g, std::vector<int>{deg72.front()});
  c.req(cyc.indices.size() == 5, "one 72-degree rotation generates a 5-element subgroup");
  const std::vector<int>& H = cyc.indices;

  Rng rng(5);
  bool confined = true;
  for (int depth = 1; depth <= 4 && confined; ++depth) {
    std::vector<LocalizedFilter> filters;
    for (int l = 0; l < depth; ++l) {
      LocalizedFilter h;
      h.support = H;
      h.weights = Tensor::zeros({1, 1, 5});
      for (auto& wv : h.weights.data) wv = rng.uniform(0.5, 1.5);
      filters.push_back(std::move(h));
    }
    // The stack is linear in the input, so column x of its Jacobian is the
    // forward image of a one-hot input; positive weights rule out cancellation.
    for (int x = 0; x < g.order && confined; ++x) {
      GroupSignal sig{&g, Tensor::zeros({1, g.order, 1})};
      sig.data.data[size_t(x)] = 1.0;
      for (const auto& h : filters) sig = gconv(sig, h);
      std::set<int> hit;
      for (int y = 0; y < g.order; ++y)
        if (sig.data.data[size_t(y)] != 0.0) hit.insert(y);
      std::set<int> coset;
      for (int s : H) coset.insert(g.at(x, s));
      confined = hit == coset;
    }
  }
  c.req(confined, "forward Jacobian columns equal the 5-element coset at depths 1..4");
  if (confined)
    c.note("5-element cyclic support: Jacobian support is exactly the matching coset "
           "at depths 1 through 4 (never grows past 5 rows)");

  // The same fact through reverse-mode gradients at depth 3.
  {
    Tape t;
    const Tape::Var fin = t.input(randn(rng, {1, g.order, 1}), true);
    Tape::Var cur = fin;
    for (int l = 0; l < 3; ++l) {
      Tensor w({1, 1, 5});
      for (auto& wv : w.data) wv = rng.uniform(0.5, 1.5);
      cur = t.gconv(cur, t.input(std::move(w), false), g, H);
    }
    const int y0 = 17;
    std::vector<double> pick(static_cast<size_t>(g.order), 0.0);
    pick[size_t(y0)] = double(g.order);
    t.backward(t.global_pool(t.row_scale(cur, std::move(pick))));
    const Tensor& grad = t.grad(fin);
    std::set<int> hit;
    for (int x = 0; x < g.order; ++x)
      if (grad.data[size_t(x)] != 0.0) hit.insert(x);
    std::set<int> coset;
    for (int s : H) coset.insert(g.at(y0, s));
    c.req(hit == coset, "backward gradient support equals the 5-element coset at depth 3");
  }

  // Identity plus two 72-degree rotations about different axes (closed under
  // inverses) reaches all 60 elements within five expansion rounds. The
  // literal five-fold product set stops one element short; depth six covers.
  int pairs = 0, same_axis = 0;
  bool closure_ok = true, rounds_ok = true, gen3_ok = true, ladder_ok = true;
  const std::array<int, 6> want_ladder{5, 17, 38, 54, 59, 60};
  for (size_t i = 0; i < deg72.size(); ++i)
    for (size_t j = i + 1; j < deg72.size(); ++j) {
      const int a = deg72[i], b = deg72[j];
      const Vec3 ax = g.elements[size_t(a)].axis(), bx = g.elements[size_t(b)].axis();
      if (std::abs(dot(ax, bx)) > 1.0 - 1e-9) {
        ++same_axis;
        const ClosureResult cr = generated_closure(g, std::vector<int>{a, b});
        c.req(cr.indices.size() == 5,
              fmt("same-axis pair (%d,%d) generates only its 5-cycle", a, b));
        continue;
      }
      ++pairs;
      const std::vector<int> sup{0, a, g.inverse[size_t(a)], b, g.inverse[size_t(b)]};
      const ClosureResult cr = generated_closure(g, sup);
      closure_ok = closure_ok && static_cast<int>(cr.indices.size()) == g.order;
      rounds_ok = rounds_ok && cr.rounds <= 5;
      for (int d = 1; d <= 6; ++d)
        ladder_ok =
            ladder_ok && static_cast<int>(product_set(g, sup, d).size()) == want_ladder[size_t(d - 1)];
      gen3_ok = gen3_ok &&
                generated_closure(g, std::vector<int>{0, a, b}).indices.size() == size_t(60);
    }
  c.req(pairs == 60, fmt("expected 60 different-axis pairs, found %d", pairs));
  c.req(same_axis == 6, fmt("expected 6 same-axis pairs, found %d", same_axis));
  c.req(closure_ok, "every symmetric support generates all 60 elements");
  c.req(rounds_ok, "every symmetric support closes within 5 expansion rounds");
  c.req(gen3_ok, "identity plus the two rotations alone also generates all 60");
  c.req(ladder_ok, "product-set ladder is 5,17,38,54,59,60 for every pair");
  if (closure_ok && rounds_ok && ladder_ok)
    c.note("all 60 different-axis pairs: closure reaches 60/60 within 5 rounds; literal "
           "product sets grow 5,17,38,54,59 and cover at depth 6");
}

// ---- criterion 6: central-difference gradient audit ---------------------------

// eval computes the loss; when grads is non-null it also returns d(loss)/d(input)
// for every input, in order.
using Evaluator =
    std::function<double(const std::vector<Tensor>&, std::vector<Tensor>*)>;

double fd_audit(Ctx& c, const std::string& name, const std::vector<Tensor>& inputs,
                const Evaluator& eval) {
  std::vector<Tensor> grads;
  eval(inputs, &grads);
  double worst = 0;
  for (size_t i = 0; i < inputs.size(); ++i)
    for (size_t k = 0; k < inputs[i].data.size(); ++k) {
      std::vector<Tensor> p = inputs;
      p[i].data[k] += kGradStep;
      const double fp = eval(p, nullptr);
      p[i].data[k] -= 2 * kGradStep;
      const double fm = eval(p, nullptr);
      const double fd = (fp - fm) / (2 * kGradStep);
      const double an = grads[i].data[k];
      const double rel =
          std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      worst = std::max(worst, rel);
    }
  c.req(worst < kTolGradRel, fmt("%s: worst relative gradient deviation %.3e", name.c_str(),
                                 worst));
  return worst;
}

// Reduce any tensor to a scalar through a fixed random linear form.
Tape::Var scalarize(Tape& t, Tape::Var v, const Tensor& w) {
  const int n = static_cast<int>(t.value(v).numel());
  return t.linear(t.reshape(v, {1, n}), t.input(w, false));
}

void c6_gradients(Ctx& c) {
  Rng rng(6);
  const FiniteGroup g = build_group("ico");
  const HSpace xv = build_hspace(g, HSpaceKind::Vertices12);
  const HSpace xf = build_hspace(g, HSpaceKind::Faces20);

  double worst = 0;
  auto audit1 = [&](const std::string& name, const std::vector<Tensor>& ins,
                    const std::function<Tape::Var(Tape&, const std::vector<Tape::Var>&)>& body) {
    Tensor w;
    const Evaluator eval = [&body, &w](const std::vector<Tensor>& ins2,
                                       std::vector<Tensor>* grads) {
      Tape t;
      std::vector<Tape::Var> vs;
      for (const Tensor& x : ins2) vs.push_back(t.input(x, grads != nullptr));
      Tape::Var out = body(t, vs);
      Tape::Var loss = out;
      if (t.value(out).numel() != 1) loss = scalarize(t, out, w);
      if (grads) {
        t.backward(loss);
        grads->clear();
        for (Tape::Var v : vs)
          grads->push_back(t.grad_defined(v) ? t.grad(v) : Tensor::zeros(t.value(v).shape));
      }
      return t.value(loss).data[0];
    };
    // Size the scalarizer by a dry run of the body.
    {
      Tape t;
      std::vector<Tape::Var> vs;
      for (const Tensor& x : ins) vs.push_back(t.input(x, false));
      const int n = static_cast<int>(t.value(body(t, vs)).numel());
      w = randn(rng, {1, n});
    }
    worst = std::max(worst, fd_audit(c, name, ins, eval));
  };

  // Away-from-kink draws for relu and max pooling.
  Tensor xr = Tensor::zeros({2, 3, 4});
  for (auto& v : xr.data) v = (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.2, 1.0);
  audit1("relu", {xr}, [](Tape& t, const std::vector<Tape::Var>& v) { return t.relu(v[0]); });

  audit1("add", {randn(rng, {3, 4}), randn(rng, {3, 4})},
         [](Tape& t, const std::vector<Tape::Var>& v) { return t.add(v[0], v[1]); });
  audit1("scale", {randn(rng, {3, 4})},
         [](Tape& t, const std::vector<Tape::Var>& v) { return t.scale(v[0], 1.7); });
  {
    std::vector<double> s;
    for (int i = 0; i < 5; ++i) s.push_back(rng.uniform(-2, 2));
    audit1("row_scale", {randn(rng, {2, 5, 3})},
           [s](Tape& t, const std::vector<Tape::Var>& v) { return t.row_scale(v[0], s); });
  }
  audit1("add_row_bias", {randn(rng, {2, 5, 3}), randn(rng, {3})},
         [](Tape& t, const std::vector<Tape::Var>& v) { return t.add_row_bias(v[0], v[1]); });
  audit1("add_bias", {randn(rng, {2, 3, 4}), randn(rng, {4})},
         [](Tape& t, const std::vector<Tape::Var>& v) { return t.add_bias(v[0], v[1]); });
  audit1("reshape", {randn(rng, {2, 6})},
         [](Tape& t, const std::vector<Tape::Var>& v) { return t.reshape(v[0], {3, 4}); });
  audit1("linear", {randn(rng, {2, 2, 3}), randn(rng, {4, 3})},
         [](Tape& t, const std::vector<Tape::Var>& v) { return t.linear(v[0], v[1]); });
  audit1("conv2d stride 2 zero pad", {randn(rng, {1, 5, 6, 2}), randn(rng, {3, 3, 3, 2})},
         [](Tape& t, const std::vector<Tape::Var>& v) { return t.conv2d(v[0], v[1], 2, 2, false); });
  audit1("conv2d circular", {randn(rng, {1, 4, 6, 2}), randn(rng, {3, 3, 3, 2})},
         [](Tape& t, const std::vector<Tape::Var>& v) { return t.conv2d(v[0], v[1], 1, 1, true); });
  audit1("spatial_mean", {randn(rng, {2, 3, 4, 2})},
         [](Tape& t, const std::vector<Tape::Var>& v) { return t.spatial_mean(v[0]); });

  {
    const std::vector<int> sup = group_support(g, 4);
    audit1("gconv", {randn(rng, {1, g.order, 2}), randn(rng, {2, 2, 4})},
           [&g, sup](Tape& t, const std::vector<Tape::Var>& v) {
             return t.gconv(v[0], v[1], g, sup);
           });
  }
  {
    const std::vector<int> sup = random_support(rng, xv.size(), 3);
    audit1("hconv", {randn(rng, {1, xv.size(), 2}), randn(rng, {2, 2, 3})},
           [&xv, sup](Tape& t, const std::vector<Tape::Var>& v) {
             return t.hconv(v[0], v[1], xv, sup);
           });
  }
  {
    const std::vector<int> sup = random_support(rng, xf.size(), 3);
    audit1("hcorr", {randn(rng, {1, xf.size(), 2}), randn(rng, {2, 2, 3})},
           [&xf, sup](Tape& t, const std::vector<Tape::Var>& v) {
             return t.hcorr(v[0], v[1], xf, sup);
           });
  }
  audit1("global_pool", {randn(rng, {2, 4, 3})},
         [](Tape& t, const std::vector<Tape::Var>& v) { return t.global_pool(v[0]); });
  {
    Tensor xm = Tensor::zeros({2, 4, 3});
    for (auto& v : xm.data) v = rng.uniform(-0.5, 0.5);
    for (int b = 0; b < 2; ++b)
      for (int ch = 0; ch < 3; ++ch)
        xm.data[(size_t(b) * 4 + size_t(rng.uniform_int(0, 3))) * 3 + size_t(ch)] += 1.0;
    audit1("global_max_pool", {xm},
           [](Tape& t, const std::vector<Tape::Var>& v) { return t.global_max_pool(v[0]); });
  }
  {
    Tensor xn = Tensor::zeros({2, 5, 3});
    for (auto& v : xn.data) v = rng.uniform(-1, 1);
    audit1("channel_norm", {xn},
           [](Tape& t, const std::vector<Tape::Var>& v) { return t.channel_norm(v[0], 1e-5); });
  }
  audit1("assemble_rows", {randn(rng, {4, 3})},
         [](Tape& t, const std::vector<Tape::Var>& v) {
           return t.assemble_rows(v[0], 2, {1, 3}, 5);
         });
  audit1("cross_entropy", {randn(rng, {3, 4})},
         [](Tape& t, const std::vector<Tape::Var>& v) {
           return t.cross_entropy(v[0], {0, 2, 1});
         });
  {
    // Keep every triplet term away from its hinge and every norm away from 0.
    Tensor z, pos, neg;
    for (int attempt = 0; attempt < 200; ++attempt) {
      z = randn(rng, {2, 3});
      pos = randn(rng, {2, 3});
      neg = randn(rng, {2, 3});
      auto rown = [](const Tensor& m, int r) {
        double sum = 0;
        for (int j = 0; j < 3; ++j) sum += m.data[size_t(r) * 3 + j] * m.data[size_t(r) * 3 + j];
        return std::sqrt(sum);
      };
      auto cosd = [&](const Tensor& a, const Tensor& b, int r) {
        double dp = 0;
        for (int j = 0; j < 3; ++j) dp += a.data[size_t(r) * 3 + j] * b.data[size_t(r) * 3 + j];
        return 1.0 - dp / (rown(a, r) * rown(b, r));
      };
      bool good = true;
      for (int r = 0; r < 2; ++r) {
        good = good && rown(z, r) > 0.3 && rown(pos, r) > 0.3 && rown(neg, r) > 0.3;
        if (good) good = std::abs(cosd(z, pos, r) - cosd(z, neg, r) + 0.2) > 0.05;
      }
      if (good) break;
    }
    audit1("triplet_cached", {z}, [pos, neg](Tape& t, const std::vector<Tape::Var>& v) {
      return t.triplet_cached(v[0], pos, neg, 0.2);
    });
  }

  // End-to-end: a two-layer aggregation net, gradients for every parameter
  // and the input images.
  {
    const CameraConfig cfg = gen_config(ConfigKind::CyclicPanorama, 2.5, 6);
    EncoderConfig ec;
    ec.widths = {3};
    HeadConfig hc;
    hc.layers = 2;
    hc.channels = 3;
    hc.support = 2;
    hc.classes = 2;
    hc.proj = 3;
    hc.norm = true;
    Rng nrng(61);
    const MVNet net = make_mvnet(ec, hc, nrng);
    std::vector<int> kept(6);
    std::iota(kept.begin(), kept.end(), 0);
    const std::vector<int> labels{0, 1};
    Tensor images = Tensor::zeros({12, 6, 6, 1});
    for (auto& v : images.data) v = nrng.uniform(0.1, 1.0);
    const Tensor pos = randn(nrng, {2, 3}), neg = randn(nrng, {2, 3});

    std::vector<Tensor> ins;
    {
      MVNet n2 = net;
      for (Tensor* p : net_parameters(n2)) ins.push_back(*p);
    }
    ins.push_back(images);
    const Evaluator eval = [&net, &cfg, &kept, &labels, &pos,
                            &neg](const std::vector<Tensor>& ins2, std::vector<Tensor>* grads) {
      MVNet n2 = net;
      const std::vector<Tensor*> ps = net_parameters(n2);
      for (size_t i = 0; i < ps.size(); ++i) *ps[i] = ins2[i];
      Tape t;
      const NetVars nv = push_net(t, n2, grads != nullptr);
      const Tape::Var img = t.input(ins2.back(), grads != nullptr);
      const NetOut out = net_forward(t, n2, nv, cfg, img, kept);
      Tape::Var loss = t.cross_entropy(out.logits, labels);
      loss = t.add(loss, t.scale(t.triplet_cached(out.desc, pos, neg, 0.2), 0.1));
      if (grads) {
        t.backward(loss);
        grads->clear();
        for (Tape::Var v : nv.all)
          grads->push_back(t.grad_defined(v) ? t.grad(v) : Tensor::zeros(t.value(v).shape));
        grads->push_back(t.grad_defined(img) ? t.grad(img)
                                             : Tensor::zeros(ins2.back().shape));
      }
      return t.value(loss).data[0];
    };
    worst = std::max(worst, fd_audit(c, "two-layer end-to-end net", ins, eval));
  }

  c.note(fmt("central differences, step %g: worst relative deviation %.2e over all ops "
             "and the end-to-end net (tol %g)",
             kGradStep, worst, kTolGradRel));
}

// ---- criterion 7: render/permute commutation ----------------------------------

void c7_render(Ctx& c) {
  Rng rng(7);
  const RenderSpec rs;
  for (ConfigKind kind : {ConfigKind::V60x1, ConfigKind::V12x5, ConfigKind::V20x3}) {
    const CameraConfig cfg = gen_config(kind, 2.5);
    const FiniteGroup& g = *cfg.group;
    std::vector<std::vector<int>> perm;
    for (int k = 0; k < g.order; ++k) perm.push_back(permutation_under_rotation(cfg, k));

    const size_t plane = size_t(rs.height) * rs.width;
    long long mismatched = 0;
    for (int sh = 0; sh < 20; ++sh) {
      const int cls = rng.uniform_int(0, shape_class_count() - 1);
      std::vector<Vec3> pts = make_shape(cls, rng.bits(), 256);
      const Rotation pose = rng.rotation();
      for (Vec3& p : pts) p = pose.m * p;

      const Tensor base = render_views(pts, cfg, rs);
      for (int k = 0; k < g.order; ++k) {
        std::vector<Vec3> rp(pts.size());
        for (size_t i = 0; i < pts.size(); ++i) rp[i] = g.elements[size_t(k)].m * pts[i];
        const Tensor imgs = render_views(rp, cfg, rs);
        for (int v = 0; v < cfg.n_views(); ++v)
          if (std::memcmp(imgs.data.data() + size_t(perm[size_t(k)][size_t(v)]) * plane,
                          base.data.data() + size_t(v) * plane, plane * sizeof(double)) != 0)
            ++mismatched;
      }
    }
    c.req(mismatched == 0,
          fmt("%s: %lld views differ between rotate-then-render and render-then-permute",
              to_string(kind).c_str(), mismatched));
    if (mismatched == 0)
      c.note(fmt("%s: 20 shapes x 60 rotations x %d views, all pixel-identical",
                 to_string(kind).c_str(), cfg.n_views()));
  }
}

// ---- criterion 8: in-plane rotations as circular shifts ------------------------

void c8_polar(Ctx& c) {
  // A band-limited ring: angular harmonics up to order 3 under a radial
  // Gaussian that decays to ~1e-4 before the image boundary and the center.
  const int N = 701;
  const double cx = 350, cy = 350, r0 = 150, sigma = 50;
  const std::array<double, 4> amp{0.4, 0.3, 0.2, 0.1};
  const std::array<double, 4> phase{0.3, 1.1, 2.0, 4.2};
  const auto f = [&](double dx, double dy) {
    const double r = std::hypot(dx, dy);
    const double th = std::atan2(dy, dx);
    double v = 0;
    for (int m = 0; m < 4; ++m) v += amp[size_t(m)] * std::cos(m * th + phase[size_t(m)]);
    const double u = (r - r0) / sigma;
    return v * std::exp(-u * u);
  };
  const auto build = [&](double alpha) {
    Tensor img = Tensor::zeros({N, N, 1});
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    for (int y = 0; y < N; ++y)
      for (int x = 0; x < N; ++x) {
        const double dx = x - cx, dy = y - cy;
        // The image rotated by alpha evaluates the field at coordinates
        // rotated back by alpha.
        img.data[size_t(y) * N + size_t(x)] = f(ca * dx + sa * dy, -sa * dx + ca * dy);
      }
    return img;
  };

  PolarSpec ps;
  ps.r_bins = 48;
  ps.theta_bins = 64;
  const double step = 2.0 * M_PI / ps.theta_bins;

  const Tensor img0 = build(0);
  const PolarImage p0 = log_polar(img0, cx, cy, ps);
  double worst = 0;
  for (int j : {1, 5, 16}) {
    const PolarImage pj = log_polar(build(j * step), cx, cy, ps);
    worst = std::max(worst, max_abs_diff(pj.data, shift_theta(p0.data, j)));
  }
  c.req(worst < kTolPolarShift,
        fmt("rotation by k steps of 2*pi/64 vs k-step circular shift: %.3e", worst));
  c.note(fmt("rotations of 1, 5, 16 theta steps: worst deviation from the shifted "
             "transform %.2e (tol %g)",
             worst, kTolPolarShift));

  // Circular encoder on the polar grid: descriptors ignore theta shifts.
  const EncoderConfig ec = polar_encoder_config({4, 6}, 1);
  Rng erng(8);
  const Encoder enc = make_encoder(ec, erng);
  const auto desc = [&](Tensor grid) {
    grid.shape = {1, ps.r_bins, ps.theta_bins, 1};
    Tape t;
    const std::vector<Tape::Var> params = push_encoder(t, enc, false);
    return t.value(encoder_forward(t, ec, params, t.input(std::move(grid), false)));
  };
  const Tensor d0 = desc(p0.data);
  double worst_inv = 0;
  for (int m : {1, 7, 32})
    worst_inv = std::max(worst_inv, max_abs_diff(d0, desc(shift_theta(p0.data, m))));
  c.req(worst_inv < kTolPolarInv,
        fmt("circular encoder shift invariance: worst deviation %.3e", worst_inv));
  c.note(fmt("encoder descriptor under theta shifts 1, 7, 32: worst deviation %.2e "
             "(tol %g)",
             worst_inv, kTolPolarInv));
}

// ---- criteria 9 and 10: trained-model comparisons ------------------------------

struct BenchSeed {
  double acc_g = 0, map_g = 0;   // localized-aggregation model
  double acc_m = 0, map_m = 0;   // mean-pooling baseline (no head layers)
  double acc_s3 = 0;             // support shrunk to 3
  std::array<double, 4> acc_views{};  // 60, 30, 15, 5 test-time views
  std::array<double, 5> acc_jitter{}; // sigma = 0, 5, 15, 30, 45 degrees
  double desc_dev = 0;           // descriptor deviation under view permutations
};

struct Bench {
  std::vector<BenchSeed> seeds;
  double seconds = 0;
  std::vector<std::string> log;
  std::string error;
};

std::vector<int> spaced_subset(int total, int take) {
  std::vector<int> out;
  for (int i = 0; i < take; ++i) out.push_back(i * total / take);
  return out;
}

Bench build_bench() {
  Bench bench;
  const double t0 = now_seconds();
  try {
    for (int s = 1; s <= 3; ++s) {
      const DatasetSpec spec; // 8 classes, 100/30, random poses, 256 points
      const RenderSpec rs;
      Dataset ds = make_dataset(spec, ConfigKind::V60x1, 2.5, 0, rs, 1000 + s);
      const CameraConfig cfg = ds.camera_config();

      const EncoderConfig ec; // widths 8, 12, 16, 24
      HeadConfig hg;          // 3 layers, 24 channels, support 9, proj 24
      TrainConfig tc;
      tc.keep_lo = 15;
      tc.keep_hi = 60;
      tc.seed = std::uint64_t(20 + s);

      BenchSeed out;

      Rng r1(std::uint64_t(10 + s));
      MVNet gnet = make_mvnet(ec, hg, r1);
      const TrainResult tg = train_mvnet(gnet, ds, cfg, tc);
      out.acc_g = tg.test.acc;
      out.map_g = tg.test.retrieval.map_micro;

      HeadConfig hm = hg;
      hm.layers = 0;
      Rng r2(std::uint64_t(10 + s));
      MVNet mnet = make_mvnet(ec, hm, r2);
      const TrainResult tm = train_mvnet(mnet, ds, cfg, tc);
      out.acc_m = tm.test.acc;
      out.map_m = tm.test.retrieval.map_micro;

      HeadConfig h3 = hg;
      h3.support = 3;
      Rng r3(std::uint64_t(10 + s));
      MVNet snet = make_mvnet(ec, h3, r3);
      const TrainResult ts = train_mvnet(snet, ds, cfg, tc);
      out.acc_s3 = ts.test.acc;

      ds.train.clear();
      ds.train.shrink_to_fit();

      std::vector<int> labels;
      for (const Instance& inst : ds.test) labels.push_back(inst.class_id);
      const Tensor feats = encode_views(gnet, ds.test);
      const std::array<int, 4> view_counts{60, 30, 15, 5};
      for (size_t i = 0; i < view_counts.size(); ++i) {
        const std::vector<int> subset = spaced_subset(60, view_counts[i]);
        const EvalResult er = eval_from_features(gnet, cfg, feats, labels,
                                                 view_counts[i] == 60 ? nullptr : &subset);
        out.acc_views[i] = er.acc;
      }

      // Descriptor invariance of the trained model: permuting the view rows
      // by any group element leaves the pooled descriptor (nearly) unchanged.
      {
        const FiniteGroup& g = *cfg.group;
        const int v = cfg.n_views(), d = ec.out_dim();
        Tensor rows = Tensor::zeros({v, d});
        std::copy_n(feats.data.begin(), rows.data.size(), rows.data.begin());
        std::vector<int> kept(static_cast<size_t>(v));
        std::iota(kept.begin(), kept.end(), 0);
        const auto head_desc = [&](const Tensor& rws) {
          Tape t;
          const NetVars nv = push_net(t, gnet, false);
          const NetOut o = net_head_forward(t, gnet, nv, cfg, t.input(rws, false), kept);
          return t.value(o.desc);
        };
        const Tensor base = head_desc(rows);
        for (int k = 0; k < g.order; ++k) {
          Tensor prows = Tensor::zeros({v, d});
          for (int y = 0; y < v; ++y) {
            const int src = g.at(g.inverse[size_t(k)], y);
            std::copy_n(rows.data.begin() + size_t(src) * d, size_t(d),
                        prows.data.begin() + size_t(y) * d);
          }
          out.desc_dev = std::max(out.desc_dev, max_abs_diff(base, head_desc(prows)));
        }
      }

      for (Instance& inst : ds.test) {
        inst.views = Tensor(); // re-rendered below; drop the cached pixels
      }
      const std::array<double, 5> sigmas{0, 5, 15, 30, 45};
      for (size_t i = 0; i < sigmas.size(); ++i) {
        double acc = 0;
        for (int draw = 0; draw < 2; ++draw)
          acc += eval_jittered(gnet, ds.test, cfg, rs, spec.points_per_shape, sigmas[i],
                               std::uint64_t(7000 + 100 * s + draw))
                     .acc;
        out.acc_jitter[i] = acc / 2;
      }

      bench.log.push_back(
          fmt("seed %d: localized acc %.4f map %.4f | mean-pool acc %.4f map %.4f | "
              "support3 acc %.4f | views 60/30/15/5 %.4f %.4f %.4f %.4f | "
              "jitter 0/5/15/30/45 %.4f %.4f %.4f %.4f %.4f | desc dev %.1e",
              s, out.acc_g, out.map_g, out.acc_m, out.map_m, out.acc_s3, out.acc_views[0],
              out.acc_views[1], out.acc_views[2], out.acc_views[3], out.acc_jitter[0],
              out.acc_jitter[1], out.acc_jitter[2], out.acc_jitter[3], out.acc_jitter[4],
              out.desc_dev));
      bench.seeds.push_back(out);
    }
  } catch (const std::exception& e) {
    bench.error = e.what();
  }
  bench.seconds = now_seconds() - t0;
  return bench;
}

const Bench& get_bench() {
  static const Bench bench = build_bench();
  return bench;
}

template <typename Get>
double seed_mean(const Bench& b, Get get) {
  double sum = 0;
  for (const BenchSeed& s : b.seeds) sum += get(s);
  return sum / double(b.seeds.size());
}

void c9_headline(Ctx& c) {
  const Bench& b = get_bench();
  if (!b.error.empty()) {
    c.req(false, "training benchmark failed: " + b.error);
    return;
  }
  for (const std::string& line : b.log) c.note(line);

  const double acc_g = seed_mean(b, [](const BenchSeed& s) { return s.acc_g; });
  const double acc_m = seed_mean(b, [](const BenchSeed& s) { return s.acc_m; });
  const double map_g = seed_mean(b, [](const BenchSeed& s) { return s.map_g; });
  const double map_m = seed_mean(b, [](const BenchSeed& s) { return s.map_m; });
  c.req(acc_g > acc_m, fmt("mean test accuracy: localized %.4f vs mean-pool %.4f", acc_g,
                           acc_m));
  c.req(map_g > map_m, fmt("mean retrieval mAP: localized %.4f vs mean-pool %.4f", map_g,
                           map_m));
  c.note(fmt("3-seed means: accuracy %.4f vs %.4f (margin %+.4f), mAP %.4f vs %.4f "
             "(margin %+.4f)",
             acc_g, acc_m, acc_g - acc_m, map_g, map_m, map_g - map_m));

  double dev = 0;
  for (const BenchSeed& s : b.seeds) dev = std::max(dev, s.desc_dev);
  c.req(dev < kTolDescInv,
        fmt("trained-model descriptor invariance: worst deviation %.3e", dev));
  c.note(fmt("descriptor invariance under all 60 view permutations: worst %.2e (tol %g)",
             dev, kTolDescInv));
  c.req(b.seconds < kBudgetBench,
        fmt("benchmark runtime %.0f s exceeds the %.0f s budget", b.seconds, kBudgetBench));
  c.note(fmt("shared benchmark (9 trainings + evaluations): %.0f s", b.seconds));
}

void c10_ablations(Ctx& c) {
  const Bench& b = get_bench();
  if (!b.error.empty()) {
    c.req(false, "training benchmark failed: " + b.error);
    return;
  }

  const double acc_g = seed_mean(b, [](const BenchSeed& s) { return s.acc_g; });
  const double acc_s3 = seed_mean(b, [](const BenchSeed& s) { return s.acc_s3; });
  c.req(acc_s3 <= acc_g,
        fmt("mean accuracy must not rise when support shrinks 9 -> 3: %.4f -> %.4f", acc_g,
            acc_s3));
  c.note(fmt("support ablation, 3-seed means: support 9 %.4f, support 3 %.4f", acc_g,
             acc_s3));

  std::array<double, 4> views{};
  for (size_t i = 0; i < views.size(); ++i)
    views[i] = seed_mean(b, [i](const BenchSeed& s) { return s.acc_views[i]; });
  bool mono_views = true;
  for (size_t i = 1; i < views.size(); ++i) mono_views = mono_views && views[i] <= views[i - 1];
  c.req(mono_views, fmt("mean accuracy over 60/30/15/5 test views must be non-increasing: "
                        "%.4f %.4f %.4f %.4f",
                        views[0], views[1], views[2], views[3]));
  c.note(fmt("view ablation, 3-seed means: 60 views %.4f, 30 %.4f, 15 %.4f, 5 %.4f",
             views[0], views[1], views[2], views[3]));

  std::array<double, 5> jit{};
  for (size_t i = 0; i < jit.size(); ++i)
    jit[i] = seed_mean(b, [i](const BenchSeed& s) { return s.acc_jitter[i]; });
  bool mono_jit = true;
  for (size_t i = 1; i < jit.size(); ++i) mono_jit = mono_jit && jit[i] <= jit[i - 1];
  c.req(mono_jit, fmt("mean accuracy under pose jitter 0/5/15/30/45 degrees must be "
                      "non-increasing: %.4f %.4f %.4f %.4f %.4f",
                      jit[0], jit[1], jit[2], jit[3], jit[4]));
  c.note(fmt("pose jitter, means of 3 seeds x 2 draws: 0deg %.4f, 5 %.4f, 15 %.4f, "
             "30 %.4f, 45 %.4f",
             jit[0], jit[1], jit[2], jit[3], jit[4]));
}

// ---- criterion 11: retrieval metrics vs a brute-force oracle -------------------

RetrievalMetrics oracle_eval(const Tensor& desc, const std::vector<int>& labels,
                             const std::vector<int>* pred, bool rerank) {
  const int n = desc.dim(0), d = desc.dim(1);
  std::vector<std::vector<double>> u(static_cast<size_t>(n),
                                     std::vector<double>(static_cast<size_t>(d), 0.0));
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j < d; ++j) s += desc.data[size_t(i) * d + j] * desc.data[size_t(i) * d + j];
    s = std::sqrt(s);
    for (int j = 0; j < d; ++j)
      u[size_t(i)][size_t(j)] = s < 1e-9 ? desc.data[size_t(i) * d + j]
                                         : desc.data[size_t(i) * d + j] / s;
  }
  const auto pclass = [&](int i) { return pred ? (*pred)[size_t(i)] : labels[size_t(i)]; };

  RetrievalMetrics out;
  std::map<int, std::pair<double, int>> per_class;
  for (int q = 0; q < n; ++q) {
    int n_rel = 0;
    for (int g = 0; g < n; ++g)
      if (g != q && labels[size_t(g)] == labels[size_t(q)]) ++n_rel;
    if (n_rel == 0) continue;

    std::vector<std::pair<double, int>> scored;
    for (int g = 0; g < n; ++g) {
      if (g == q) continue;
      double s = 0;
      for (int j = 0; j < d; ++j) s += u[size_t(q)][size_t(j)] * u[size_t(g)][size_t(j)];
      scored.emplace_back(s, g);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<int> order;
    if (rerank && pred) {
      // Stable two-pass partition by predicted-class match.
      for (const auto& [s, g] : scored)
        if (pclass(g) == pclass(q)) order.push_back(g);
      for (const auto& [s, g] : scored)
        if (pclass(g) != pclass(q)) order.push_back(g);
    } else {
      for (const auto& [s, g] : scored) order.push_back(g);
    }

    int hits = 0;
    double ap = 0;
    for (size_t k = 0; k < order.size(); ++k)
      if (labels[size_t(order[k])] == labels[size_t(q)]) {
        ++hits;
        ap += double(hits) / double(k + 1);
      }
    ap /= n_rel;
    out.map_micro += ap;
    per_class[labels[size_t(q)]].first += ap;
    per_class[labels[size_t(q)]].second += 1;

    int n_pred = 0;
    for (int g = 0; g < n; ++g)
      if (g != q && pclass(g) == pclass(q)) ++n_pred;
    double p = 0, r = 0, f1 = 0;
    if (n_pred > 0) {
      int top = 0;
      for (int k = 0; k < n_pred; ++k)
        top += labels[size_t(order[size_t(k)])] == labels[size_t(q)];
      p = double(top) / n_pred;
      r = double(top) / n_rel;
      if (p + r > 0) f1 = 2 * p * r / (p + r);
    }
    out.mean_p_at_n += p;
    out.mean_r_at_n += r;
    out.mean_f1_at_n += f1;
    ++out.queries;
  }
  if (out.queries) {
    out.map_micro /= out.queries;
    out.mean_p_at_n /= out.queries;
    out.mean_r_at_n /= out.queries;
    out.mean_f1_at_n /= out.queries;
  }
  for (const auto& [label, sum_count] : per_class)
    out.map_macro += sum_count.first / sum_count.second;
  if (!per_class.empty()) out.map_macro /= double(per_class.size());
  return out;
}

void c11_retrieval(Ctx& c) {
  Rng rng(11);
  bool exact = true, partition_ok = true;
  int galleries = 0;
  for (int t = 0; t < 20; ++t) {
    const int n = rng.uniform_int(6, 25);
    const int d = rng.uniform_int(2, 6);
    const int classes = rng.uniform_int(2, 4);
    const Tensor desc = randn(rng, {n, d});
    std::vector<int> labels, pred;
    for (int i = 0; i < n; ++i) labels.push_back(rng.uniform_int(0, classes - 1));
    for (int i = 0; i < n; ++i)
      pred.push_back(rng.uniform() < 0.2 ? rng.uniform_int(0, classes - 1)
                                         : labels[size_t(i)]);
    ++galleries;

    for (int mode = 0; mode < 3; ++mode) {
      const std::vector<int>* pp = mode == 0 ? nullptr : &pred;
      const bool rr = mode == 2;
      const RetrievalMetrics got = evaluate_retrieval(desc, labels, pp, rr);
      const RetrievalMetrics want = oracle_eval(desc, labels, pp, rr);
      exact = exact && got.map_micro == want.map_micro && got.map_macro == want.map_macro &&
              got.mean_p_at_n == want.mean_p_at_n && got.mean_r_at_n == want.mean_r_at_n &&
              got.mean_f1_at_n == want.mean_f1_at_n && got.queries == want.queries;
    }

    // Reranking must be a stable partition of the unreranked order.
    for (int q = 0; q < n; ++q) {
      std::vector<int> plain = ranked_gallery(desc, q, &pred, false);
      const std::vector<int> rer = ranked_gallery(desc, q, &pred, true);
      std::stable_partition(plain.begin(), plain.end(),
                            [&](int g) { return pred[size_t(g)] == pred[size_t(q)]; });
      partition_ok = partition_ok && plain == rer;
    }
  }
  c.req(exact, "metrics equal the brute-force oracle exactly on every gallery");
  c.req(partition_ok, "reranked order is the stable partition of the plain order");
  if (exact && partition_ok)
    c.note(fmt("%d random galleries: mAP (micro and macro), P@N, R@N, F1@N all exactly "
               "equal to the oracle; rerank = stable partition for every query",
               galleries));
}

// ---- runner --------------------------------------------------------------------

struct Criterion {
  int id;
  const char* title;
  void (*run)(Ctx&);
  double budget; // seconds; 0 = unenforced
};

const Criterion kCriteria[] = {
    {1, "group axioms for c12, d6, tet, oct, ico", c1_groups, kBudgetGroups},
    {2, "exact equivariance of gconv, hconv, hcorr", c2_equivariance, kBudgetEquiv},
    {3, "optimized kernels match literal sums", c3_oracles, 0},
    {4, "delta filters collapse to mean view pooling", c4_degeneracy, 0},
    {5, "receptive-field confinement and support closure", c5_receptive, 0},
    {6, "central-difference gradient audit", c6_gradients, 0},
    {7, "rotate-then-render equals render-then-permute", c7_render, kBudgetRender},
    {8, "in-plane rotations act as circular shifts", c8_polar, 0},
    {9, "localized aggregation beats mean pooling", c9_headline, kBudgetBench},
    {10, "support, view-count, and jitter ablations", c10_ablations, 0},
    {11, "retrieval metrics match a brute-force oracle", c11_retrieval, 0},
};

} // namespace

std::vector<CriterionResult> run_acceptance(const std::vector<int>& only) {
  for (int id : only) {
    bool known = false;
    for (const Criterion& cr : kCriteria) known = known || cr.id == id;
    if (!known) throw std::invalid_argument(fmt("unknown criterion id %d", id));
  }
  std::vector<CriterionResult> out;
  for (const Criterion& cr : kCriteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), cr.id) == only.end()) continue;
    CriterionResult r;
    r.id = cr.id;
    r.title = cr.title;
    Ctx ctx{r};
    const double t0 = now_seconds();
    try {
      cr.run(ctx);
    } catch (const std::exception& e) {
      ctx.ok = false;
      r.notes.push_back(std::string("exception: ") + e.what());
    }
    r.seconds = now_seconds() - t0;
    if (cr.budget > 0 && r.seconds > cr.budget) {
      ctx.ok = false;
      r.notes.push_back(
          fmt("violated: runtime %.1f s exceeds the %.0f s budget", r.seconds, cr.budget));
    }
    r.pass = ctx.ok;
    out.push_back(std::move(r));
  }
  return out;
}

bool print_report(const std::vector<CriterionResult>& results, std::FILE* out) {
  int passed = 0;
  for (const CriterionResult& r : results) {
    std::fprintf(out, "[%2d] %s %8.1fs  %s\n", r.id, r.pass ? "PASS" : "FAIL", r.seconds,
                 r.title.c_str());
    for (const std::string& n : r.notes) std::fprintf(out, "       - %s\n", n.c_str());
    passed += r.pass;
  }
  std::fprintf(out, "result: %d/%zu criteria passed\n", passed, results.size());
  std::fflush(out);
  return passed == static_cast<int>(results.size());
}

} // namespace finrot
