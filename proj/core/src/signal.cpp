#include "finrot/signal.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "finrot/log.hpp"

namespace finrot {

namespace {

void check_support(int domain_size, std::span<const int> support) {
  if (support.empty()) throw std::invalid_argument("filter support is empty");
  for (int s : support)
    if (s < 0 || s >= domain_size) throw std::invalid_argument("support index out of range");
}

void check_filter(const LocalizedFilter& h) {
  if (h.weights.shape.size() != 3 ||
      h.weights.dim(2) != static_cast<int>(h.support.size()))
    throw std::invalid_argument("filter weights must be [C_out, C_in, |S|]");
}

// Plan caches keyed by (structure hash, support). Plans are immutable after
// construction; the mutex only guards insertion.
template <typename Plan>
const Plan& cached(std::uint64_t key_hash, std::span<const int> support,
                   Plan (*build)(std::uint64_t, std::span<const int>)) {
  using Key = std::pair<std::uint64_t, std::vector<int>>;
  static std::map<Key, std::unique_ptr<Plan>>* cache = new std::map<Key, std::unique_ptr<Plan>>;
  static std::mutex* mu = new std::mutex;
  Key key{key_hash, {support.begin(), support.end()}};
  std::lock_guard<std::mutex> lock(*mu);
  auto it = cache->find(key);
  if (it == cache->end())
    it = cache->emplace(std::move(key), std::make_unique<Plan>(build(key_hash, support))).first;
  return *it->second;
}

// Registry so plan builders can reach the structure from its hash. Entries
// are inserted on first use and never removed; callers keep the structures
// alive for the duration of the run.
std::map<std::uint64_t, const FiniteGroup*>& group_registry() {
  static auto* r = new std::map<std::uint64_t, const FiniteGroup*>;
  return *r;
}
std::map<std::uint64_t, const HSpace*>& hspace_registry() {
  static auto* r = new std::map<std::uint64_t, const HSpace*>;
  return *r;
}
std::mutex& registry_mutex() {
  static auto* m = new std::mutex;
  return *m;
}

std::uint64_t hspace_hash(const HSpace& h) {
  return group_hash(*h.group) * 1099511628211ull + static_cast<std::uint64_t>(h.kind) * 2654435761ull;
}

GConvPlan build_gconv_plan(std::uint64_t gh, std::span<const int> support) {
  const FiniteGroup* g;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    g = group_registry().at(gh);
  }
  check_support(g->order, support);
  GConvPlan p;
  p.n = g->order;
  p.s = static_cast<int>(support.size());
  p.idx.resize(static_cast<size_t>(p.n) * p.s);
  for (int y = 0; y < p.n; ++y)
    for (int j = 0; j < p.s; ++j)
      p.idx[static_cast<size_t>(y) * p.s + j] = g->at(y, g->inverse[support[j]]);
  return p;
}

HConvPlan build_hconv_plan(std::uint64_t hh, std::span<const int> support) {
  const HSpace* h;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    h = hspace_registry().at(hh);
  }
  check_support(h->size(), support);
  const FiniteGroup& g = *h->group;
  HConvPlan p;
  p.nx = h->size();
  p.s = static_cast<int>(support.size());
  p.m = g.order / h->size();
  p.gather.assign(static_cast<size_t>(p.nx) * p.s * p.m, -1);
  p.feta.resize(g.order);
  for (int e = 0; e < g.order; ++e) p.feta[e] = h->act(e, h->eta);
  // Transporter cosets: for each target x and support point S[j], the set
  // {g : act(g^-1, x) = S[j]} has exactly m members.
  std::vector<int> fill(static_cast<size_t>(p.nx) * p.s, 0);
  for (int e = 0; e < g.order; ++e) {
    int einv = g.inverse[e];
    for (int x = 0; x < p.nx; ++x) {
      int src = h->act(einv, x);
      for (int j = 0; j < p.s; ++j)
        if (support[j] == src) {
          size_t cell = static_cast<size_t>(x) * p.s + j;
          p.gather[cell * p.m + fill[cell]++] = e;
        }
    }
  }
  for (size_t cell = 0; cell < fill.size(); ++cell)
    if (fill[cell] != p.m) throw std::logic_error("transporter coset has unexpected size");
  return p;
}

HCorrPlan build_hcorr_plan(std::uint64_t hh, std::span<const int> support) {
  const HSpace* h;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    h = hspace_registry().at(hh);
  }
  check_support(h->size(), support);
  const FiniteGroup& g = *h->group;
  HCorrPlan p;
  p.ng = g.order;
  p.s = static_cast<int>(support.size());
  p.idx.resize(static_cast<size_t>(p.ng) * p.s);
  for (int e = 0; e < p.ng; ++e)
    for (int j = 0; j < p.s; ++j) p.idx[static_cast<size_t>(e) * p.s + j] = h->act(e, support[j]);
  return p;
}

} // namespace

LocalizedFilter delta_filter(int channels) {
  LocalizedFilter f;
  f.support = {0};
  f.weights = Tensor({channels, channels, 1});
  for (int c = 0; c < channels; ++c)
    f.weights[static_cast<std::int64_t>(c) * channels + c] = 1.0;
  return f;
}

bool support_generates(const FiniteGroup& g, std::span<const int> support) {
  return static_cast<int>(generated_closure(g, support).indices.size()) == g.order;
}

void warn_if_not_generating(const FiniteGroup& g, std::span<const int> support) {
  if (!support_generates(g, support))
    log_warn("filter support generates a proper subgroup; stacked layers cannot reach "
             "full receptive field");
}

const GConvPlan& gconv_plan(const FiniteGroup& g, std::span<const int> support) {
  std::uint64_t gh = group_hash(g);
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    group_registry()[gh] = &g;
  }
  return cached<GConvPlan>(gh, support, build_gconv_plan);
}

const HConvPlan& hconv_plan(const HSpace& h, std::span<const int> support) {
  std::uint64_t hh = hspace_hash(h);
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    hspace_registry()[hh] = &h;
  }
  return cached<HConvPlan>(hh, support, build_hconv_plan);
}

const HCorrPlan& hcorr_plan(const HSpace& h, std::span<const int> support) {
  std::uint64_t hh = hspace_hash(h);
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    hspace_registry()[hh] = &h;
  }
  return cached<HCorrPlan>(hh, support, build_hcorr_plan);
}

// ---- gconv kernels ---------------------------------------------------------

void gconv_forward(const GConvPlan& p, const Tensor& f, const Tensor& w, Tensor& out) {
  const int B = f.dim(0), ci = f.dim(2), co = w.dim(0);
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < p.n; ++y) {
      double* o = &out.data[(static_cast<size_t>(b) * p.n + y) * co];
      for (int j = 0; j < co; ++j) o[j] = 0;
      for (int s = 0; s < p.s; ++s) {
        const double* fr = &f.data[(static_cast<size_t>(b) * p.n + p.idx[static_cast<size_t>(y) * p.s + s]) * ci];
        const double* ws = &w.data[static_cast<size_t>(s)];
        for (int j = 0; j < co; ++j) {
          const double* wrow = ws + static_cast<size_t>(j) * ci * p.s;
          double acc = 0;
          for (int i = 0; i < ci; ++i) acc += fr[i] * wrow[static_cast<size_t>(i) * p.s];
          o[j] += acc;
        }
      }
    }
}

void gconv_backward_input(const GConvPlan& p, const Tensor& gout, const Tensor& w, Tensor& gin) {
  const int B = gout.dim(0), co = gout.dim(2), ci = gin.dim(2);
  for (auto& v : gin.data) v = 0;
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < p.n; ++y) {
      const double* go = &gout.data[(static_cast<size_t>(b) * p.n + y) * co];
      for (int s = 0; s < p.s; ++s) {
        double* gi = &gin.data[(static_cast<size_t>(b) * p.n + p.idx[static_cast<size_t>(y) * p.s + s]) * ci];
        for (int j = 0; j < co; ++j) {
          const double* wrow = &w.data[(static_cast<size_t>(j) * ci) * p.s + s];
          double g = go[j];
          for (int i = 0; i < ci; ++i) gi[i] += g * wrow[static_cast<size_t>(i) * p.s];
        }
      }
    }
}

void gconv_backward_weights(const GConvPlan& p, const Tensor& gout, const Tensor& f, Tensor& gw) {
  const int B = gout.dim(0), co = gout.dim(2), ci = f.dim(2);
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < p.n; ++y) {
      const double* go = &gout.data[(static_cast<size_t>(b) * p.n + y) * co];
      for (int s = 0; s < p.s; ++s) {
        const double* fr = &f.data[(static_cast<size_t>(b) * p.n + p.idx[static_cast<size_t>(y) * p.s + s]) * ci];
        for (int j = 0; j < co; ++j) {
          double g = go[j];
          double* wrow = &gw.data[(static_cast<size_t>(j) * ci) * p.s + s];
          for (int i = 0; i < ci; ++i) wrow[static_cast<size_t>(i) * p.s] += g * fr[i];
        }
      }
    }
}

// ---- hconv kernels ---------------------------------------------------------

void hconv_forward(const HConvPlan& p, const Tensor& f, const Tensor& w, Tensor& out) {
  const int B = f.dim(0), ci = f.dim(2), co = w.dim(0);
  std::vector<double> acc(static_cast<size_t>(ci));
  for (int b = 0; b < B; ++b)
    for (int x = 0; x < p.nx; ++x) {
      double* o = &out.data[(static_cast<size_t>(b) * p.nx + x) * co];
      for (int j = 0; j < co; ++j) o[j] = 0;
      for (int s = 0; s < p.s; ++s) {
        for (int i = 0; i < ci; ++i) acc[static_cast<size_t>(i)] = 0;
        const int* cell = &p.gather[(static_cast<size_t>(x) * p.s + s) * p.m];
        for (int t = 0; t < p.m; ++t) {
          const double* fr = &f.data[(static_cast<size_t>(b) * p.nx + p.feta[cell[t]]) * ci];
          for (int i = 0; i < ci; ++i) acc[static_cast<size_t>(i)] += fr[i];
        }
        for (int j = 0; j < co; ++j) {
          const double* wrow = &w.data[(static_cast<size_t>(j) * ci) * p.s + s];
          double sum = 0;
          for (int i = 0; i < ci; ++i) sum += acc[static_cast<size_t>(i)] * wrow[static_cast<size_t>(i) * p.s];
          o[j] += sum;
        }
      }
    }
}

void hconv_backward_input(const HConvPlan& p, const Tensor& gout, const Tensor& w, Tensor& gin) {
  const int B = gout.dim(0), co = gout.dim(2), ci = gin.dim(2);
  for (auto& v : gin.data) v = 0;
  std::vector<double> tmp(static_cast<size_t>(ci));
  for (int b = 0; b < B; ++b)
    for (int x = 0; x < p.nx; ++x) {
      const double* go = &gout.data[(static_cast<size_t>(b) * p.nx + x) * co];
      for (int s = 0; s < p.s; ++s) {
        for (int i = 0; i < ci; ++i) {
          double sum = 0;
          for (int j = 0; j < co; ++j)
            sum += go[j] * w.data[(static_cast<size_t>(j) * ci + i) * p.s + s];
          tmp[static_cast<size_t>(i)] = sum;
        }
        const int* cell = &p.gather[(static_cast<size_t>(x) * p.s + s) * p.m];
        for (int t = 0; t < p.m; ++t) {
          double* gi = &gin.data[(static_cast<size_t>(b) * p.nx + p.feta[cell[t]]) * ci];
          for (int i = 0; i < ci; ++i) gi[i] += tmp[static_cast<size_t>(i)];
        }
      }
    }
}

void hconv_backward_weights(const HConvPlan& p, const Tensor& gout, const Tensor& f, Tensor& gw) {
  const int B = gout.dim(0), co = gout.dim(2), ci = f.dim(2);
  std::vector<double> acc(static_cast<size_t>(ci));
  for (int b = 0; b < B; ++b)
    for (int x = 0; x < p.nx; ++x) {
      const double* go = &gout.data[(static_cast<size_t>(b) * p.nx + x) * co];
      for (int s = 0; s < p.s; ++s) {
        for (int i = 0; i < ci; ++i) acc[static_cast<size_t>(i)] = 0;
        const int* cell = &p.gather[(static_cast<size_t>(x) * p.s + s) * p.m];
        for (int t = 0; t < p.m; ++t) {
          const double* fr = &f.data[(static_cast<size_t>(b) * p.nx + p.feta[cell[t]]) * ci];
          for (int i = 0; i < ci; ++i) acc[static_cast<size_t>(i)] += fr[i];
        }
        for (int j = 0; j < co; ++j) {
          double g = go[j];
          double* wrow = &gw.data[(static_cast<size_t>(j) * ci) * p.s + s];
          for (int i = 0; i < ci; ++i) wrow[static_cast<size_t>(i) * p.s] += g * acc[static_cast<size_t>(i)];
        }
      }
    }
}

// ---- hcorr kernels ---------------------------------------------------------

void hcorr_forward(const HCorrPlan& p, const Tensor& f, const Tensor& w, Tensor& out) {
  const int B = f.dim(0), nx = f.dim(1), ci = f.dim(2), co = w.dim(0);
  for (int b = 0; b < B; ++b)
    for (int e = 0; e < p.ng; ++e) {
      double* o = &out.data[(static_cast<size_t>(b) * p.ng + e) * co];
      for (int j = 0; j < co; ++j) o[j] = 0;
      for (int s = 0; s < p.s; ++s) {
        const double* fr = &f.data[(static_cast<size_t>(b) * nx + p.idx[static_cast<size_t>(e) * p.s + s]) * ci];
        for (int j = 0; j < co; ++j) {
          const double* wrow = &w.data[(static_cast<size_t>(j) * ci) * p.s + s];
          double acc = 0;
          for (int i = 0; i < ci; ++i) acc += fr[i] * wrow[static_cast<size_t>(i) * p.s];
          o[j] += acc;
        }
      }
    }
}

void hcorr_backward_input(const HCorrPlan& p, const Tensor& gout, const Tensor& w, Tensor& gin) {
  const int B = gout.dim(0), co = gout.dim(2), nx = gin.dim(1), ci = gin.dim(2);
  for (auto& v : gin.data) v = 0;
  for (int b = 0; b < B; ++b)
    for (int e = 0; e < p.ng; ++e) {
      const double* go = &gout.data[(static_cast<size_t>(b) * p.ng + e) * co];
      for (int s = 0; s < p.s; ++s) {
        double* gi = &gin.data[(static_cast<size_t>(b) * nx + p.idx[static_cast<size_t>(e) * p.s + s]) * ci];
        for (int j = 0; j < co; ++j) {
          const double* wrow = &w.data[(static_cast<size_t>(j) * ci) * p.s + s];
          double g = go[j];
          for (int i = 0; i < ci; ++i) gi[i] += g * wrow[static_cast<size_t>(i) * p.s];
        }
      }
    }
}

void hcorr_backward_weights(const HCorrPlan& p, const Tensor& gout, const Tensor& f, Tensor& gw) {
  const int B = gout.dim(0), co = gout.dim(2), nx = f.dim(1), ci = f.dim(2);
  for (int b = 0; b < B; ++b)
    for (int e = 0; e < p.ng; ++e) {
      const double* go = &gout.data[(static_cast<size_t>(b) * p.ng + e) * co];
      for (int s = 0; s < p.s; ++s) {
        const double* fr = &f.data[(static_cast<size_t>(b) * nx + p.idx[static_cast<size_t>(e) * p.s + s]) * ci];
        for (int j = 0; j < co; ++j) {
          double g = go[j];
          double* wrow = &gw.data[(static_cast<size_t>(j) * ci) * p.s + s];
          for (int i = 0; i < ci; ++i) wrow[static_cast<size_t>(i) * p.s] += g * fr[i];
        }
      }
    }
}

// ---- eager ops -------------------------------------------------------------

GroupSignal gconv(const GroupSignal& f, const LocalizedFilter& h) {
  check_filter(h);
  if (f.channels() != h.in_channels()) throw std::invalid_argument("gconv: channel mismatch");
  if (f.rows() != f.group->order) throw std::invalid_argument("gconv: row count != |G|");
  const GConvPlan& p = gconv_plan(*f.group, h.support);
  GroupSignal out;
  out.group = f.group;
  out.data = Tensor({f.batch(), f.rows(), h.out_channels()});
  gconv_forward(p, f.data, h.weights, out.data);
  return out;
}

HSpaceSignal hconv(const HSpaceSignal& f, const LocalizedFilter& h) {
  check_filter(h);
  if (f.channels() != h.in_channels()) throw std::invalid_argument("hconv: channel mismatch");
  if (f.rows() != f.space->size()) throw std::invalid_argument("hconv: row count != |X|");
  const HConvPlan& p = hconv_plan(*f.space, h.support);
  HSpaceSignal out;
  out.space = f.space;
  out.data = Tensor({f.batch(), f.rows(), h.out_channels()});
  hconv_forward(p, f.data, h.weights, out.data);
  return out;
}

GroupSignal hcorr(const HSpaceSignal& f, const LocalizedFilter& h) {
  check_filter(h);
  if (f.channels() != h.in_channels()) throw std::invalid_argument("hcorr: channel mismatch");
  if (f.rows() != f.space->size()) throw std::invalid_argument("hcorr: row count != |X|");
  const HCorrPlan& p = hcorr_plan(*f.space, h.support);
  GroupSignal out;
  out.group = f.space->group;
  out.data = Tensor({f.batch(), f.space->group->order, h.out_channels()});
  hcorr_forward(p, f.data, h.weights, out.data);
  return out;
}

GroupSignal apply_action(int k, const GroupSignal& f) {
  const FiniteGroup& g = *f.group;
  if (k < 0 || k >= g.order) throw std::invalid_argument("apply_action: element out of range");
  GroupSignal out;
  out.group = f.group;
  out.data = Tensor(f.data.shape);
  const int n = f.rows(), c = f.channels();
  int kinv = g.inverse[k];
  for (int b = 0; b < f.batch(); ++b)
    for (int y = 0; y < n; ++y) {
      const double* src = &f.data.data[(static_cast<size_t>(b) * n + g.at(kinv, y)) * c];
      double* dst = &out.data.data[(static_cast<size_t>(b) * n + y) * c];
      for (int i = 0; i < c; ++i) dst[i] = src[i];
    }
  return out;
}

HSpaceSignal apply_action(int k, const HSpaceSignal& f) {
  const HSpace& h = *f.space;
  if (k < 0 || k >= h.group->order) throw std::invalid_argument("apply_action: element out of range");
  HSpaceSignal out;
  out.space = f.space;
  out.data = Tensor(f.data.shape);
  const int n = f.rows(), c = f.channels();
  int kinv = h.group->inverse[k];
  for (int b = 0; b < f.batch(); ++b)
    for (int x = 0; x < n; ++x) {
      const double* src = &f.data.data[(static_cast<size_t>(b) * n + h.act(kinv, x)) * c];
      double* dst = &out.data.data[(static_cast<size_t>(b) * n + x) * c];
      for (int i = 0; i < c; ++i) dst[i] = src[i];
    }
  return out;
}

Tensor global_pool(const Tensor& data) {
  const int B = data.dim(0), n = data.dim(1), c = data.dim(2);
  Tensor out({B, c});
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < n; ++y)
      for (int i = 0; i < c; ++i)
        out.data[static_cast<size_t>(b) * c + i] += data.data[(static_cast<size_t>(b) * n + y) * c + i];
  for (auto& v : out.data) v /= n;
  return out;
}

Tensor global_pool_masked(const Tensor& data, std::span<const unsigned char> keep) {
  const int B = data.dim(0), n = data.dim(1), c = data.dim(2);
  if (static_cast<int>(keep.size()) != n)
    throw std::invalid_argument("global_pool_masked: mask length != rows");
  int kept = 0;
  for (unsigned char k : keep) kept += k ? 1 : 0;
  if (kept == 0) throw std::invalid_argument("global_pool_masked: all rows masked");
  Tensor out({B, c});
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < n; ++y) {
      if (!keep[static_cast<size_t>(y)]) continue;
      for (int i = 0; i < c; ++i)
        out.data[static_cast<size_t>(b) * c + i] += data.data[(static_cast<size_t>(b) * n + y) * c + i];
    }
  for (auto& v : out.data) v /= kept;
  return out;
}

Tensor relu(const Tensor& t) {
  Tensor out = t;
  for (auto& v : out.data)
    if (v < 0) v = 0;
  return out;
}

} // namespace finrot
