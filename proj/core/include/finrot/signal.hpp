#pragma once

#include <span>
#include <vector>

#include "finrot/group.hpp"
#include "finrot/hspace.hpp"
#include "finrot/tensor.hpp"

namespace finrot {

// Feature map on a group: data[b][y][c], one row per group element.
struct GroupSignal {
  const FiniteGroup* group = nullptr;
  Tensor data; // [B, |G|, C]

  int batch() const { return data.dim(0); }
  int rows() const { return data.dim(1); }
  int channels() const { return data.dim(2); }
};

// Feature map on a homogeneous space: data[b][x][c], one row per point.
struct HSpaceSignal {
  const HSpace* space = nullptr;
  Tensor data; // [B, |X|, C]

  int batch() const { return data.dim(0); }
  int rows() const { return data.dim(1); }
  int channels() const { return data.dim(2); }
};

// Filter with a restricted support. For group convolution the support holds
// group element indices; for the homogeneous-space ops it holds point
// indices. weights[j][i][s] couples input channel i to output channel j at
// support slot s.
struct LocalizedFilter {
  std::vector<int> support;
  Tensor weights; // [C_out, C_in, |S|]

  int out_channels() const { return weights.dim(0); }
  int in_channels() const { return weights.dim(1); }
};

// Identity filter: support {0}, identity channel coupling. Convolving with
// it reproduces the input exactly.
LocalizedFilter delta_filter(int channels);

// Emits a warning (not an error) when the support does not generate the
// whole group: stacking layers can then never reach full receptive field.
bool support_generates(const FiniteGroup& g, std::span<const int> support);
void warn_if_not_generating(const FiniteGroup& g, std::span<const int> support);

// ---- precomputed index plans ----------------------------------------------
// Built once per (group/space, support) pair and cached; they turn each
// operation into a dense gather + small matrix product.

struct GConvPlan {
  int n = 0, s = 0;
  std::vector<int> idx; // idx[y*s + j] = cayley[y][inverse[S[j]]]
};

struct HConvPlan {
  int nx = 0, s = 0, m = 0;  // m = |G|/|X|, transporter coset size
  std::vector<int> gather;   // [(x*s + j)*m + t] = g with act(g^-1, x) = S[j]
  std::vector<int> feta;     // feta[g] = act(g, eta)
};

struct HCorrPlan {
  int ng = 0, s = 0;
  std::vector<int> idx; // idx[g*s + j] = act(g, S[j])
};

const GConvPlan& gconv_plan(const FiniteGroup& g, std::span<const int> support);
const HConvPlan& hconv_plan(const HSpace& h, std::span<const int> support);
const HCorrPlan& hcorr_plan(const HSpace& h, std::span<const int> support);

// ---- raw kernels -----------------------------------------------------------
// Shared between the eager ops below and the autodiff tape. All accumulate
// in double precision.

void gconv_forward(const GConvPlan& p, const Tensor& f, const Tensor& w, Tensor& out);
void gconv_backward_input(const GConvPlan& p, const Tensor& gout, const Tensor& w, Tensor& gin);
void gconv_backward_weights(const GConvPlan& p, const Tensor& gout, const Tensor& f, Tensor& gw);

void hconv_forward(const HConvPlan& p, const Tensor& f, const Tensor& w, Tensor& out);
void hconv_backward_input(const HConvPlan& p, const Tensor& gout, const Tensor& w, Tensor& gin);
void hconv_backward_weights(const HConvPlan& p, const Tensor& gout, const Tensor& f, Tensor& gw);

void hcorr_forward(const HCorrPlan& p, const Tensor& f, const Tensor& w, Tensor& out);
void hcorr_backward_input(const HCorrPlan& p, const Tensor& gout, const Tensor& w, Tensor& gin);
void hcorr_backward_weights(const HCorrPlan& p, const Tensor& gout, const Tensor& f, Tensor& gw);

// ---- eager ops -------------------------------------------------------------

// Group convolution, localized: out(y) = sum_{g in S} f(y g^-1) h(g).
GroupSignal gconv(const GroupSignal& f, const LocalizedFilter& h);

// Homogeneous-space convolution: out(y) = sum_{g in G} f(g eta) h(g^-1 y).
// The filter lives on X; the sum always ranges over the whole group.
HSpaceSignal hconv(const HSpaceSignal& f, const LocalizedFilter& h);

// Correlation lifting X to G: out(g) = sum_{x in S} f(g x) h(x).
GroupSignal hcorr(const HSpaceSignal& f, const LocalizedFilter& h);

// Left translation (T_k f)(y) = f(k^-1 y); an exact row permutation.
GroupSignal apply_action(int k, const GroupSignal& f);
HSpaceSignal apply_action(int k, const HSpaceSignal& f);

// Mean over rows -> [B, C]. With a mask (one flag per row), masked rows are
// excluded and the denominator is the count of kept rows.
Tensor global_pool(const Tensor& data);
Tensor global_pool_masked(const Tensor& data, std::span<const unsigned char> keep);

Tensor relu(const Tensor& t);

} // namespace finrot
