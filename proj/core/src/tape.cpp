#include "finrot/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace finrot {

Tape::Var Tape::push(Tensor value, bool req, std::function<void(Tape&)> back) {
  Node n;
  n.value = std::move(value);
  n.req = req;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size() - 1);
}

Tensor& Tape::grad_buf(Var v) {
  Node& n = node(v);
  if (n.grad.data.empty() && n.value.numel() > 0) n.grad = Tensor(n.value.shape);
  return n.grad;
}

Tape::Var Tape::input(Tensor value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (!n.req) throw std::logic_error("tape: grad of a non-differentiable node");
  if (n.grad.data.empty()) throw std::logic_error("tape: backward has not run");
  return n.grad;
}

Tape::Var Tape::relu(Var x) {
  Tensor out = node(x).value;
  for (auto& v : out.data)
    if (v < 0) v = 0;
  Var v = push(std::move(out), node(x).req, nullptr);
  node(v).back = [x, v](Tape& t) {
    if (!t.node(x).req) return;
    const Tensor& g = t.node(v).grad;
    const Tensor& in = t.node(x).value;
    Tensor& gx = t.grad_buf(x);
    for (size_t i = 0; i < g.data.size(); ++i)
      if (in.data[i] > 0) gx.data[i] += g.data[i];
  };
  return v;
}

Tape::Var Tape::add(Var a, Var b) {
  if (!same_shape(node(a).value, node(b).value)) throw std::invalid_argument("add: shape mismatch");
  Tensor out = node(a).value;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += node(b).value.data[i];
  bool req = node(a).req || node(b).req;
  Var v = push(std::move(out), req, nullptr);
  node(v).back = [a, b, v](Tape& t) {
    const Tensor& g = t.node(v).grad;
    if (t.node(a).req) {
      Tensor& ga = t.grad_buf(a);
      for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
    }
    if (t.node(b).req) {
      Tensor& gb = t.grad_buf(b);
      for (size_t i = 0; i < g.data.size(); ++i) gb.data[i] += g.data[i];
    }
  };
  return v;
}

Tape::Var Tape::scale(Var a, double s) {
  Tensor out = node(a).value;
  for (auto& v : out.data) v *= s;
  Var v = push(std::move(out), node(a).req, nullptr);
  node(v).back = [a, s, v](Tape& t) {
    if (!t.node(a).req) return;
    const Tensor& g = t.node(v).grad;
    Tensor& ga = t.grad_buf(a);
    for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += s * g.data[i];
  };
  return v;
}

Tape::Var Tape::row_scale(Var x, std::vector<double> s) {
  const Tensor& in = node(x).value;
  if (in.shape.size() != 3 || in.dim(1) != static_cast<int>(s.size()))
    throw std::invalid_argument("row_scale: need [B,N,C] and one factor per row");
  Tensor out = in;
  const int B = in.dim(0), n = in.dim(1), c = in.dim(2);
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < n; ++y)
      for (int i = 0; i < c; ++i) out.data[(static_cast<size_t>(b) * n + y) * c + i] *= s[static_cast<size_t>(y)];
  Var v = push(std::move(out), node(x).req, nullptr);
  node(v).back = [x, s = std::move(s), v, B, n, c](Tape& t) {
    if (!t.node(x).req) return;
    const Tensor& g = t.node(v).grad;
    Tensor& gx = t.grad_buf(x);
    for (int b = 0; b < B; ++b)
      for (int y = 0; y < n; ++y)
        for (int i = 0; i < c; ++i)
          gx.data[(static_cast<size_t>(b) * n + y) * c + i] +=
              g.data[(static_cast<size_t>(b) * n + y) * c + i] * s[static_cast<size_t>(y)];
  };
  return v;
}

Tape::Var Tape::add_row_bias(Var x, Var bias) {
  const Tensor& in = node(x).value;
  const Tensor& b = node(bias).value;
  if (in.shape.size() != 3 || b.shape.size() != 1 || b.dim(0) != in.dim(2))
    throw std::invalid_argument("add_row_bias: need [B,N,C] and [C]");
  Tensor out = in;
  const int B = in.dim(0), n = in.dim(1), c = in.dim(2);
  for (int bb = 0; bb < B; ++bb)
    for (int y = 0; y < n; ++y)
      for (int i = 0; i < c; ++i) out.data[(static_cast<size_t>(bb) * n + y) * c + i] += b.data[static_cast<size_t>(i)];
  Var v = push(std::move(out), node(x).req || node(bias).req, nullptr);
  node(v).back = [x, bias, v, B, n, c](Tape& t) {
    const Tensor& g = t.node(v).grad;
    if (t.node(x).req) {
      Tensor& gx = t.grad_buf(x);
      for (size_t i = 0; i < g.data.size(); ++i) gx.data[i] += g.data[i];
    }
    if (t.node(bias).req) {
      Tensor& gb = t.grad_buf(bias);
      for (int bb = 0; bb < B; ++bb)
        for (int y = 0; y < n; ++y)
          for (int i = 0; i < c; ++i)
            gb.data[static_cast<size_t>(i)] += g.data[(static_cast<size_t>(bb) * n + y) * c + i];
    }
  };
  return v;
}

Tape::Var Tape::add_bias(Var x, Var bias) {
  const Tensor& in = node(x).value;
  const Tensor& b = node(bias).value;
  if (in.shape.size() < 2 || b.shape.size() != 1 || b.dim(0) != in.shape.back())
    throw std::invalid_argument("add_bias: need [...,C] and [C]");
  Tensor out = in;
  const int c = in.shape.back();
  const size_t rows = in.numel() / static_cast<size_t>(c);
  for (size_t r = 0; r < rows; ++r)
    for (int i = 0; i < c; ++i) out.data[r * c + i] += b.data[static_cast<size_t>(i)];
  Var v = push(std::move(out), node(x).req || node(bias).req, nullptr);
  node(v).back = [x, bias, v, rows, c](Tape& t) {
    const Tensor& g = t.node(v).grad;
    if (t.node(x).req) {
      Tensor& gx = t.grad_buf(x);
      for (size_t i = 0; i < g.data.size(); ++i) gx.data[i] += g.data[i];
    }
    if (t.node(bias).req) {
      Tensor& gb = t.grad_buf(bias);
      for (size_t r = 0; r < rows; ++r)
        for (int i = 0; i < c; ++i) gb.data[static_cast<size_t>(i)] += g.data[r * c + i];
    }
  };
  return v;
}

Tape::Var Tape::reshape(Var x, std::vector<int> shape) {
  const Tensor& in = node(x).value;
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  if (int64_t(n) != in.numel()) throw std::invalid_argument("reshape: element count mismatch");
  Tensor out = in;
  out.shape = std::move(shape);
  Var v = push(std::move(out), node(x).req, nullptr);
  node(v).back = [x, v](Tape& t) {
    if (!t.node(x).req) return;
    const Tensor& g = t.node(v).grad;
    Tensor& gx = t.grad_buf(x);
    for (size_t i = 0; i < g.data.size(); ++i) gx.data[i] += g.data[i];
  };
  return v;
}

Tape::Var Tape::linear(Var x, Var w) {
  const Tensor& in = node(x).value;
  const Tensor& wt = node(w).value;
  if (wt.shape.size() != 2 || in.shape.empty() || in.shape.back() != wt.dim(1))
    throw std::invalid_argument("linear: need [...,Ci] and [Co,Ci]");
  const int ci = wt.dim(1), co = wt.dim(0);
  const std::int64_t rows = in.numel() / ci;
  std::vector<int> oshape = in.shape;
  oshape.back() = co;
  Tensor out(oshape);
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* xi = &in.data[static_cast<size_t>(r) * ci];
    double* o = &out.data[static_cast<size_t>(r) * co];
    for (int j = 0; j < co; ++j) {
      const double* wr = &wt.data[static_cast<size_t>(j) * ci];
      double acc = 0;
      for (int i = 0; i < ci; ++i) acc += xi[i] * wr[i];
      o[j] = acc;
    }
  }
  Var v = push(std::move(out), node(x).req || node(w).req, nullptr);
  node(v).back = [x, w, v, rows, ci, co](Tape& t) {
    const Tensor& g = t.node(v).grad;
    const Tensor& in = t.node(x).value;
    const Tensor& wt = t.node(w).value;
    if (t.node(x).req) {
      Tensor& gx = t.grad_buf(x);
      for (std::int64_t r = 0; r < rows; ++r) {
        const double* go = &g.data[static_cast<size_t>(r) * co];
        double* gi = &gx.data[static_cast<size_t>(r) * ci];
        for (int j = 0; j < co; ++j) {
          const double* wr = &wt.data[static_cast<size_t>(j) * ci];
          double gg = go[j];
          for (int i = 0; i < ci; ++i) gi[i] += gg * wr[i];
        }
      }
    }
    if (t.node(w).req) {
      Tensor& gw = t.grad_buf(w);
      for (std::int64_t r = 0; r < rows; ++r) {
        const double* go = &g.data[static_cast<size_t>(r) * co];
        const double* xi = &in.data[static_cast<size_t>(r) * ci];
        for (int j = 0; j < co; ++j) {
          double gg = go[j];
          double* wr = &gw.data[static_cast<size_t>(j) * ci];
          for (int i = 0; i < ci; ++i) wr[i] += gg * xi[i];
        }
      }
    }
  };
  return v;
}

namespace {
inline int wrap(int i, int n) { return i < 0 ? i + n : (i >= n ? i - n : i); }
} // namespace

Tape::Var Tape::conv2d(Var x, Var w, int stride_h, int stride_w, bool circular_w) {
  const Tensor& in = node(x).value;
  const Tensor& wt = node(w).value;
  if (in.shape.size() != 4 || wt.shape.size() != 4 || wt.dim(1) != 3 || wt.dim(2) != 3 ||
      wt.dim(3) != in.dim(3))
    throw std::invalid_argument("conv2d: need x [B,H,W,Ci], w [Co,3,3,Ci]");
  if (stride_h < 1 || stride_w < 1) throw std::invalid_argument("conv2d: bad stride");
  const int B = in.dim(0), H = in.dim(1), W = in.dim(2), ci = in.dim(3), co = wt.dim(0);
  const int OH = (H - 1) / stride_h + 1;
  const int OW = circular_w ? (W + stride_w - 1) / stride_w : (W - 1) / stride_w + 1;

  Tensor out({B, OH, OW, co});
  for (int b = 0; b < B; ++b)
    for (int oh = 0; oh < OH; ++oh)
      for (int ow = 0; ow < OW; ++ow) {
        double* o = &out.data[((static_cast<size_t>(b) * OH + oh) * OW + ow) * co];
        for (int kh = 0; kh < 3; ++kh) {
          int ih = oh * stride_h + kh - 1;
          if (ih < 0 || ih >= H) continue;
          for (int kw = 0; kw < 3; ++kw) {
            int iw = ow * stride_w + kw - 1;
            if (circular_w)
              iw = wrap(iw, W);
            else if (iw < 0 || iw >= W)
              continue;
            const double* xi = &in.data[((static_cast<size_t>(b) * H + ih) * W + iw) * ci];
            const double* wk = &wt.data[(static_cast<size_t>(kh) * 3 + kw) * ci];
            for (int j = 0; j < co; ++j) {
              const double* wr = wk + static_cast<size_t>(j) * 9 * ci;
              double acc = 0;
              for (int i = 0; i < ci; ++i) acc += xi[i] * wr[i];
              o[j] += acc;
            }
          }
        }
      }

  Var v = push(std::move(out), node(x).req || node(w).req, nullptr);
  node(v).back = [x, w, v, B, H, W, ci, co, OH, OW, stride_h, stride_w, circular_w](Tape& t) {
    const Tensor& g = t.node(v).grad;
    const Tensor& in = t.node(x).value;
    const Tensor& wt = t.node(w).value;
    bool need_x = t.node(x).req, need_w = t.node(w).req;
    Tensor* gx = need_x ? &t.grad_buf(x) : nullptr;
    Tensor* gw = need_w ? &t.grad_buf(w) : nullptr;
    for (int b = 0; b < B; ++b)
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          const double* go = &g.data[((static_cast<size_t>(b) * OH + oh) * OW + ow) * co];
          for (int kh = 0; kh < 3; ++kh) {
            int ih = oh * stride_h + kh - 1;
            if (ih < 0 || ih >= H) continue;
            for (int kw = 0; kw < 3; ++kw) {
              int iw = ow * stride_w + kw - 1;
              if (circular_w)
                iw = wrap(iw, W);
              else if (iw < 0 || iw >= W)
                continue;
              const size_t xoff = ((static_cast<size_t>(b) * H + ih) * W + iw) * ci;
              const double* wk = &wt.data[(static_cast<size_t>(kh) * 3 + kw) * ci];
              for (int j = 0; j < co; ++j) {
                double gg = go[j];
                if (gg == 0) continue;
                if (need_x) {
                  const double* wr = wk + static_cast<size_t>(j) * 9 * ci;
                  for (int i = 0; i < ci; ++i) gx->data[xoff + i] += gg * wr[i];
                }
                if (need_w) {
                  double* wr = &gw->data[(static_cast<size_t>(j) * 9 + kh * 3 + kw) * ci];
                  for (int i = 0; i < ci; ++i) wr[i] += gg * in.data[xoff + i];
                }
              }
            }
          }
        }
  };
  return v;
}

Tape::Var Tape::spatial_mean(Var x) {
  const Tensor& in = node(x).value;
  if (in.shape.size() != 4) throw std::invalid_argument("spatial_mean: need [B,H,W,C]");
  const int B = in.dim(0), H = in.dim(1), W = in.dim(2), c = in.dim(3);
  Tensor out({B, c});
  for (int b = 0; b < B; ++b) {
    double* o = &out.data[static_cast<size_t>(b) * c];
    for (int p = 0; p < H * W; ++p) {
      const double* xi = &in.data[(static_cast<size_t>(b) * H * W + p) * c];
      for (int i = 0; i < c; ++i) o[i] += xi[i];
    }
    for (int i = 0; i < c; ++i) o[i] /= H * W;
  }
  Var v = push(std::move(out), node(x).req, nullptr);
  node(v).back = [x, v, B, H, W, c](Tape& t) {
    if (!t.node(x).req) return;
    const Tensor& g = t.node(v).grad;
    Tensor& gx = t.grad_buf(x);
    for (int b = 0; b < B; ++b) {
      const double* go = &g.data[static_cast<size_t>(b) * c];
      for (int p = 0; p < H * W; ++p) {
        double* gi = &gx.data[(static_cast<size_t>(b) * H * W + p) * c];
        for (int i = 0; i < c; ++i) gi[i] += go[i] / (H * W);
      }
    }
  };
  return v;
}

Tape::Var Tape::gconv(Var f, Var w, const FiniteGroup& g, std::span<const int> support) {
  const GConvPlan& plan = gconv_plan(g, support);
  const Tensor& in = node(f).value;
  const Tensor& wt = node(w).value;
  if (in.shape.size() != 3 || in.dim(1) != plan.n || wt.shape.size() != 3 ||
      wt.dim(1) != in.dim(2) || wt.dim(2) != plan.s)
    throw std::invalid_argument("gconv: shape mismatch");
  Tensor out({in.dim(0), plan.n, wt.dim(0)});
  gconv_forward(plan, in, wt, out);
  Var v = push(std::move(out), node(f).req || node(w).req, nullptr);
  const GConvPlan* pp = &plan;
  node(v).back = [f, w, v, pp](Tape& t) {
    const Tensor& g = t.node(v).grad;
    if (t.node(f).req) gconv_backward_input(*pp, g, t.node(w).value, t.grad_buf(f));
    if (t.node(w).req) gconv_backward_weights(*pp, g, t.node(f).value, t.grad_buf(w));
  };
  return v;
}

Tape::Var Tape::hconv(Var f, Var w, const HSpace& h, std::span<const int> support) {
  const HConvPlan& plan = hconv_plan(h, support);
  const Tensor& in = node(f).value;
  const Tensor& wt = node(w).value;
  if (in.shape.size() != 3 || in.dim(1) != plan.nx || wt.shape.size() != 3 ||
      wt.dim(1) != in.dim(2) || wt.dim(2) != plan.s)
    throw std::invalid_argument("hconv: shape mismatch");
  Tensor out({in.dim(0), plan.nx, wt.dim(0)});
  hconv_forward(plan, in, wt, out);
  Var v = push(std::move(out), node(f).req || node(w).req, nullptr);
  const HConvPlan* pp = &plan;
  node(v).back = [f, w, v, pp](Tape& t) {
    const Tensor& g = t.node(v).grad;
    if (t.node(f).req) hconv_backward_input(*pp, g, t.node(w).value, t.grad_buf(f));
    if (t.node(w).req) hconv_backward_weights(*pp, g, t.node(f).value, t.grad_buf(w));
  };
  return v;
}

Tape::Var Tape::hcorr(Var f, Var w, const HSpace& h, std::span<const int> support) {
  const HCorrPlan& plan = hcorr_plan(h, support);
  const Tensor& in = node(f).value;
  const Tensor& wt = node(w).value;
  if (in.shape.size() != 3 || in.dim(1) != h.size() || wt.shape.size() != 3 ||
      wt.dim(1) != in.dim(2) || wt.dim(2) != plan.s)
    throw std::invalid_argument("hcorr: shape mismatch");
  Tensor out({in.dim(0), plan.ng, wt.dim(0)});
  hcorr_forward(plan, in, wt, out);
  Var v = push(std::move(out), node(f).req || node(w).req, nullptr);
  const HCorrPlan* pp = &plan;
  node(v).back = [f, w, v, pp](Tape& t) {
    const Tensor& g = t.node(v).grad;
    if (t.node(f).req) hcorr_backward_input(*pp, g, t.node(w).value, t.grad_buf(f));
    if (t.node(w).req) hcorr_backward_weights(*pp, g, t.node(f).value, t.grad_buf(w));
  };
  return v;
}

Tape::Var Tape::global_pool(Var x) {
  const Tensor& in = node(x).value;
  if (in.shape.size() != 3) throw std::invalid_argument("global_pool: need [B,N,C]");
  const int B = in.dim(0), n = in.dim(1), c = in.dim(2);
  Tensor out = finrot::global_pool(in);
  Var v = push(std::move(out), node(x).req, nullptr);
  node(v).back = [x, v, B, n, c](Tape& t) {
    if (!t.node(x).req) return;
    const Tensor& g = t.node(v).grad;
    Tensor& gx = t.grad_buf(x);
    for (int b = 0; b < B; ++b)
      for (int y = 0; y < n; ++y)
        for (int i = 0; i < c; ++i)
          gx.data[(static_cast<size_t>(b) * n + y) * c + i] += g.data[static_cast<size_t>(b) * c + i] / n;
  };
  return v;
}

Tape::Var Tape::global_max_pool(Var x) {
  const Tensor& in = node(x).value;
  if (in.shape.size() != 3) throw std::invalid_argument("global_max_pool: need [B,N,C]");
  const int B = in.dim(0), n = in.dim(1), c = in.dim(2);
  Tensor out({B, c});
  std::vector<int> arg(static_cast<size_t>(B) * c, 0);
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < c; ++i) {
      int best = 0;
      for (int y = 1; y < n; ++y)
        if (in.data[(static_cast<size_t>(b) * n + y) * c + i] >
            in.data[(static_cast<size_t>(b) * n + best) * c + i])
          best = y;
      arg[static_cast<size_t>(b) * c + i] = best;
      out.data[static_cast<size_t>(b) * c + i] =
          in.data[(static_cast<size_t>(b) * n + best) * c + i];
    }
  Var v = push(std::move(out), node(x).req, nullptr);
  node(v).back = [x, v, B, n, c, arg = std::move(arg)](Tape& t) {
    if (!t.node(x).req) return;
    const Tensor& g = t.node(v).grad;
    Tensor& gx = t.grad_buf(x);
    for (int b = 0; b < B; ++b)
      for (int i = 0; i < c; ++i) {
        const int y = arg[static_cast<size_t>(b) * c + i];
        gx.data[(static_cast<size_t>(b) * n + y) * c + i] +=
            g.data[static_cast<size_t>(b) * c + i];
      }
  };
  return v;
}

Tape::Var Tape::channel_norm(Var x, double eps) {
  const Tensor& in = node(x).value;
  if (in.shape.size() != 3) throw std::invalid_argument("channel_norm: need [B,N,C]");
  if (!(eps > 0)) throw std::invalid_argument("channel_norm: eps must be positive");
  const int B = in.dim(0), n = in.dim(1), c = in.dim(2);
  Tensor out(in.shape);
  Tensor inv({B, c}); // 1/sqrt(var + eps), reused by the backward pass
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < c; ++i) {
      double mu = 0;
      for (int y = 0; y < n; ++y) mu += in.data[(static_cast<size_t>(b) * n + y) * c + i];
      mu /= n;
      double var = 0;
      for (int y = 0; y < n; ++y) {
        const double d = in.data[(static_cast<size_t>(b) * n + y) * c + i] - mu;
        var += d * d;
      }
      var /= n;
      const double s = 1.0 / std::sqrt(var + eps);
      inv.data[static_cast<size_t>(b) * c + i] = s;
      for (int y = 0; y < n; ++y)
        out.data[(static_cast<size_t>(b) * n + y) * c + i] =
            (in.data[(static_cast<size_t>(b) * n + y) * c + i] - mu) * s;
    }
  Var v = push(std::move(out), node(x).req, nullptr);
  node(v).back = [x, v, B, n, c, inv = std::move(inv)](Tape& t) {
    if (!t.node(x).req) return;
    const Tensor& g = t.node(v).grad;
    const Tensor& y = t.node(v).value;
    Tensor& gx = t.grad_buf(x);
    // Standard normalization backward: dx = s * (g - mean(g) - y * mean(g*y)).
    for (int b = 0; b < B; ++b)
      for (int i = 0; i < c; ++i) {
        double gm = 0, gym = 0;
        for (int r = 0; r < n; ++r) {
          const size_t at = (static_cast<size_t>(b) * n + r) * c + i;
          gm += g.data[at];
          gym += g.data[at] * y.data[at];
        }
        gm /= n;
        gym /= n;
        const double s = inv.data[static_cast<size_t>(b) * c + i];
        for (int r = 0; r < n; ++r) {
          const size_t at = (static_cast<size_t>(b) * n + r) * c + i;
          gx.data[at] += s * (g.data[at] - gm - y.data[at] * gym);
        }
      }
  };
  return v;
}

Tape::Var Tape::assemble_rows(Var x, int batch, std::vector<int> row_of, int n_rows) {
  const Tensor& in = node(x).value;
  const int V = static_cast<int>(row_of.size());
  if (in.shape.size() != 2 || in.dim(0) != batch * V)
    throw std::invalid_argument("assemble_rows: need [B*V, C]");
  const int c = in.dim(1);
  for (int r : row_of)
    if (r < 0 || r >= n_rows) throw std::invalid_argument("assemble_rows: row index out of range");
  Tensor out({batch, n_rows, c});
  for (int b = 0; b < batch; ++b)
    for (int vv = 0; vv < V; ++vv) {
      const double* src = &in.data[(static_cast<size_t>(b) * V + vv) * c];
      double* dst = &out.data[(static_cast<size_t>(b) * n_rows + row_of[static_cast<size_t>(vv)]) * c];
      for (int i = 0; i < c; ++i) dst[i] = src[i];
    }
  Var v = push(std::move(out), node(x).req, nullptr);
  node(v).back = [x, v, batch, row_of = std::move(row_of), n_rows, c](Tape& t) {
    if (!t.node(x).req) return;
    const Tensor& g = t.node(v).grad;
    Tensor& gx = t.grad_buf(x);
    const int V = static_cast<int>(row_of.size());
    for (int b = 0; b < batch; ++b)
      for (int vv = 0; vv < V; ++vv) {
        const double* src = &g.data[(static_cast<size_t>(b) * n_rows + row_of[static_cast<size_t>(vv)]) * c];
        double* dst = &gx.data[(static_cast<size_t>(b) * V + vv) * c];
        for (int i = 0; i < c; ++i) dst[i] += src[i];
      }
  };
  return v;
}

Tape::Var Tape::cross_entropy(Var logits, std::vector<int> labels) {
  const Tensor& in = node(logits).value;
  if (in.shape.size() != 2 || in.dim(0) != static_cast<int>(labels.size()))
    throw std::invalid_argument("cross_entropy: need [B,K] and B labels");
  const int B = in.dim(0), K = in.dim(1);
  for (int l : labels)
    if (l < 0 || l >= K) throw std::invalid_argument("cross_entropy: label out of range");
  // Stable softmax; keep probabilities for the backward pass.
  Tensor probs({B, K});
  double loss = 0;
  for (int b = 0; b < B; ++b) {
    const double* z = &in.data[static_cast<size_t>(b) * K];
    double m = z[0];
    for (int k = 1; k < K; ++k) m = std::max(m, z[k]);
    double sum = 0;
    for (int k = 0; k < K; ++k) sum += std::exp(z[k] - m);
    for (int k = 0; k < K; ++k) probs.data[static_cast<size_t>(b) * K + k] = std::exp(z[k] - m) / sum;
    loss -= std::log(std::max(probs.data[static_cast<size_t>(b) * K + labels[static_cast<size_t>(b)]], 1e-300));
  }
  Tensor out({1});
  out.data[0] = loss / B;
  Var v = push(std::move(out), node(logits).req, nullptr);
  node(v).back = [logits, v, labels = std::move(labels), probs = std::move(probs), B, K](Tape& t) {
    if (!t.node(logits).req) return;
    double g = t.node(v).grad.data[0];
    Tensor& gx = t.grad_buf(logits);
    for (int b = 0; b < B; ++b)
      for (int k = 0; k < K; ++k) {
        double p = probs.data[static_cast<size_t>(b) * K + k];
        double onehot = k == labels[static_cast<size_t>(b)] ? 1.0 : 0.0;
        gx.data[static_cast<size_t>(b) * K + k] += g * (p - onehot) / B;
      }
  };
  return v;
}

Tape::Var Tape::triplet_cached(Var z, const Tensor& pos, const Tensor& neg, double margin) {
  const Tensor& in = node(z).value;
  if (in.shape.size() != 2 || !same_shape(in, pos) || !same_shape(in, neg))
    throw std::invalid_argument("triplet: z, pos, neg must share shape [B,D]");
  const int B = in.dim(0), D = in.dim(1);
  auto nrm = [D](const double* p) {
    double s = 0;
    for (int i = 0; i < D; ++i) s += p[i] * p[i];
    return std::sqrt(s);
  };
  std::vector<double> active(static_cast<size_t>(B), 0.0);
  double loss = 0;
  for (int b = 0; b < B; ++b) {
    const double* zb = &in.data[static_cast<size_t>(b) * D];
    const double* pb = &pos.data[static_cast<size_t>(b) * D];
    const double* nb = &neg.data[static_cast<size_t>(b) * D];
    double nz = nrm(zb), np = nrm(pb), nn = nrm(nb);
    if (nz < 1e-12 || np < 1e-12 || nn < 1e-12)
      throw std::domain_error("triplet loss: zero-norm descriptor, cosine distance undefined");
    double dp = 0, dn = 0;
    for (int i = 0; i < D; ++i) {
      dp += zb[i] * pb[i];
      dn += zb[i] * nb[i];
    }
    double d_pos = 1.0 - dp / (nz * np);
    double d_neg = 1.0 - dn / (nz * nn);
    double h = d_pos - d_neg + margin;
    if (h > 0) {
      loss += h;
      active[static_cast<size_t>(b)] = 1.0;
    }
  }
  Tensor out({1});
  out.data[0] = loss / B;
  Var v = push(std::move(out), node(z).req, nullptr);
  node(v).back = [zv = z, v, pos, neg, active = std::move(active), B, D](Tape& t) {
    if (!t.node(zv).req) return;
    double g = t.node(v).grad.data[0];
    const Tensor& in = t.node(zv).value;
    Tensor& gx = t.grad_buf(zv);
    for (int b = 0; b < B; ++b) {
      if (active[static_cast<size_t>(b)] == 0.0) continue;
      const double* zb = &in.data[static_cast<size_t>(b) * D];
      const double* pb = &pos.data[static_cast<size_t>(b) * D];
      const double* nb = &neg.data[static_cast<size_t>(b) * D];
      double nz = 0, np = 0, nn = 0, dp = 0, dn = 0;
      for (int i = 0; i < D; ++i) {
        nz += zb[i] * zb[i];
        np += pb[i] * pb[i];
        nn += nb[i] * nb[i];
        dp += zb[i] * pb[i];
        dn += zb[i] * nb[i];
      }
      nz = std::sqrt(nz);
      np = std::sqrt(np);
      nn = std::sqrt(nn);
      // d/dz of -cos(z, a) = -(a/(|z||a|) - z * dot/(|z|^3 |a|))
      for (int i = 0; i < D; ++i) {
        double d_dpos = -(pb[i] / (nz * np) - zb[i] * dp / (nz * nz * nz * np));
        double d_dneg = -(nb[i] / (nz * nn) - zb[i] * dn / (nz * nz * nz * nn));
        gx.data[static_cast<size_t>(b) * D + i] += g * (d_dpos - d_dneg) / B;
      }
    }
  };
  return v;
}

void Tape::backward(Var loss) {
  if (replayed_) throw std::logic_error("tape already replayed; build a fresh tape per pass");
  replayed_ = true;
  Node& ln = node(loss);
  if (ln.value.numel() != 1) throw std::invalid_argument("backward: loss must be scalar");
  if (!ln.req) throw std::invalid_argument("backward: loss does not depend on any parameter");
  grad_buf(loss).data[0] = 1.0;
  for (int v = static_cast<int>(nodes_.size()) - 1; v >= 0; --v) {
    Node& n = nodes_[static_cast<size_t>(v)];
    if (!n.req || !n.back || n.grad.data.empty()) continue;
    n.back(*this);
  }
}

} // namespace finrot
