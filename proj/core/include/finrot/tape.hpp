#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "finrot/signal.hpp"
#include "finrot/tensor.hpp"

namespace finrot {

// Reverse-mode autodiff over Tensor values. Operations are recorded in
// creation order (which is a topological order by construction) and replayed
// exactly once in reverse by backward(). Values and activations stay cached
// on the tape; replaying a tape twice is a state error.
class Tape {
 public:
  using Var = int;

  Var input(Tensor value, bool requires_grad = false);

  const Tensor& value(Var v) const { return node(v).value; }
  // Valid after backward() for nodes that require grad.
  const Tensor& grad(Var v) const;
  // False when no gradient ever reached the node (identically zero).
  bool grad_defined(Var v) const { return !node(v).grad.data.empty(); }
  bool requires_grad(Var v) const { return node(v).req; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // ---- elementwise / shape ops ----
  Var relu(Var x);
  Var add(Var a, Var b);                       // same shape
  Var scale(Var a, double s);
  Var row_scale(Var x, std::vector<double> s); // x [B,N,C], one factor per row
  Var add_row_bias(Var x, Var bias);           // x [B,N,C] + bias [C]
  Var add_bias(Var x, Var bias);               // x [...,C] + bias [C]
  Var reshape(Var x, std::vector<int> shape);  // same numel, new dims

  // ---- dense layers ----
  Var linear(Var x, Var w);                    // x [...,Ci] * w [Co,Ci] -> [...,Co]
  Var conv2d(Var x, Var w, int stride_h, int stride_w, bool circular_w);
      // x [B,H,W,Ci], w [Co,3,3,Ci], zero padding 1 along H, zero or circular along W
  Var spatial_mean(Var x);                     // [B,H,W,C] -> [B,C]

  // ---- group ops ----
  Var gconv(Var f, Var w, const FiniteGroup& g, std::span<const int> support);
  Var hconv(Var f, Var w, const HSpace& h, std::span<const int> support);
  Var hcorr(Var f, Var w, const HSpace& h, std::span<const int> support);
  Var global_pool(Var x);                      // [B,N,C] -> [B,C] mean over rows
  Var global_max_pool(Var x);                  // [B,N,C] -> [B,C], first max wins ties
  // Per (batch, channel) normalization across rows: zero mean, unit variance
  // (population, eps-regularized). Row permutations commute with it.
  Var channel_norm(Var x, double eps);
  // Scatter encoder rows into signal rows: out[b][row_of[v]][c] = x[b*V+v][c].
  Var assemble_rows(Var x, int batch, std::vector<int> row_of, int n_rows);

  // ---- losses ----
  Var cross_entropy(Var logits, std::vector<int> labels); // [B,K] -> scalar mean
  // Triplet with cosine distance against constant anchors (cached
  // descriptors): mean_b max(0, d(z_b, pos_b) - d(z_b, neg_b) + margin).
  // Throws std::domain_error on a zero-norm descriptor.
  Var triplet_cached(Var z, const Tensor& pos, const Tensor& neg, double margin);

  // Seeds d(loss)/d(loss) = 1 and visits every recorded operation in exact
  // reverse order. loss must be scalar. Second call throws std::logic_error.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool req = false;
    std::function<void(Tape&)> back;
  };

  Node& node(Var v) { return nodes_[static_cast<size_t>(v)]; }
  const Node& node(Var v) const { return nodes_[static_cast<size_t>(v)]; }
  Var push(Tensor value, bool req, std::function<void(Tape&)> back);
  Tensor& grad_buf(Var v);

  std::vector<Node> nodes_;
  bool replayed_ = false;
};

} // namespace finrot
