#pragma once

#include "finrot/dataset.hpp"
#include "finrot/encoder.hpp"
#include "finrot/retrieval.hpp"
#include "finrot/tape.hpp"
#include "finrot/view_config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace finrot {

// Aggregation head on top of the per-view encoder. Encoder outputs are
// linearly projected to proj channels and treated as a signal on the camera
// configuration's group (or space). With layers > 0 the signal passes through
// localized convolutions (an aligned configuration lifts to the group with a
// correlation first) before the invariant pool; layers == 0 pools the
// projected rows directly, which is exactly a mean-pooled multi-view net.
struct HeadConfig {
  int layers = 3;
  int channels = 24;    // width of every head layer
  int support = 9;      // filter support size
  int classes = 8;
  int proj = 24;        // projection width between encoder and head
  bool bias = true;     // per-channel bias after each head layer
  bool norm = false;    // per-channel normalization over rows after each layer
  bool max_pool = false; // pool rows by max instead of mean
};

struct MVNet {
  EncoderConfig enc;
  HeadConfig head;
  Encoder encoder;
  Tensor proj_w;              // [proj, enc_out]
  std::vector<Tensor> head_w; // [channels, C_in, support] per layer
  std::vector<Tensor> head_b; // [channels] per layer
  Tensor cls_w;               // [classes, D]
  Tensor cls_b;               // [classes]

  int descriptor_dim() const { return head.layers > 0 ? head.channels : head.proj; }
};

MVNet make_mvnet(const EncoderConfig& enc, const HeadConfig& head, Rng& rng);

// Identity plus the s-1 smallest rotations: the filter support used by every
// group-convolution layer.
std::vector<int> group_support(const FiniteGroup& g, int s);

// First-layer filter support for this configuration: group_support for a
// group-valued configuration, the s points closest to the base point for an
// aligned one (whose first layer is a correlation over the space).
std::vector<int> head_support(const MVNet& net, const CameraConfig& cfg);

// Parameters in a fixed order (encoder stages, head layers, classifier).
std::vector<Tensor*> net_parameters(MVNet& net);

struct NetVars {
  std::vector<Tape::Var> all; // same order as net_parameters
  std::vector<Tape::Var> enc;
  Tape::Var proj_w = -1;
  std::vector<Tape::Var> head_w, head_b;
  Tape::Var cls_w = -1, cls_b = -1;
};
NetVars push_net(Tape& t, const MVNet& net, bool train);

struct NetOut {
  Tape::Var desc = -1;   // [B, D] pooled invariant descriptor
  Tape::Var logits = -1; // [B, classes]
};

// images: [B*K, H, W, C], the kept views of B instances back to back;
// kept_rows (size K) maps each kept view to its signal row. Missing rows stay
// zero and kept rows are scaled by n_rows/K, so the pool is the mean over the
// views actually seen.
NetOut net_forward(Tape& t, const MVNet& net, const NetVars& vars, const CameraConfig& cfg,
                   Tape::Var images, const std::vector<int>& kept_rows);
// Same, but entering after the encoder: rows is [B*K, enc_out]. When stages
// is given it receives the signal after assembly and after every head layer.
NetOut net_head_forward(Tape& t, const MVNet& net, const NetVars& vars,
                        const CameraConfig& cfg, Tape::Var rows,
                        const std::vector<int>& kept_rows,
                        std::vector<Tape::Var>* stages = nullptr);

// Feature maps of one instance for inspection: element 0 is the assembled
// signal, element l the output of head layer l. rows is [V, enc_out].
std::vector<Tensor> head_feature_maps(const MVNet& net, const CameraConfig& cfg,
                                      const Tensor& rows);

// Linear warmup from exactly zero at step 0 to base at step warmup_steps,
// then a cosine taper with lr(total_steps) = 0 (within rounding).
double lr_at(int step, int total_steps, int warmup_steps, double base);

struct TrainConfig {
  int epochs = 8;
  int batch = 8;
  // Nesterov at mu = 0.9 has a stability cliff near lr 0.02 on the synthetic
  // benchmark; 0.01 sits safely below it.
  double lr = 0.01;
  double momentum = 0.9; // Nesterov
  double triplet_weight = 0.1;
  double triplet_margin = 0.2;
  int keep_lo = 0, keep_hi = 0; // kept views per step, uniform; 0 keeps all
  std::uint64_t seed = 1;
  bool eval_each_epoch = false;
  std::string log_csv; // per-epoch metrics, appended when non-empty
};

struct EpochRow {
  int epoch = 0;
  double train_loss = 0, train_acc = 0;
  double test_acc = -1, test_map = -1; // -1: not computed this epoch
};

struct EvalResult {
  double acc = 0;
  RetrievalMetrics retrieval;
  Tensor desc; // [N, D]
  std::vector<int> predicted;
  std::vector<int> labels;
};

struct TrainResult {
  std::vector<EpochRow> history;
  EvalResult test;
};

// Deterministic given (net initialization, dataset, config): same seeds give
// bitwise-identical parameters and metrics. Throws std::runtime_error when
// the loss stops being finite.
TrainResult train_mvnet(MVNet& net, const Dataset& ds, const CameraConfig& cfg,
                        const TrainConfig& tc);

// Encoder output for every view of every instance: [N, V, enc_out].
Tensor encode_views(const MVNet& net, const std::vector<Instance>& split, int batch = 16);

// Head + classifier + retrieval metrics over precomputed view features,
// optionally restricted to a subset of views (ablation).
EvalResult eval_from_features(const MVNet& net, const CameraConfig& cfg, const Tensor& feats,
                              const std::vector<int>& labels,
                              const std::vector<int>* view_subset = nullptr, int batch = 32);

EvalResult eval_mvnet(const MVNet& net, const std::vector<Instance>& split,
                      const CameraConfig& cfg, const std::vector<int>* view_subset = nullptr);

// Re-renders each instance with every camera pose perturbed by an independent
// random rotation (angle |N(0, sigma_deg)|, axis uniform) and evaluates.
EvalResult eval_jittered(const MVNet& net, const std::vector<Instance>& split,
                         const CameraConfig& cfg, const RenderSpec& render, int n_points,
                         double sigma_deg, std::uint64_t seed);

// Checkpoints round-trip bitwise (tensors stored as f64).
void save_mvnet(const std::string& dir, const MVNet& net);
MVNet load_mvnet(const std::string& dir);

} // namespace finrot
