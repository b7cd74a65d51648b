#include "finrot/mvnet.hpp"

#include "finrot/log.hpp"
#include "finrot/tensor_io.hpp"
#include "finrot/threading.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace finrot {

MVNet make_mvnet(const EncoderConfig& enc, const HeadConfig& head, Rng& rng) {
  if (head.layers < 0 || head.classes < 1 || head.proj < 1 ||
      (head.layers > 0 && (head.channels < 1 || head.support < 1)))
    throw std::invalid_argument("make_mvnet: bad head config");
  MVNet net;
  net.enc = enc;
  net.head = head;
  net.encoder = make_encoder(enc, rng);
  {
    // Linear map: var(w) = 1/fan_in preserves variance.
    const int n = enc.out_dim();
    const double bound = std::sqrt(3.0 / n);
    net.proj_w = Tensor::zeros({head.proj, n});
    for (double& x : net.proj_w.data) x = rng.uniform(-bound, bound);
  }
  int ci = head.proj;
  for (int l = 0; l < head.layers; ++l) {
    // He-uniform, fan_in = ci * |support|: each layer feeds a relu.
    const double bound = std::sqrt(6.0 / (double(ci) * head.support));
    Tensor w = Tensor::zeros({head.channels, ci, head.support});
    for (double& x : w.data) x = rng.uniform(-bound, bound);
    net.head_w.push_back(std::move(w));
    net.head_b.push_back(Tensor::zeros({head.channels}));
    ci = head.channels;
  }
  const int d = net.descriptor_dim();
  const double bound = std::sqrt(3.0 / d);
  net.cls_w = Tensor::zeros({head.classes, d});
  for (double& x : net.cls_w.data) x = rng.uniform(-bound, bound);
  net.cls_b = Tensor::zeros({head.classes});
  return net;
}

std::vector<int> group_support(const FiniteGroup& g, int s) {
  if (s < 1 || s > g.order) throw std::invalid_argument("group_support: bad size");
  std::vector<int> sup{0};
  const auto small = smallest_rotations(g);
  for (int i = 0; i + 1 < s; ++i) sup.push_back(small[size_t(i)].first);
  return sup;
}

std::vector<int> head_support(const MVNet& net, const CameraConfig& cfg) {
  const int s = net.head.support;
  std::vector<int> sup;
  if (cfg.grouped()) {
    return group_support(*cfg.group, s);
  } else {
    const HSpace& h = *cfg.space;
    if (s > h.size()) throw std::invalid_argument("head_support: support exceeds space");
    std::vector<int> order(static_cast<size_t>(h.size()));
    std::iota(order.begin(), order.end(), 0);
    const Vec3 base = h.points[size_t(h.eta)];
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double da = dot(h.points[size_t(a)], base), db = dot(h.points[size_t(b)], base);
      if (da != db) return da > db;
      return a < b;
    });
    sup.assign(order.begin(), order.begin() + s);
  }
  return sup;
}

std::vector<Tensor*> net_parameters(MVNet& net) {
  std::vector<Tensor*> out;
  for (size_t k = 0; k < net.encoder.conv_w.size(); ++k) {
    out.push_back(&net.encoder.conv_w[k]);
    out.push_back(&net.encoder.conv_b[k]);
  }
  out.push_back(&net.proj_w);
  for (size_t l = 0; l < net.head_w.size(); ++l) {
    out.push_back(&net.head_w[l]);
    out.push_back(&net.head_b[l]);
  }
  out.push_back(&net.cls_w);
  out.push_back(&net.cls_b);
  return out;
}

NetVars push_net(Tape& t, const MVNet& net, bool train) {
  NetVars v;
  v.enc = push_encoder(t, net.encoder, train);
  v.all = v.enc;
  v.proj_w = t.input(net.proj_w, train);
  v.all.push_back(v.proj_w);
  for (size_t l = 0; l < net.head_w.size(); ++l) {
    v.head_w.push_back(t.input(net.head_w[l], train));
    v.head_b.push_back(t.input(net.head_b[l], train));
    v.all.push_back(v.head_w.back());
    v.all.push_back(v.head_b.back());
  }
  v.cls_w = t.input(net.cls_w, train);
  v.cls_b = t.input(net.cls_b, train);
  v.all.push_back(v.cls_w);
  v.all.push_back(v.cls_b);
  return v;
}

NetOut net_head_forward(Tape& t, const MVNet& net, const NetVars& vars,
                        const CameraConfig& cfg, Tape::Var rows,
                        const std::vector<int>& kept_rows,
                        std::vector<Tape::Var>* stages) {
  const int n_rows = cfg.grouped() ? cfg.group->order : cfg.space->size();
  const int k = int(kept_rows.size());
  if (k < 1 || k > n_rows) throw std::invalid_argument("net_forward: bad kept view count");
  const Tensor& rv = t.value(rows);
  if (rv.shape.size() != 2 || rv.dim(0) % k != 0)
    throw std::invalid_argument("net_forward: rows must be [B*K, D]");
  const int b = rv.dim(0) / k;

  rows = t.linear(rows, vars.proj_w);
  const int d = net.head.proj;

  bool identity = k == n_rows;
  for (int i = 0; identity && i < k; ++i) identity = kept_rows[size_t(i)] == i;

  Tape::Var sig;
  if (identity) {
    sig = t.reshape(rows, {b, n_rows, d});
  } else {
    sig = t.assemble_rows(rows, b, kept_rows, n_rows);
    std::vector<double> scale(size_t(n_rows), 0.0);
    for (int r : kept_rows) scale[size_t(r)] = double(n_rows) / k;
    sig = t.row_scale(sig, std::move(scale));
  }
  if (stages) stages->push_back(sig);

  if (net.head.layers > 0) {
    // An aligned configuration lifts to the group with a correlation over the
    // space; everything after that (and every grouped layer) convolves on G.
    const std::vector<int> first_sup = head_support(net, cfg);
    const std::vector<int> gsup = group_support(*cfg.group, net.head.support);
    for (int l = 0; l < net.head.layers; ++l) {
      if (l == 0 && !cfg.grouped())
        sig = t.hcorr(sig, vars.head_w[0], *cfg.space, first_sup);
      else
        sig = t.gconv(sig, vars.head_w[size_t(l)], *cfg.group, l == 0 ? first_sup : gsup);
      if (net.head.norm) sig = t.channel_norm(sig, 1e-5);
      if (net.head.bias) sig = t.add_row_bias(sig, vars.head_b[size_t(l)]);
      sig = t.relu(sig);
      if (stages) stages->push_back(sig);
    }
  }
  NetOut out;
  out.desc = net.head.max_pool ? t.global_max_pool(sig) : t.global_pool(sig);
  out.logits = t.add_bias(t.linear(out.desc, vars.cls_w), vars.cls_b);
  return out;
}

std::vector<Tensor> head_feature_maps(const MVNet& net, const CameraConfig& cfg,
                                      const Tensor& rows) {
  if (rows.shape.size() != 2 || rows.dim(0) != cfg.n_views())
    throw std::invalid_argument("head_feature_maps: rows must be [V, enc_out]");
  std::vector<int> kept(static_cast<size_t>(cfg.n_views()));
  std::iota(kept.begin(), kept.end(), 0);
  Tape t;
  NetVars nv = push_net(t, net, false);
  std::vector<Tape::Var> stages;
  net_head_forward(t, net, nv, cfg, t.input(rows, false), kept, &stages);
  std::vector<Tensor> out;
  for (Tape::Var v : stages) {
    Tensor m = t.value(v); // [1, rows, C] -> [rows, C]
    m.shape = {m.dim(1), m.dim(2)};
    out.push_back(std::move(m));
  }
  return out;
}

NetOut net_forward(Tape& t, const MVNet& net, const NetVars& vars, const CameraConfig& cfg,
                   Tape::Var images, const std::vector<int>& kept_rows) {
  Tape::Var rows = encoder_forward(t, net.enc, vars.enc, images);
  return net_head_forward(t, net, vars, cfg, rows, kept_rows);
}

double lr_at(int step, int total_steps, int warmup_steps, double base) {
  if (total_steps < 1 || step < 0) throw std::invalid_argument("lr_at: bad step counts");
  if (warmup_steps > 0 && step < warmup_steps) return base * double(step) / warmup_steps;
  const int span = std::max(1, total_steps - warmup_steps);
  const double x = std::clamp(double(step - warmup_steps) / span, 0.0, 1.0);
  return base * std::cos(0.5 * M_PI * x);
}

namespace {

int argmax_row(const Tensor& m, int row) {
  const int c = m.shape.back();
  int best = 0;
  for (int j = 1; j < c; ++j)
    if (m.data[size_t(row) * c + j] > m.data[size_t(row) * c + best]) best = j;
  return best;
}

double row_norm(const Tensor& m, int row) {
  const int c = m.shape.back();
  double s = 0;
  for (int j = 0; j < c; ++j) {
    const double v = m.data[size_t(row) * c + j];
    s += v * v;
  }
  return std::sqrt(s);
}

} // namespace

TrainResult train_mvnet(MVNet& net, const Dataset& ds, const CameraConfig& cfg,
                        const TrainConfig& tc) {
  if (ds.train.empty()) throw std::invalid_argument("train_mvnet: empty training split");
  const int v = cfg.n_views();
  if (ds.train.front().views.dim(0) != v)
    throw std::invalid_argument("train_mvnet: dataset/configuration view count mismatch");
  if (tc.keep_hi > 0 && (tc.keep_lo < 1 || tc.keep_lo > tc.keep_hi || tc.keep_hi > v))
    throw std::invalid_argument("train_mvnet: bad keep range");
  if (tc.batch < 1 || tc.epochs < 0) throw std::invalid_argument("train_mvnet: bad batch/epochs");

  const Tensor& v0 = ds.train.front().views;
  const int h = v0.dim(1), w = v0.dim(2), c = v0.dim(3);
  const int classes = net.head.classes;
  const size_t view_sz = size_t(h) * w * c;

  std::vector<Tensor*> params = net_parameters(net);
  std::vector<Tensor> vel;
  vel.reserve(params.size());
  for (Tensor* p : params) vel.push_back(Tensor::zeros(p->shape));

  Rng rng(tc.seed);
  const int n_train = int(ds.train.size());
  const int spe = (n_train + tc.batch - 1) / tc.batch;
  const int total = spe * tc.epochs, warmup = spe;

  Tensor anchors = Tensor::zeros({classes, net.descriptor_dim()});
  std::vector<char> have(size_t(classes), 0);

  std::ofstream csv;
  if (!tc.log_csv.empty()) {
    csv.open(tc.log_csv, std::ios::app);
    if (!csv) throw std::runtime_error("train_mvnet: cannot open " + tc.log_csv);
    csv << "epoch,train_loss,train_acc,test_acc,test_map\n";
  }

  TrainResult res;
  std::vector<int> order(static_cast<size_t>(n_train));
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> all_views(static_cast<size_t>(v));
  std::iota(all_views.begin(), all_views.end(), 0);

  int step = 0;
  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0;
    int correct = 0, seen = 0;
    for (int start = 0; start < n_train; start += tc.batch) {
      const int bsz = std::min(tc.batch, n_train - start);
      std::vector<int> kept = all_views;
      if (tc.keep_hi > 0) {
        const int keep = rng.uniform_int(tc.keep_lo, tc.keep_hi);
        rng.shuffle(kept);
        kept.resize(size_t(keep));
        std::sort(kept.begin(), kept.end());
      }
      const int k = int(kept.size());

      Tensor images = Tensor::zeros({bsz * k, h, w, c});
      std::vector<int> labels(static_cast<size_t>(bsz));
      for (int b = 0; b < bsz; ++b) {
        const Instance& inst = ds.train[size_t(order[size_t(start + b)])];
        labels[size_t(b)] = inst.class_id;
        for (int j = 0; j < k; ++j)
          std::copy_n(inst.views.data.begin() + size_t(kept[size_t(j)]) * view_sz, view_sz,
                      images.data.begin() + (size_t(b) * k + size_t(j)) * view_sz);
      }

      Tape t;
      NetVars nv = push_net(t, net, true);
      NetOut fwd = net_forward(t, net, nv, cfg, t.input(std::move(images), false), kept);
      Tape::Var loss = t.cross_entropy(fwd.logits, labels);
      const Tensor z = t.value(fwd.desc); // copied: feeds anchors after the update
      const int d = z.dim(1);

      bool all_have = tc.triplet_weight > 0;
      for (char f : have) all_have = all_have && f;
      if (all_have) {
        std::vector<double> an(static_cast<size_t>(classes));
        bool ok = true;
        for (int cl = 0; cl < classes; ++cl) {
          an[size_t(cl)] = row_norm(anchors, cl);
          ok = ok && an[size_t(cl)] >= 1e-9;
        }
        for (int b = 0; ok && b < bsz; ++b) ok = row_norm(z, b) >= 1e-9;
        if (ok) {
          Tensor pos = Tensor::zeros({bsz, d}), neg = Tensor::zeros({bsz, d});
          for (int b = 0; b < bsz; ++b) {
            const int lb = labels[size_t(b)];
            std::copy_n(anchors.data.begin() + size_t(lb) * d, size_t(d),
                        pos.data.begin() + size_t(b) * d);
            const double zn = row_norm(z, b);
            int hardest = -1;
            double best_cos = -2;
            for (int cl = 0; cl < classes; ++cl) {
              if (cl == lb) continue;
              double dp = 0;
              for (int j = 0; j < d; ++j)
                dp += z.data[size_t(b) * d + j] * anchors.data[size_t(cl) * d + j];
              const double cs = dp / (zn * an[size_t(cl)]);
              if (cs > best_cos) {
                best_cos = cs;
                hardest = cl;
              }
            }
            std::copy_n(anchors.data.begin() + size_t(hardest) * d, size_t(d),
                        neg.data.begin() + size_t(b) * d);
          }
          Tape::Var trip = t.triplet_cached(fwd.desc, pos, neg, tc.triplet_margin);
          loss = t.add(loss, t.scale(trip, tc.triplet_weight));
        }
      }

      const double lval = t.value(loss).data[0];
      if (!std::isfinite(lval))
        throw std::runtime_error("train_mvnet: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", step " + std::to_string(step));
      t.backward(loss);
      const double lr = lr_at(step, total, warmup, tc.lr);
      for (size_t i = 0; i < params.size(); ++i) {
        if (!t.grad_defined(nv.all[i])) continue;
        const Tensor& g = t.grad(nv.all[i]);
        Tensor& vb = vel[i];
        Tensor& p = *params[i];
        for (size_t j = 0; j < p.data.size(); ++j) {
          vb.data[j] = tc.momentum * vb.data[j] + g.data[j];
          p.data[j] -= lr * (g.data[j] + tc.momentum * vb.data[j]);
        }
      }

      const Tensor& lg = t.value(fwd.logits);
      for (int b = 0; b < bsz; ++b) correct += argmax_row(lg, b) == labels[size_t(b)];
      seen += bsz;
      loss_sum += lval * bsz;
      for (int b = 0; b < bsz; ++b) {
        std::copy_n(z.data.begin() + size_t(b) * d, size_t(d),
                    anchors.data.begin() + size_t(labels[size_t(b)]) * d);
        have[size_t(labels[size_t(b)])] = 1;
      }
      ++step;
    }

    EpochRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / seen;
    row.train_acc = double(correct) / seen;
    if (tc.eval_each_epoch && !ds.test.empty()) {
      EvalResult ev = eval_mvnet(net, ds.test, cfg);
      row.test_acc = ev.acc;
      row.test_map = ev.retrieval.map_micro;
    }
    res.history.push_back(row);
    if (csv.is_open()) {
      char line[160];
      std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.6f,%.6f\n", row.epoch, row.train_loss,
                    row.train_acc, row.test_acc, row.test_map);
      csv << line << std::flush;
    }
    log_info("epoch " + std::to_string(epoch) + ": loss " + std::to_string(row.train_loss) +
             ", acc " + std::to_string(row.train_acc));
  }
  if (!ds.test.empty()) res.test = eval_mvnet(net, ds.test, cfg);
  return res;
}

Tensor encode_views(const MVNet& net, const std::vector<Instance>& split, int batch) {
  if (split.empty()) return Tensor::zeros({0, 0, net.enc.out_dim()});
  if (batch < 1) throw std::invalid_argument("encode_views: batch");
  const Tensor& v0 = split.front().views;
  const int v = v0.dim(0), h = v0.dim(1), w = v0.dim(2), c = v0.dim(3);
  const int d = net.enc.out_dim();
  Tensor out = Tensor::zeros({int(split.size()), v, d});
  for (size_t start = 0; start < split.size(); start += size_t(batch)) {
    const size_t bsz = std::min(size_t(batch), split.size() - start);
    Tensor images = Tensor::zeros({int(bsz) * v, h, w, c});
    for (size_t b = 0; b < bsz; ++b) {
      const Tensor& vw = split[start + b].views;
      if (!same_shape(vw, v0))
        throw std::invalid_argument("encode_views: ragged view shapes");
      std::copy(vw.data.begin(), vw.data.end(), images.data.begin() + b * vw.numel());
    }
    Tape t;
    const std::vector<Tape::Var> ep = push_encoder(t, net.encoder, false);
    Tape::Var feats = encoder_forward(t, net.enc, ep, t.input(std::move(images), false));
    const Tensor& fv = t.value(feats);
    std::copy(fv.data.begin(), fv.data.end(), out.data.begin() + start * size_t(v) * d);
  }
  return out;
}

EvalResult eval_from_features(const MVNet& net, const CameraConfig& cfg, const Tensor& feats,
                              const std::vector<int>& labels,
                              const std::vector<int>* view_subset, int batch) {
  if (feats.shape.size() != 3)
    throw std::invalid_argument("eval_from_features: feats must be [N,V,D]");
  const int n = feats.dim(0), v = feats.dim(1), d = feats.dim(2);
  if (int(labels.size()) != n) throw std::invalid_argument("eval_from_features: labels size");
  if (batch < 1) throw std::invalid_argument("eval_from_features: batch");
  std::vector<int> kept;
  if (view_subset) {
    kept = *view_subset;
    std::sort(kept.begin(), kept.end());
    if (kept.empty() || kept.front() < 0 || kept.back() >= v ||
        std::adjacent_find(kept.begin(), kept.end()) != kept.end())
      throw std::invalid_argument("eval_from_features: bad view subset");
  } else {
    kept.resize(size_t(v));
    std::iota(kept.begin(), kept.end(), 0);
  }
  const int k = int(kept.size());
  const int classes = net.head.classes;

  EvalResult res;
  res.labels = labels;
  res.desc = Tensor::zeros({n, net.descriptor_dim()});
  res.predicted.resize(size_t(n));
  for (int start = 0; start < n; start += batch) {
    const int bsz = std::min(batch, n - start);
    Tensor rows = Tensor::zeros({bsz * k, d});
    for (int b = 0; b < bsz; ++b)
      for (int j = 0; j < k; ++j)
        std::copy_n(feats.data.begin() + (size_t(start + b) * v + size_t(kept[size_t(j)])) * d,
                    size_t(d), rows.data.begin() + (size_t(b) * k + size_t(j)) * d);
    Tape t;
    NetVars nv = push_net(t, net, false);
    NetOut out = net_head_forward(t, net, nv, cfg, t.input(std::move(rows), false), kept);
    const Tensor& dz = t.value(out.desc);
    std::copy(dz.data.begin(), dz.data.end(),
              res.desc.data.begin() + size_t(start) * net.descriptor_dim());
    const Tensor& lg = t.value(out.logits);
    for (int b = 0; b < bsz; ++b) res.predicted[size_t(start + b)] = argmax_row(lg, b);
    (void)classes;
  }
  int correct = 0;
  for (int i = 0; i < n; ++i) correct += res.predicted[size_t(i)] == labels[size_t(i)];
  res.acc = n ? double(correct) / n : 0.0;
  res.retrieval = evaluate_retrieval(res.desc, labels);
  return res;
}

EvalResult eval_mvnet(const MVNet& net, const std::vector<Instance>& split,
                      const CameraConfig& cfg, const std::vector<int>* view_subset) {
  std::vector<int> labels;
  labels.reserve(split.size());
  for (const Instance& inst : split) labels.push_back(inst.class_id);
  const Tensor feats = encode_views(net, split);
  return eval_from_features(net, cfg, feats, labels, view_subset);
}

EvalResult eval_jittered(const MVNet& net, const std::vector<Instance>& split,
                         const CameraConfig& cfg, const RenderSpec& render, int n_points,
                         double sigma_deg, std::uint64_t seed) {
  if (sigma_deg < 0) throw std::invalid_argument("eval_jittered: sigma");
  Rng rng(seed);
  const int v = cfg.n_views();
  std::vector<Instance> jit = split;
  // Perturbations are drawn sequentially (thread-count independent); the
  // re-rendering fans out per instance.
  std::vector<CameraPose> poses(jit.size() * size_t(v));
  for (size_t n = 0; n < jit.size(); ++n)
    for (int i = 0; i < v; ++i) {
      const double ang = std::min(std::fabs(rng.normal()) * sigma_deg * M_PI / 180.0, M_PI);
      Vec3 ax{rng.normal(), rng.normal(), rng.normal()};
      ax = norm(ax) < 1e-12 ? Vec3{0, 0, 1} : normalized(ax);
      poses[n * size_t(v) + size_t(i)] =
          rotated_pose(cfg.poses[size_t(i)], Rotation::axis_angle(ax, ang).m);
    }
  parallel_for(int(jit.size()), [&](int n) {
    Instance& inst = jit[size_t(n)];
    const std::vector<Vec3> pts = instance_points(inst, n_points);
    Tensor views = Tensor::zeros({v, render.height, render.width, 1});
    for (int i = 0; i < v; ++i) {
      Tensor img = render_view(pts, poses[size_t(n) * v + size_t(i)], render);
      std::copy(img.data.begin(), img.data.end(),
                views.data.begin() + size_t(i) * img.numel());
    }
    inst.views = std::move(views);
  });
  return eval_mvnet(net, jit, cfg);
}

void save_mvnet(const std::string& dir, const MVNet& net) {
  nlohmann::json j;
  j["widths"] = net.enc.widths;
  j["in_channels"] = net.enc.in_channels;
  j["circular_w"] = net.enc.circular_w;
  j["stride_h"] = net.enc.stride_h;
  j["stride_w"] = net.enc.stride_w;
  j["head"] = {{"layers", net.head.layers},   {"channels", net.head.channels},
               {"support", net.head.support}, {"classes", net.head.classes},
               {"proj", net.head.proj},       {"bias", net.head.bias},
               {"norm", net.head.norm},       {"max_pool", net.head.max_pool}};
  std::ofstream f(dir + "/net.json");
  if (!f) throw std::runtime_error("save_mvnet: cannot write " + dir + "/net.json");
  f << j.dump(2) << "\n";
  for (size_t k = 0; k < net.encoder.conv_w.size(); ++k) {
    write_tensor(dir + "/enc_w" + std::to_string(k) + ".ft", net.encoder.conv_w[k], Dtype::F64);
    write_tensor(dir + "/enc_b" + std::to_string(k) + ".ft", net.encoder.conv_b[k], Dtype::F64);
  }
  for (size_t l = 0; l < net.head_w.size(); ++l) {
    write_tensor(dir + "/head_w" + std::to_string(l) + ".ft", net.head_w[l], Dtype::F64);
    write_tensor(dir + "/head_b" + std::to_string(l) + ".ft", net.head_b[l], Dtype::F64);
  }
  write_tensor(dir + "/proj_w.ft", net.proj_w, Dtype::F64);
  write_tensor(dir + "/cls_w.ft", net.cls_w, Dtype::F64);
  write_tensor(dir + "/cls_b.ft", net.cls_b, Dtype::F64);
}

MVNet load_mvnet(const std::string& dir) {
  std::ifstream f(dir + "/net.json");
  if (!f) throw std::runtime_error("load_mvnet: cannot open " + dir + "/net.json");
  const nlohmann::json j = nlohmann::json::parse(f);
  MVNet net;
  net.enc.widths = j.at("widths").get<std::vector<int>>();
  net.enc.in_channels = j.at("in_channels").get<int>();
  net.enc.circular_w = j.at("circular_w").get<bool>();
  net.enc.stride_h = j.at("stride_h").get<int>();
  net.enc.stride_w = j.at("stride_w").get<int>();
  net.head.layers = j.at("head").at("layers").get<int>();
  net.head.channels = j.at("head").at("channels").get<int>();
  net.head.support = j.at("head").at("support").get<int>();
  net.head.classes = j.at("head").at("classes").get<int>();
  net.head.proj = j.at("head").at("proj").get<int>();
  net.head.bias = j.at("head").at("bias").get<bool>();
  net.head.norm = j.at("head").at("norm").get<bool>();
  net.head.max_pool = j.at("head").at("max_pool").get<bool>();
  net.encoder.cfg = net.enc;
  for (size_t k = 0; k < net.enc.widths.size(); ++k) {
    net.encoder.conv_w.push_back(read_tensor(dir + "/enc_w" + std::to_string(k) + ".ft"));
    net.encoder.conv_b.push_back(read_tensor(dir + "/enc_b" + std::to_string(k) + ".ft"));
  }
  for (int l = 0; l < net.head.layers; ++l) {
    net.head_w.push_back(read_tensor(dir + "/head_w" + std::to_string(l) + ".ft"));
    net.head_b.push_back(read_tensor(dir + "/head_b" + std::to_string(l) + ".ft"));
  }
  net.proj_w = read_tensor(dir + "/proj_w.ft");
  net.cls_w = read_tensor(dir + "/cls_w.ft");
  net.cls_b = read_tensor(dir + "/cls_b.ft");
  return net;
}

} // namespace finrot
