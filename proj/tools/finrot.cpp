// finrot: finite rotation groups, multi-view rendering, and the equivariant
// aggregation pipeline behind them, driven from the command line. Subcommands
// cover group and quotient-space construction, camera layouts, dataset
// synthesis, training, evaluation, robustness probes, acceptance checks, and
// PLY feature visualization.
//
// Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.
// Every successful run writes manifest.json (command, args, version, content
// hashes; fully deterministic) next to its primary output; the wall-clock
// stamp lives apart in manifest.time so repeated runs stay byte-identical.

#include <finrot/check.hpp>
#include <finrot/dataset.hpp>
#include <finrot/encoder.hpp>
#include <finrot/group.hpp>
#include <finrot/hspace.hpp>
#include <finrot/json_io.hpp>
#include <finrot/log.hpp>
#include <finrot/mesh.hpp>
#include <finrot/mvnet.hpp>
#include <finrot/pca.hpp>
#include <finrot/render.hpp>
#include <finrot/retrieval.hpp>
#include <finrot/rng.hpp>
#include <finrot/shapes.hpp>
#include <finrot/view_config.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace finrot;

namespace {

constexpr int kOk = 0, kFail = 1, kUsage = 2;
constexpr const char* kVersion = "0.1.0";

struct Global {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string log_level = "info";
};

std::string hex64(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Relative outputs land inside --out-dir; absolute paths pass through.
std::string resolve(const Global& g, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || g.out_dir == ".") return path;
  return (fs::path(g.out_dir) / path).string();
}

void ensure_parent(const std::string& path) {
  const fs::path p = fs::path(path).parent_path();
  if (!p.empty()) fs::create_directories(p);
}

std::string parent_dir(const std::string& path) {
  const std::string p = fs::path(path).parent_path().string();
  return p.empty() ? "." : p;
}

// manifest.json is byte-stable across reruns (sorted keys, no time); the
// timestamp goes to manifest.time instead.
void write_manifest(const std::string& dir, const std::string& command,
                    const std::vector<std::string>& args, const nlohmann::json& hashes) {
  const std::string d = dir.empty() ? "." : dir;
  fs::create_directories(d);
  nlohmann::json j;
  j["command"] = command;
  j["args"] = args;
  j["version"] = kVersion;
  j["hashes"] = hashes;
  write_text_file((fs::path(d) / "manifest.json").string(), j.dump(2) + "\n");
  char stamp[64];
  const std::time_t t = std::time(nullptr);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  write_text_file((fs::path(d) / "manifest.time").string(), std::string(stamp) + "\n");
}

std::string cfg_descr(const CameraConfig& cfg) {
  std::string s = to_string(cfg.kind);
  if (cfg.kind == ConfigKind::CyclicPanorama) s += "/k=" + std::to_string(cfg.panorama_k);
  return s;
}

nlohmann::json config_hashes(const CameraConfig& cfg) {
  nlohmann::json h;
  h["config"] = cfg_descr(cfg);
  if (cfg.grouped()) h["group"] = hex64(group_hash(*cfg.group));
  return h;
}

std::vector<int> spaced_subset(int total, int n) {
  std::vector<int> s;
  s.reserve(size_t(n));
  for (int i = 0; i < n; ++i) s.push_back(int(std::int64_t(i) * total / n));
  return s;
}

nlohmann::json retrieval_json(const RetrievalMetrics& m) {
  return {{"map_micro", m.map_micro},  {"map_macro", m.map_macro},
          {"p_at_n", m.mean_p_at_n},   {"r_at_n", m.mean_r_at_n},
          {"f1_at_n", m.mean_f1_at_n}, {"queries", m.queries}};
}

void print_eval(const char* tag, const EvalResult& r) {
  std::printf("%s: acc %.4f  mAP %.4f (macro %.4f)  P@N %.4f  R@N %.4f  F1@N %.4f  [%d queries]\n",
              tag, r.acc, r.retrieval.map_micro, r.retrieval.map_macro, r.retrieval.mean_p_at_n,
              r.retrieval.mean_r_at_n, r.retrieval.mean_f1_at_n, r.retrieval.queries);
}

// The camera configuration a checkpoint was trained under, written by
// `finrot train` as config.json inside the checkpoint directory.
CameraConfig ckpt_config(const std::string& ckpt) {
  const std::string path = (fs::path(ckpt) / "config.json").string();
  if (!fs::exists(path))
    throw std::runtime_error("checkpoint " + ckpt + " has no config.json; retrain or pass --data");
  return config_from_json(read_text_file(path));
}

// A checkpoint only makes sense on data rendered under the same layout.
void check_compat(const std::string& ckpt, const CameraConfig& data_cfg) {
  const std::string path = (fs::path(ckpt) / "config.json").string();
  if (!fs::exists(path)) return; // nothing recorded; trust the caller
  const CameraConfig tc = config_from_json(read_text_file(path));
  if (tc.kind != data_cfg.kind || tc.n_views() != data_cfg.n_views() ||
      (tc.grouped() && group_hash(*tc.group) != group_hash(*data_cfg.group)))
    throw std::runtime_error("checkpoint layout " + cfg_descr(tc) + " does not match dataset " +
                             cfg_descr(data_cfg));
}

// ---------------------------------------------------------------- group ----

struct GroupOpts {
  std::string name, out, verify;
};

int run_group(const Global& g, const GroupOpts& o, const std::vector<std::string>& args) {
  if (!o.verify.empty()) {
    FiniteGroup grp;
    try {
      grp = group_from_json(read_text_file(o.verify));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "group %s: FAIL %s\n", o.verify.c_str(), e.what());
      return kFail;
    }
    std::vector<std::string> bad = verify_group(grp);
    if (!o.name.empty() && build_group(o.name).name != grp.name)
      bad.insert(bad.begin(), "name: file holds '" + grp.name + "', expected '" + o.name + "'");
    if (!bad.empty()) {
      std::fprintf(stderr, "group %s: FAIL %s\n", o.verify.c_str(), bad.front().c_str());
      for (size_t i = 1; i < bad.size(); ++i) std::fprintf(stderr, "  also: %s\n", bad[i].c_str());
      return kFail;
    }
    std::printf("group %s: ok (%s, order %d, hash %s)\n", o.verify.c_str(), grp.name.c_str(),
                grp.order, hex64(group_hash(grp)).c_str());
    return kOk;
  }
  if (o.name.empty() || o.out.empty())
    throw std::invalid_argument("group: pass --name NAME --out FILE, or --verify FILE");
  const FiniteGroup grp = build_group(o.name);
  const std::string out = resolve(g, o.out);
  ensure_parent(out);
  write_text_file(out, group_to_json(grp));
  write_manifest(parent_dir(out), "group", args, {{"group", hex64(group_hash(grp))}});
  std::printf("wrote %s: %s, order %d, hash %s\n", out.c_str(), grp.name.c_str(), grp.order,
              hex64(group_hash(grp)).c_str());
  return kOk;
}

// --------------------------------------------------------------- hspace ----

struct HspaceOpts {
  std::string group = "ico", kind = "v12", out;
};

int run_hspace(const Global& g, const HspaceOpts& o, const std::vector<std::string>& args) {
  const FiniteGroup grp = build_group(o.group);
  const HSpace h = build_hspace(grp, parse_hspace_kind(o.kind));
  const std::string out = resolve(g, o.out);
  ensure_parent(out);
  write_text_file(out, hspace_to_json(h));
  write_manifest(parent_dir(out), "hspace", args, {{"group", hex64(group_hash(grp))}});
  std::printf("wrote %s: %s on %s, %d points, stabilizer order %d\n", out.c_str(),
              to_string(h.kind).c_str(), grp.name.c_str(), h.size(), h.stabilizer_order);
  return kOk;
}

// ---------------------------------------------------------------- views ----

struct ViewsOpts {
  std::string kind, out, check;
  int k = 6;
  double radius = 2.5;
};

int run_views(const Global& g, const ViewsOpts& o, const std::vector<std::string>& args) {
  if (!o.check.empty()) {
    CameraConfig cfg;
    try {
      cfg = config_from_json(read_text_file(o.check));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "views %s: FAIL %s\n", o.check.c_str(), e.what());
      return kFail;
    }
    if (!cfg.grouped())
      throw std::invalid_argument("views: " + cfg_descr(cfg) +
                                  " has no per-view group labeling to check");
    for (int k = 0; k < cfg.group->order; ++k) {
      try {
        permutation_under_rotation(cfg, k);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "views %s: FAIL rotation %d does not permute the poses: %s\n",
                     o.check.c_str(), k, e.what());
        return kFail;
      }
    }
    std::printf("views %s: ok, all %d rotations permute the %d poses consistently\n",
                o.check.c_str(), cfg.group->order, cfg.n_views());
    return kOk;
  }
  if (o.kind.empty() || o.out.empty())
    throw std::invalid_argument("views: pass --kind KIND --out FILE, or --check-equivariance FILE");
  const CameraConfig cfg = gen_config(parse_config_kind(o.kind), o.radius, o.k);
  const std::string out = resolve(g, o.out);
  ensure_parent(out);
  write_text_file(out, config_to_json(cfg));
  write_manifest(parent_dir(out), "views", args, config_hashes(cfg));
  std::printf("wrote %s: %s, %d views at radius %g\n", out.c_str(), cfg_descr(cfg).c_str(),
              cfg.n_views(), cfg.radius);
  return kOk;
}

// ---------------------------------------------------------------- check ----

struct CheckOpts {
  bool all = false;
  std::vector<int> only;
  std::string report;
};

int run_check(const Global& g, const CheckOpts& o, const std::vector<std::string>& args) {
  if (!o.all && o.only.empty())
    throw std::invalid_argument("check: pass --all, or --only ID [ID...]");
  const std::vector<CriterionResult> results = run_acceptance(o.all ? std::vector<int>{} : o.only);
  const bool pass = print_report(results, stdout);
  if (!o.report.empty()) {
    const std::string out = resolve(g, o.report);
    ensure_parent(out);
    std::FILE* f = std::fopen(out.c_str(), "w");
    if (!f) throw std::runtime_error("check: cannot open " + out);
    print_report(results, f);
    std::fclose(f);
  }
  write_manifest(g.out_dir, "check", args, {});
  return pass ? kOk : kFail;
}

// ----------------------------------------------------------------- data ----

struct DataOpts {
  std::string out, kind = "60x1", mode = "rotated";
  int classes = 8, train = 100, test = 30, points = 256, k = 6, size = 24, splat = 1;
  double radius = 2.5, focal = 0;
  bool perspective = false;
};

int run_data(const Global& g, const DataOpts& o, const std::vector<std::string>& args) {
  DatasetSpec spec;
  spec.n_classes = o.classes;
  spec.train_per_class = o.train;
  spec.test_per_class = o.test;
  spec.points_per_shape = o.points;
  if (o.mode == "rotated") spec.random_pose = true;
  else if (o.mode == "aligned") spec.random_pose = false;
  else throw std::invalid_argument("data: --mode is 'rotated' or 'aligned'");
  RenderSpec render;
  render.height = render.width = o.size;
  render.splat_radius = o.splat;
  render.perspective = o.perspective;
  render.focal = o.focal;
  const Dataset ds =
      make_dataset(spec, parse_config_kind(o.kind), o.radius, o.k, render, g.seed);
  const std::string out = resolve(g, o.out);
  save_dataset(out, ds);
  write_manifest(out, "data", args, config_hashes(ds.camera_config()));
  std::printf("wrote %s: %d classes, %zu train + %zu test instances, %d views of %dx%d (%s)\n",
              out.c_str(), spec.n_classes, ds.train.size(), ds.test.size(),
              ds.camera_config().n_views(), render.height, render.width, o.mode.c_str());
  return kOk;
}

// ---------------------------------------------------------------- train ----

struct TrainSettings {
  std::string data, out = "ckpt", log_csv;
  EncoderConfig enc;
  HeadConfig head;
  TrainConfig tc;
};

int run_train(const Global& g, TrainSettings s, const std::vector<std::string>& args) {
  if (s.data.empty())
    throw std::invalid_argument("train: --data DIR (or \"data\" in --config) is required");
  const Dataset ds = load_dataset(resolve(g, s.data));
  const CameraConfig cfg = ds.camera_config();
  s.head.classes = ds.spec.n_classes;
  s.enc.in_channels = 1;

  const std::string out = resolve(g, s.out);
  fs::create_directories(out);
  s.tc.log_csv = s.log_csv.empty() ? (fs::path(out) / "metrics.csv").string()
                                   : resolve(g, s.log_csv);
  ensure_parent(s.tc.log_csv);

  Rng rng(s.tc.seed);
  MVNet net = make_mvnet(s.enc, s.head, rng);
  log_info("train: " + cfg_descr(cfg) + ", " + std::to_string(ds.train.size()) + " instances, " +
           std::to_string(s.tc.epochs) + " epochs, seed " + std::to_string(s.tc.seed));
  const TrainResult tr = train_mvnet(net, ds, cfg, s.tc);

  save_mvnet(out, net);
  write_text_file((fs::path(out) / "config.json").string(), config_to_json(cfg));

  nlohmann::json m;
  m["test"] = retrieval_json(tr.test.retrieval);
  m["test"]["acc"] = tr.test.acc;
  m["history"] = nlohmann::json::array();
  for (const EpochRow& row : tr.history)
    m["history"].push_back({{"epoch", row.epoch},
                            {"train_loss", row.train_loss},
                            {"train_acc", row.train_acc},
                            {"test_acc", row.test_acc},
                            {"test_map", row.test_map}});
  write_text_file((fs::path(out) / "metrics.json").string(), m.dump(2) + "\n");

  nlohmann::json hashes = config_hashes(cfg);
  hashes["data"] = s.data;
  write_manifest(out, "train", args, hashes);
  print_eval("test", tr.test);
  std::printf("wrote %s (net.json, tensors, config.json, metrics)\n", out.c_str());
  return kOk;
}

// ----------------------------------------------------------------- eval ----

struct EvalOpts {
  std::string ckpt, data, split = "test", out;
  int views = 0;
  bool rerank = false;
};

int run_eval(const Global& g, const EvalOpts& o, const std::vector<std::string>& args) {
  const MVNet net = load_mvnet(o.ckpt);
  const Dataset ds = load_dataset(o.data);
  const CameraConfig cfg = ds.camera_config();
  check_compat(o.ckpt, cfg);
  const std::vector<Instance>* split = nullptr;
  if (o.split == "test") split = &ds.test;
  else if (o.split == "train") split = &ds.train;
  else throw std::invalid_argument("eval: --split is 'test' or 'train'");

  std::vector<int> subset;
  const std::vector<int>* subset_p = nullptr;
  if (o.views > 0 && o.views < cfg.n_views()) {
    subset = spaced_subset(cfg.n_views(), o.views);
    subset_p = &subset;
  }
  EvalResult res = eval_mvnet(net, *split, cfg, subset_p);
  if (o.rerank) res.retrieval = evaluate_retrieval(res.desc, res.labels, &res.predicted, true);

  const std::string tag = o.split + (subset_p ? "/" + std::to_string(o.views) + "v" : "") +
                          (o.rerank ? "/rerank" : "");
  print_eval(tag.c_str(), res);
  if (!o.out.empty()) {
    const std::string out = resolve(g, o.out);
    ensure_parent(out);
    nlohmann::json m = retrieval_json(res.retrieval);
    m["acc"] = res.acc;
    m["split"] = o.split;
    m["views"] = subset_p ? o.views : cfg.n_views();
    m["rerank"] = o.rerank;
    write_text_file(out, m.dump(2) + "\n");
    write_manifest(parent_dir(out), "eval", args, config_hashes(cfg));
  }
  return kOk;
}

// --------------------------------------------------------------- jitter ----

struct JitterOpts {
  std::string ckpt, data, out;
  std::vector<double> sigma;
  int draws = 1;
};

int run_jitter(const Global& g, const JitterOpts& o, const std::vector<std::string>& args) {
  const MVNet net = load_mvnet(o.ckpt);
  const Dataset ds = load_dataset(o.data);
  const CameraConfig cfg = ds.camera_config();
  check_compat(o.ckpt, cfg);
  std::vector<double> sigmas = o.sigma.empty() ? std::vector<double>{0, 5, 15, 30, 45} : o.sigma;
  if (o.draws < 1) throw std::invalid_argument("jitter: --draws must be >= 1");

  std::string csv = "sigma,draw,acc,map_micro\n";
  std::printf("%8s  %6s  %6s   (%d draw%s each)\n", "sigma", "acc", "mAP", o.draws,
              o.draws == 1 ? "" : "s");
  for (size_t i = 0; i < sigmas.size(); ++i) {
    double acc = 0, map = 0;
    for (int d = 0; d < o.draws; ++d) {
      const std::uint64_t seed = g.seed + 100 * std::uint64_t(i) + std::uint64_t(d);
      const EvalResult r = eval_jittered(net, ds.test, cfg, ds.render,
                                         ds.spec.points_per_shape, sigmas[i], seed);
      acc += r.acc;
      map += r.retrieval.map_micro;
      char line[128];
      std::snprintf(line, sizeof line, "%g,%d,%.6f,%.6f\n", sigmas[i], d, r.acc,
                    r.retrieval.map_micro);
      csv += line;
    }
    std::printf("%7.1f°  %.4f  %.4f\n", sigmas[i], acc / o.draws, map / o.draws);
  }
  if (!o.out.empty()) {
    const std::string out = resolve(g, o.out);
    ensure_parent(out);
    write_text_file(out, csv);
    write_manifest(parent_dir(out), "jitter", args, config_hashes(cfg));
  }
  return kOk;
}

// ------------------------------------------------------------------ viz ----

struct VizOpts {
  std::string ckpt, data, out;
  int layer = -1, index = 0, cls = 0;
  std::uint64_t shape_seed = 0;
  bool seed_set = false;
};

int run_viz(const Global& g, const VizOpts& o, const std::vector<std::string>& args) {
  const MVNet net = load_mvnet(o.ckpt);
  CameraConfig cfg;
  Instance inst;
  RenderSpec render;
  int n_points = 256;
  if (!o.data.empty()) {
    const Dataset ds = load_dataset(o.data);
    cfg = ds.camera_config();
    check_compat(o.ckpt, cfg);
    if (o.index < 0 || o.index >= int(ds.test.size()))
      throw std::invalid_argument("viz: --index out of range (test split has " +
                                  std::to_string(ds.test.size()) + " instances)");
    inst = ds.test[size_t(o.index)];
    render = ds.render;
    n_points = ds.spec.points_per_shape;
  } else {
    cfg = ckpt_config(o.ckpt);
    inst.class_id = o.cls;
    inst.shape_seed = o.seed_set ? o.shape_seed : g.seed;
    inst.rotation = Rotation::identity();
    inst.views = render_views(instance_points(inst, n_points), cfg, render);
  }

  const Tensor feats = encode_views(net, {inst});
  Tensor rows = feats;
  rows.shape = {feats.dim(1), feats.dim(2)};
  const std::vector<Tensor> stages = head_feature_maps(net, cfg, rows);
  const int last = int(stages.size()) - 1;
  const int layer = o.layer < 0 ? last : o.layer;
  if (layer > last)
    throw std::invalid_argument("viz: --layer must be 0.." + std::to_string(last));
  const Tensor& fm = stages[size_t(layer)];

  // Face count picks the solid: group rows tile the pentakis dodecahedron,
  // vertex rows its dual's faces, face-center rows the icosahedron itself.
  PolyMesh mesh;
  if (fm.dim(0) == 60) mesh = pentakis_mesh(*cfg.group);
  else if (fm.dim(0) == 12) mesh = dodecahedron_mesh();
  else if (fm.dim(0) == 20) mesh = icosahedron_mesh();
  else
    throw std::runtime_error("viz: stage " + std::to_string(layer) + " has " +
                             std::to_string(fm.dim(0)) +
                             " rows; PLY export needs 12, 20, or 60");
  const std::string out = resolve(g, o.out);
  ensure_parent(out);
  write_ply(out, mesh, pca_rgb(fm));
  nlohmann::json hashes = config_hashes(cfg);
  hashes["layer"] = layer;
  write_manifest(parent_dir(out), "viz", args, hashes);
  std::printf("wrote %s: stage %d/%d, %d faces, class %d seed %llu\n", out.c_str(), layer, last,
              fm.dim(0), inst.class_id, static_cast<unsigned long long>(inst.shape_seed));
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> raw_args(argv + (argc > 0 ? 1 : 0), argv + argc);
  CLI::App app{"finite-rotation-group multi-view toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.footer("FINROT_THREADS caps worker threads (default: hardware concurrency).");

  Global g;
  auto* seed_opt = app.add_option("--seed", g.seed, "base RNG seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "directory relative outputs land in")
      ->capture_default_str();
  app.add_option("--log-level", g.log_level, "debug|info|warn|error|off")->capture_default_str();

  GroupOpts go;
  auto* c_group = app.add_subcommand("group", "build or verify a finite rotation group");
  c_group->fallthrough();
  c_group->add_option("--name", go.name, "c<k>, d<k>, tet, oct, or ico");
  c_group->add_option("--out", go.out, "write the group as JSON");
  c_group->add_option("--verify", go.verify, "re-check every axiom of a saved group file");

  HspaceOpts ho;
  auto* c_hspace = app.add_subcommand("hspace", "build a quotient space of a group");
  c_hspace->fallthrough();
  c_hspace->add_option("--group", ho.group, "group name")->capture_default_str();
  c_hspace->add_option("--kind", ho.kind, "v12, f20, or group")->capture_default_str();
  c_hspace->add_option("--out", ho.out, "write the space as JSON")->required();

  ViewsOpts vo;
  auto* c_views = app.add_subcommand("views", "generate or check a camera layout");
  c_views->fallthrough();
  c_views->add_option("--kind", vo.kind, "12x5, 20x3, 60x1, a12, a20, or pano");
  c_views->add_option("--k", vo.k, "panorama fold (pano only)")->capture_default_str();
  c_views->add_option("--radius", vo.radius, "viewing-sphere radius")->capture_default_str();
  c_views->add_option("--out", vo.out, "write the layout as JSON");
  c_views->add_option("--check-equivariance", vo.check,
                      "verify every group rotation permutes the saved poses");

  CheckOpts ko;
  auto* c_check = app.add_subcommand("check", "run the acceptance criteria");
  c_check->fallthrough();
  c_check->add_flag("--all", ko.all, "run every criterion");
  c_check->add_option("--only", ko.only, "criterion ids to run");
  c_check->add_option("--report", ko.report, "also write the report to a file");

  DataOpts dopt;
  auto* c_data = app.add_subcommand("data", "render a synthetic multi-view dataset");
  c_data->fallthrough();
  c_data->add_option("--out", dopt.out, "dataset directory")->required();
  c_data->add_option("--kind", dopt.kind, "camera layout")->capture_default_str();
  c_data->add_option("--mode", dopt.mode, "rotated (random pose) or aligned")
      ->capture_default_str();
  c_data->add_option("--classes", dopt.classes, "shape classes")->capture_default_str();
  c_data->add_option("--train", dopt.train, "train instances per class")->capture_default_str();
  c_data->add_option("--test", dopt.test, "test instances per class")->capture_default_str();
  c_data->add_option("--points", dopt.points, "points per shape")->capture_default_str();
  c_data->add_option("--k", dopt.k, "panorama fold (pano only)")->capture_default_str();
  c_data->add_option("--radius", dopt.radius, "viewing-sphere radius")->capture_default_str();
  c_data->add_option("--size", dopt.size, "image height and width")->capture_default_str();
  c_data->add_option("--splat", dopt.splat, "point splat radius, pixels")->capture_default_str();
  c_data->add_flag("--perspective", dopt.perspective, "perspective instead of orthographic");
  c_data->add_option("--focal", dopt.focal, "perspective focal length; <=0 uses camera distance");

  // train: defaults < --config JSON < explicit flags.
  TrainSettings ts;
  std::string train_config;
  auto* c_train = app.add_subcommand("train", "train a model on a rendered dataset");
  c_train->fallthrough();
  c_train->add_option("--config", train_config, "JSON file with any of the other options");
  auto* t_data = c_train->add_option("--data", ts.data, "dataset directory");
  auto* t_out = c_train->add_option("--out", ts.out, "checkpoint directory")
                    ->capture_default_str();
  auto* t_epochs = c_train->add_option("--epochs", ts.tc.epochs)->capture_default_str();
  auto* t_batch = c_train->add_option("--batch", ts.tc.batch)->capture_default_str();
  auto* t_lr = c_train->add_option("--lr", ts.tc.lr)->capture_default_str();
  auto* t_momentum = c_train->add_option("--momentum", ts.tc.momentum)->capture_default_str();
  auto* t_tw = c_train->add_option("--triplet-weight", ts.tc.triplet_weight)
                   ->capture_default_str();
  auto* t_tm = c_train->add_option("--triplet-margin", ts.tc.triplet_margin)
                   ->capture_default_str();
  auto* t_klo = c_train->add_option("--keep-lo", ts.tc.keep_lo,
                                    "min views kept per step; 0 keeps all")
                    ->capture_default_str();
  auto* t_khi = c_train->add_option("--keep-hi", ts.tc.keep_hi,
                                    "max views kept per step; 0 keeps all")
                    ->capture_default_str();
  auto* t_eval = c_train->add_flag("--eval-each-epoch", ts.tc.eval_each_epoch,
                                   "run the test split after every epoch");
  auto* t_csv = c_train->add_option("--log-csv", ts.log_csv,
                                    "metrics CSV path (default: <out>/metrics.csv)");
  auto* t_widths = c_train->add_option("--widths", ts.enc.widths, "encoder channel widths")
                       ->capture_default_str();
  auto* t_layers = c_train->add_option("--layers", ts.head.layers, "head layers; 0 = mean pool")
                       ->capture_default_str();
  auto* t_channels = c_train->add_option("--channels", ts.head.channels)->capture_default_str();
  auto* t_support = c_train->add_option("--support", ts.head.support, "filter support size")
                        ->capture_default_str();
  auto* t_proj = c_train->add_option("--proj", ts.head.proj, "encoder-to-head projection width")
                     ->capture_default_str();
  auto* t_bias = c_train->add_flag("--bias,!--no-bias", ts.head.bias, "per-channel head bias")
                     ->capture_default_str();
  auto* t_norm = c_train->add_flag("--norm,!--no-norm", ts.head.norm,
                                   "per-channel normalization in the head")
                     ->capture_default_str();
  auto* t_maxp = c_train->add_flag("--max-pool,!--no-max-pool", ts.head.max_pool,
                                   "max instead of mean row pooling")
                     ->capture_default_str();

  EvalOpts eo;
  auto* c_eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  c_eval->fallthrough();
  c_eval->add_option("--ckpt", eo.ckpt, "checkpoint directory")->required();
  c_eval->add_option("--data", eo.data, "dataset directory")->required();
  c_eval->add_option("--split", eo.split, "test or train")->capture_default_str();
  c_eval->add_option("--views", eo.views, "evaluate on an evenly spaced view subset; 0 = all")
      ->capture_default_str();
  c_eval->add_flag("--rerank", eo.rerank, "partition retrieval rankings by predicted class");
  c_eval->add_option("--out", eo.out, "write metrics JSON here");

  JitterOpts jo;
  auto* c_jitter = app.add_subcommand("jitter", "re-render test views under pose noise");
  c_jitter->fallthrough();
  c_jitter->add_option("--ckpt", jo.ckpt, "checkpoint directory")->required();
  c_jitter->add_option("--data", jo.data, "dataset directory")->required();
  c_jitter->add_option("--sigma", jo.sigma, "noise angles, degrees (default 0 5 15 30 45)");
  c_jitter->add_option("--draws", jo.draws, "independent draws per sigma")
      ->capture_default_str();
  c_jitter->add_option("--out", jo.out, "write per-draw CSV here");

  VizOpts zo;
  auto* c_viz = app.add_subcommand("viz", "export a head feature map as a colored PLY solid");
  c_viz->fallthrough();
  c_viz->add_option("--ckpt", zo.ckpt, "checkpoint directory")->required();
  c_viz->add_option("--out", zo.out, "output .ply path")->required();
  c_viz->add_option("--layer", zo.layer, "head stage; 0 = encoder rows, default = last");
  c_viz->add_option("--data", zo.data, "take the instance from this dataset's test split");
  c_viz->add_option("--index", zo.index, "instance index within the test split")
      ->capture_default_str();
  c_viz->add_option("--class", zo.cls, "synthesized shape class (no --data)")
      ->capture_default_str();
  auto* z_seed = c_viz->add_option("--shape-seed", zo.shape_seed,
                                   "synthesized shape seed (default: --seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    set_log_level(parse_log_level(g.log_level));
    if (c_group->parsed()) return run_group(g, go, raw_args);
    if (c_hspace->parsed()) return run_hspace(g, ho, raw_args);
    if (c_views->parsed()) return run_views(g, vo, raw_args);
    if (c_check->parsed()) return run_check(g, ko, raw_args);
    if (c_data->parsed()) return run_data(g, dopt, raw_args);
    if (c_train->parsed()) {
      // Re-apply precedence on top of the config file, which CLI11 cannot see.
      TrainSettings s;
      s.tc.seed = g.seed;
      if (!train_config.empty()) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(read_text_file(train_config));
        } catch (const nlohmann::json::exception& e) {
          throw std::invalid_argument("train: bad --config: " + std::string(e.what()));
        }
        s.data = j.value("data", s.data);
        s.out = j.value("out", s.out);
        s.log_csv = j.value("log_csv", s.log_csv);
        s.tc.epochs = j.value("epochs", s.tc.epochs);
        s.tc.batch = j.value("batch", s.tc.batch);
        s.tc.lr = j.value("lr", s.tc.lr);
        s.tc.momentum = j.value("momentum", s.tc.momentum);
        s.tc.triplet_weight = j.value("triplet_weight", s.tc.triplet_weight);
        s.tc.triplet_margin = j.value("triplet_margin", s.tc.triplet_margin);
        s.tc.keep_lo = j.value("keep_lo", s.tc.keep_lo);
        s.tc.keep_hi = j.value("keep_hi", s.tc.keep_hi);
        s.tc.seed = j.value("seed", s.tc.seed);
        s.tc.eval_each_epoch = j.value("eval_each_epoch", s.tc.eval_each_epoch);
        s.enc.widths = j.value("widths", s.enc.widths);
        s.head.layers = j.value("layers", s.head.layers);
        s.head.channels = j.value("channels", s.head.channels);
        s.head.support = j.value("support", s.head.support);
        s.head.proj = j.value("proj", s.head.proj);
        s.head.bias = j.value("bias", s.head.bias);
        s.head.norm = j.value("norm", s.head.norm);
        s.head.max_pool = j.value("max_pool", s.head.max_pool);
      }
      if (t_data->count()) s.data = ts.data;
      if (t_out->count()) s.out = ts.out;
      if (t_csv->count()) s.log_csv = ts.log_csv;
      if (t_epochs->count()) s.tc.epochs = ts.tc.epochs;
      if (t_batch->count()) s.tc.batch = ts.tc.batch;
      if (t_lr->count()) s.tc.lr = ts.tc.lr;
      if (t_momentum->count()) s.tc.momentum = ts.tc.momentum;
      if (t_tw->count()) s.tc.triplet_weight = ts.tc.triplet_weight;
      if (t_tm->count()) s.tc.triplet_margin = ts.tc.triplet_margin;
      if (t_klo->count()) s.tc.keep_lo = ts.tc.keep_lo;
      if (t_khi->count()) s.tc.keep_hi = ts.tc.keep_hi;
      if (t_eval->count()) s.tc.eval_each_epoch = ts.tc.eval_each_epoch;
      if (t_widths->count()) s.enc.widths = ts.enc.widths;
      if (t_layers->count()) s.head.layers = ts.head.layers;
      if (t_channels->count()) s.head.channels = ts.head.channels;
      if (t_support->count()) s.head.support = ts.head.support;
      if (t_proj->count()) s.head.proj = ts.head.proj;
      if (t_bias->count()) s.head.bias = ts.head.bias;
      if (t_norm->count()) s.head.norm = ts.head.norm;
      if (t_maxp->count()) s.head.max_pool = ts.head.max_pool;
      if (seed_opt->count()) s.tc.seed = g.seed;
      return run_train(g, s, raw_args);
    }
    if (c_eval->parsed()) return run_eval(g, eo, raw_args);
    if (c_jitter->parsed()) return run_jitter(g, jo, raw_args);
    if (c_viz->parsed()) {
      zo.seed_set = z_seed->count() > 0;
      return run_viz(g, zo, raw_args);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFail;
  } catch (...) {
    std::fprintf(stderr, "error: unknown failure\n");
    return kFail;
  }
  return kUsage;
}
