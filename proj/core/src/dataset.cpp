#include "finrot/dataset.hpp"

#include "finrot/rng.hpp"
#include "finrot/shapes.hpp"
#include "finrot/tensor_io.hpp"
#include "finrot/threading.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace finrot {

namespace {

void append_split(std::vector<Instance>& out, int n_classes, int per_class, int n_points,
                  bool random_pose, const CameraConfig& config, const RenderSpec& render,
                  Rng& rng) {
  // Seeds and poses are drawn sequentially so the stream is identical at any
  // thread count; only the (pure) rendering fans out.
  const size_t base = out.size();
  for (int c = 0; c < n_classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      Instance inst;
      inst.class_id = c;
      inst.shape_seed = rng.bits();
      inst.rotation = random_pose ? rng.rotation() : Rotation::identity();
      out.push_back(std::move(inst));
    }
  }
  parallel_for(n_classes * per_class, [&](int k) {
    Instance& inst = out[base + size_t(k)];
    inst.views = render_views(instance_points(inst, n_points), config, render);
  });
}

std::string instance_dir(const char* split, size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05zu", split, i);
  return buf;
}

} // namespace

std::vector<Vec3> instance_points(const Instance& inst, int n_points) {
  std::vector<Vec3> pts = make_shape(inst.class_id, inst.shape_seed, n_points);
  const Mat3& r = inst.rotation.m;
  for (Vec3& p : pts) p = r * p;
  return pts;
}

Dataset make_dataset(const DatasetSpec& spec, const CameraConfig& config,
                     const RenderSpec& render, std::uint64_t seed) {
  if (spec.n_classes < 1 || spec.n_classes > shape_class_count())
    throw std::invalid_argument("make_dataset: n_classes");
  Dataset ds;
  ds.spec = spec;
  ds.kind = config.kind;
  ds.panorama_k = config.panorama_k;
  ds.radius = config.radius;
  ds.render = render;
  Rng rng(seed);
  append_split(ds.train, spec.n_classes, spec.train_per_class, spec.points_per_shape,
               spec.random_pose, config, render, rng);
  append_split(ds.test, spec.n_classes, spec.test_per_class, spec.points_per_shape,
               spec.random_pose, config, render, rng);
  return ds;
}

Dataset make_dataset(const DatasetSpec& spec, ConfigKind kind, double radius, int panorama_k,
                     const RenderSpec& render, std::uint64_t seed) {
  return make_dataset(spec, gen_config(kind, radius, panorama_k), render, seed);
}

void save_dataset(const std::string& dir, const Dataset& ds) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::uint64_t ghash = group_hash(*ds.camera_config().group);
  char hash_buf[24];
  std::snprintf(hash_buf, sizeof hash_buf, "0x%016llx", (unsigned long long)ghash);

  nlohmann::json top;
  top["format"] = "finrot-dataset";
  top["version"] = 1;
  top["spec"] = {{"n_classes", ds.spec.n_classes},
                 {"train_per_class", ds.spec.train_per_class},
                 {"test_per_class", ds.spec.test_per_class},
                 {"random_pose", ds.spec.random_pose},
                 {"points_per_shape", ds.spec.points_per_shape}};
  top["kind"] = to_string(ds.kind);
  top["panorama_k"] = ds.panorama_k;
  top["radius"] = ds.radius;
  top["render"] = {{"height", ds.render.height},       {"width", ds.render.width},
                   {"splat_radius", ds.render.splat_radius}, {"extent", ds.render.extent},
                   {"quantum", ds.render.quantum},     {"perspective", ds.render.perspective},
                   {"focal", ds.render.focal}};
  top["group_hash"] = hash_buf;
  {
    std::ofstream f(dir + "/dataset.json");
    if (!f) throw std::runtime_error("save_dataset: cannot write " + dir + "/dataset.json");
    f << top.dump(1) << "\n";
  }

  std::ofstream manifest(dir + "/manifest.csv");
  if (!manifest) throw std::runtime_error("save_dataset: cannot write " + dir + "/manifest.csv");
  manifest << "split,dir,class\n";
  auto dump = [&](const char* name, const std::vector<Instance>& split) {
    for (size_t i = 0; i < split.size(); ++i) {
      const Instance& in = split[i];
      const std::string sub = instance_dir(name, i);
      manifest << name << "," << sub << "," << in.class_id << "\n";
      fs::create_directories(dir + "/" + sub);
      nlohmann::json meta;
      meta["class"] = in.class_id;
      meta["shape_seed"] = in.shape_seed;
      meta["rotation"] = {in.rotation.q.w, in.rotation.q.x, in.rotation.q.y, in.rotation.q.z};
      meta["config_hash"] = hash_buf;
      meta["kind"] = to_string(ds.kind);
      std::ofstream mf(dir + "/" + sub + "/meta.json");
      if (!mf) throw std::runtime_error("save_dataset: cannot write " + sub + "/meta.json");
      mf << meta.dump(1) << "\n";
      write_tensor(dir + "/" + sub + "/views.ft", in.views, Dtype::F32);
    }
  };
  dump("train", ds.train);
  dump("test", ds.test);
}

Dataset load_dataset(const std::string& dir) {
  Dataset ds;
  {
    std::ifstream f(dir + "/dataset.json");
    if (!f) throw std::runtime_error("load_dataset: cannot open " + dir + "/dataset.json");
    nlohmann::json top;
    try {
      top = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(std::string("load_dataset: dataset.json: ") + e.what());
    }
    if (top.value("format", "") != "finrot-dataset")
      throw std::runtime_error("load_dataset: bad format tag in dataset.json");
    const nlohmann::json& sp = top.at("spec");
    ds.spec.n_classes = sp.at("n_classes").get<int>();
    ds.spec.train_per_class = sp.at("train_per_class").get<int>();
    ds.spec.test_per_class = sp.at("test_per_class").get<int>();
    ds.spec.random_pose = sp.at("random_pose").get<bool>();
    ds.spec.points_per_shape = sp.at("points_per_shape").get<int>();
    ds.kind = parse_config_kind(top.at("kind").get<std::string>());
    ds.panorama_k = top.at("panorama_k").get<int>();
    ds.radius = top.at("radius").get<double>();
    const nlohmann::json& r = top.at("render");
    ds.render.height = r.at("height").get<int>();
    ds.render.width = r.at("width").get<int>();
    ds.render.splat_radius = r.at("splat_radius").get<int>();
    ds.render.extent = r.at("extent").get<double>();
    ds.render.quantum = r.at("quantum").get<double>();
    ds.render.perspective = r.at("perspective").get<bool>();
    ds.render.focal = r.at("focal").get<double>();
  }
  std::ifstream manifest(dir + "/manifest.csv");
  if (!manifest) throw std::runtime_error("load_dataset: cannot open " + dir + "/manifest.csv");
  std::string line;
  std::getline(manifest, line); // header
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string split, sub, cls;
    std::getline(ss, split, ',');
    std::getline(ss, sub, ',');
    std::getline(ss, cls, ',');
    std::ifstream mf(dir + "/" + sub + "/meta.json");
    if (!mf) throw std::runtime_error("load_dataset: cannot open " + sub + "/meta.json");
    nlohmann::json meta = nlohmann::json::parse(mf);
    Instance inst;
    inst.class_id = meta.at("class").get<int>();
    if (inst.class_id != std::stoi(cls))
      throw std::runtime_error("load_dataset: manifest/sidecar class mismatch in " + sub);
    inst.shape_seed = meta.at("shape_seed").get<std::uint64_t>();
    const nlohmann::json& q = meta.at("rotation");
    inst.rotation = Rotation::from_quat(
        {q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()});
    inst.views = read_tensor(dir + "/" + sub + "/views.ft");
    if (inst.views.shape.size() != 4)
      throw std::runtime_error("load_dataset: bad view tensor in " + sub);
    if (split == "train")
      ds.train.push_back(std::move(inst));
    else if (split == "test")
      ds.test.push_back(std::move(inst));
    else
      throw std::runtime_error("load_dataset: unknown split " + split);
  }
  return ds;
}

} // namespace finrot
