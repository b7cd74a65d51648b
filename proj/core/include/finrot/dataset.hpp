#pragma once

#include "finrot/render.hpp"
#include "finrot/rotation.hpp"
#include "finrot/tensor.hpp"
#include "finrot/view_config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace finrot {

// One rendered multi-view example. The underlying cloud is reproducible from
// (class_id, shape_seed, rotation), so views can be re-rendered under a
// different camera configuration without storing geometry.
struct Instance {
  int class_id = 0;
  std::uint64_t shape_seed = 0;
  Rotation rotation; // world pose applied to the canonical cloud
  Tensor views;      // [V, H, W, 1]
};

struct DatasetSpec {
  int n_classes = 8; // at most shape_class_count()
  int train_per_class = 100;
  int test_per_class = 30;
  bool random_pose = true; // uniform random rotation per instance
  int points_per_shape = 256;
};

struct Dataset {
  DatasetSpec spec;
  // enough to regenerate the exact camera configuration and renderer
  ConfigKind kind = ConfigKind::V60x1;
  int panorama_k = 0;
  double radius = 2.5;
  RenderSpec render;
  std::vector<Instance> train, test;

  CameraConfig camera_config() const { return gen_config(kind, radius, panorama_k); }
};

// The instance's cloud in world coordinates (rotation applied).
std::vector<Vec3> instance_points(const Instance& inst, int n_points);

Dataset make_dataset(const DatasetSpec& spec, const CameraConfig& config,
                     const RenderSpec& render, std::uint64_t seed);
// Convenience: build the camera configuration from its parameters.
Dataset make_dataset(const DatasetSpec& spec, ConfigKind kind, double radius, int panorama_k,
                     const RenderSpec& render, std::uint64_t seed);

// Layout: dataset.json (spec, configuration, renderer, group hash),
// manifest.csv (split,dir,class), and one directory per instance holding
// views.ft (f32) plus a meta.json sidecar (class, shape seed, rotation
// quaternion, config hash). Rendered values sit on the 1/512 grid, so f32 is
// exact and saving the same dataset twice produces identical bytes.
void save_dataset(const std::string& dir, const Dataset& ds);
Dataset load_dataset(const std::string& dir);

} // namespace finrot
