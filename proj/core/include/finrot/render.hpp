#pragma once

#include "finrot/tensor.hpp"
#include "finrot/view_config.hpp"

#include <vector>

namespace finrot {

// Point-splat depth renderer. Camera-space coordinates are snapped to a grid
// of `quantum` before projection, which makes the render an exact function of
// the snapped values: rotating the cloud by R and counter-rotating the camera
// by R^-1 produce bitwise-identical images (the two float paths land on the
// same grid cell except within ~1e-15 of a cell boundary).
struct RenderSpec {
  int height = 24, width = 24;
  int splat_radius = 1;       // Chebyshev radius in pixels; each point paints (2r+1)^2
  double extent = 1.05;       // half-width of the image plane, world units
  double quantum = 1.0 / 256; // camera-space snap grid
  bool perspective = false;   // default: orthographic
  double focal = 0;           // perspective only; <=0 uses the camera distance
};

// Brightness encodes proximity: clamp01((d + 1 - depth) / 2) with d the
// camera distance, so a unit-ball cloud spans (0, 1] and empty pixels are 0.
// Pixels take the max over splats, so the result is order-independent.
// Returns [H, W, 1].
Tensor render_view(const std::vector<Vec3>& points, const CameraPose& pose,
                   const RenderSpec& spec = {});

// One image per pose in the configuration, stacked to [V, H, W, 1].
Tensor render_views(const std::vector<Vec3>& points, const CameraConfig& config,
                    const RenderSpec& spec = {});

} // namespace finrot
