#pragma once

#include "finrot/tensor.hpp"

namespace finrot {

// Log-polar resampling of an image. Row r of data holds the circle of radius
// exp(log_r_min + r * delta) with delta = (log_r_max - log_r_min) / R; the
// theta axis is circular (index Theta wraps to 0). In these coordinates an
// in-plane rotation about the center is a circular shift along theta and a
// dilation about the center is a shift along r.
struct PolarImage {
  Tensor data; // [R, Theta, C]
  double log_r_min = 0, log_r_max = 0;
  double cx = 0, cy = 0; // center, pixels (x = column, y = row)
};

struct PolarSpec {
  int r_bins = 64, theta_bins = 64;
  double r_min = 2.0;  // pixels
  double r_max = -1.0; // non-positive: half the image diagonal
};

// image is [H, W, C]; (cx, cy) must lie inside the image or the call throws
// std::invalid_argument. Sampling is bilinear with zero outside the bounds.
PolarImage log_polar(const Tensor& image, double cx, double cy, const PolarSpec& spec = {});

// Circular shift along theta by m steps: out[r][(t + m) mod Theta] = in[r][t].
Tensor shift_theta(const Tensor& polar, int m);

} // namespace finrot
