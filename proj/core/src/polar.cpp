#include "finrot/polar.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace finrot {

namespace {

// Bilinear read at (x, y) in pixel coordinates, zero outside [0,W-1]x[0,H-1].
double sample(const Tensor& img, double x, double y, int c) {
  const int h = img.dim(0), w = img.dim(1), ch = img.dim(2);
  const int x0 = (int)std::floor(x), y0 = (int)std::floor(y);
  const double fx = x - x0, fy = y - y0;
  double acc = 0;
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const int xi = x0 + dx, yi = y0 + dy;
      if (xi < 0 || xi >= w || yi < 0 || yi >= h) continue;
      const double wgt = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy);
      acc += wgt * img.data[(size_t(yi) * w + xi) * ch + c];
    }
  }
  return acc;
}

} // namespace

PolarImage log_polar(const Tensor& image, double cx, double cy, const PolarSpec& spec) {
  if (image.shape.size() != 3) throw std::invalid_argument("log_polar: image must be [H, W, C]");
  const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
  if (cx < 0 || cx > w - 1 || cy < 0 || cy > h - 1)
    throw std::invalid_argument("log_polar: center (" + std::to_string(cx) + ", " +
                                std::to_string(cy) + ") outside image");
  if (spec.r_bins < 1 || spec.theta_bins < 1 || spec.r_min <= 0)
    throw std::invalid_argument("log_polar: bad spec");
  double r_max = spec.r_max;
  if (r_max <= 0) r_max = 0.5 * std::hypot(double(w), double(h));
  if (r_max <= spec.r_min) throw std::invalid_argument("log_polar: r_max <= r_min");

  PolarImage out;
  out.cx = cx;
  out.cy = cy;
  out.log_r_min = std::log(spec.r_min);
  out.log_r_max = std::log(r_max);
  out.data = Tensor::zeros({spec.r_bins, spec.theta_bins, c});
  const double dl = (out.log_r_max - out.log_r_min) / spec.r_bins;
  const double dth = 2.0 * M_PI / spec.theta_bins;
  for (int r = 0; r < spec.r_bins; ++r) {
    const double rad = std::exp(out.log_r_min + r * dl);
    for (int t = 0; t < spec.theta_bins; ++t) {
      const double x = cx + rad * std::cos(t * dth);
      const double y = cy + rad * std::sin(t * dth);
      for (int k = 0; k < c; ++k)
        out.data.data[(size_t(r) * spec.theta_bins + t) * c + k] = sample(image, x, y, k);
    }
  }
  return out;
}

Tensor shift_theta(const Tensor& polar, int m) {
  if (polar.shape.size() != 3) throw std::invalid_argument("shift_theta: want [R, Theta, C]");
  const int rb = polar.dim(0), tb = polar.dim(1), c = polar.dim(2);
  m = ((m % tb) + tb) % tb;
  Tensor out = Tensor::zeros(polar.shape);
  for (int r = 0; r < rb; ++r)
    for (int t = 0; t < tb; ++t) {
      const int t2 = (t + m) % tb;
      for (int k = 0; k < c; ++k)
        out.data[(size_t(r) * tb + t2) * c + k] = polar.data[(size_t(r) * tb + t) * c + k];
    }
  return out;
}

} // namespace finrot
