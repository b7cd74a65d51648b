#include "finrot/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace finrot {

namespace {

double snap(double x, double q) { return std::round(x / q) * q; }

} // namespace

Tensor render_view(const std::vector<Vec3>& points, const CameraPose& pose,
                   const RenderSpec& spec) {
  if (spec.height < 1 || spec.width < 1 || spec.extent <= 0 || spec.quantum <= 0 ||
      spec.splat_radius < 0)
    throw std::invalid_argument("render_view: bad spec");
  const Mat3 r = pose.world_rotation();
  // camera frame axes in world coordinates
  const Vec3 right{r(0, 0), r(1, 0), r(2, 0)};
  const Vec3 up{r(0, 1), r(1, 1), r(2, 1)};
  const Vec3 fwd = normalized(pose.optical_axis);
  const double dist = snap(norm(pose.position), spec.quantum);
  double focal = spec.focal;
  if (spec.perspective && focal <= 0) focal = dist;

  Tensor img = Tensor::zeros({spec.height, spec.width, 1});
  const int h = spec.height, w = spec.width, sr = spec.splat_radius;
  for (const Vec3& p : points) {
    const Vec3 d = p - pose.position;
    double u = snap(dot(right, d), spec.quantum);
    double v = snap(dot(up, d), spec.quantum);
    const double depth = snap(dot(fwd, d), spec.quantum);
    if (spec.perspective) {
      if (depth <= 0) continue;
      u = snap(focal * u / depth, spec.quantum);
      v = snap(focal * v / depth, spec.quantum);
    }
    const int px = (int)std::floor((u + spec.extent) / (2 * spec.extent) * w);
    const int py = (int)std::floor((spec.extent - v) / (2 * spec.extent) * h);
    const double val = std::clamp((dist + 1 - depth) / 2, 0.0, 1.0);
    for (int dy = -sr; dy <= sr; ++dy)
      for (int dx = -sr; dx <= sr; ++dx) {
        const int x = px + dx, y = py + dy;
        if (x < 0 || x >= w || y < 0 || y >= h) continue;
        double& cell = img.data[size_t(y) * w + x];
        cell = std::max(cell, val);
      }
  }
  return img;
}

Tensor render_views(const std::vector<Vec3>& points, const CameraConfig& config,
                    const RenderSpec& spec) {
  const int v = config.n_views(), h = spec.height, w = spec.width;
  Tensor out = Tensor::zeros({v, h, w, 1});
  for (int i = 0; i < v; ++i) {
    Tensor img = render_view(points, config.poses[size_t(i)], spec);
    std::copy(img.data.begin(), img.data.end(), out.data.begin() + size_t(i) * h * w);
  }
  return out;
}

} // namespace finrot
