#include "finrot/platonic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace finrot {

namespace {

// Deterministic (z, y, x) descending order, coordinates quantized at 1e-9 so
// ties from floating-point noise cannot reorder across runs.
bool zyx_greater(const Vec3& a, const Vec3& b) {
  auto q = [](double v) { return std::llround(v * 1e9); };
  if (q(a.z) != q(b.z)) return q(a.z) > q(b.z);
  if (q(a.y) != q(b.y)) return q(a.y) > q(b.y);
  return q(a.x) > q(b.x);
}

} // namespace

std::vector<Vec3> icosahedron_vertices() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double n = std::sqrt(1.0 + phi * phi);
  std::vector<Vec3> v;
  for (double a : {1.0, -1.0})
    for (double b : {phi, -phi}) {
      v.push_back({0, a / n, b / n});
      v.push_back({a / n, b / n, 0});
      v.push_back({b / n, 0, a / n});
    }
  // Rotate the 5-fold axis through (0, 1, phi) onto +z.
  Mat3 rx = Rotation::axis_angle({1, 0, 0}, std::atan2(1.0, phi)).m;
  for (auto& p : v) p = rx * p;
  std::sort(v.begin(), v.end(), zyx_greater);
  return v;
}

std::vector<std::array<int, 3>> icosahedron_faces() {
  auto v = icosahedron_vertices();
  // Edge length of the unit icosahedron; any 3 mutually adjacent vertices
  // form a face (the icosahedron graph has no non-facial triangles).
  double edge = 4.0 / std::sqrt(10.0 + 2.0 * std::sqrt(5.0));
  auto adjacent = [&](int i, int j) { return std::abs(norm(v[i] - v[j]) - edge) < 1e-9; };
  std::vector<std::array<int, 3>> faces;
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j)
      for (int k = j + 1; k < 12; ++k)
        if (adjacent(i, j) && adjacent(j, k) && adjacent(i, k)) faces.push_back({i, j, k});
  // Order faces like their centroids ordered by (z, y, x) descending.
  auto centroid = [&](const std::array<int, 3>& f) {
    return normalized(v[f[0]] + v[f[1]] + v[f[2]]);
  };
  std::sort(faces.begin(), faces.end(),
            [&](const auto& a, const auto& b) { return zyx_greater(centroid(a), centroid(b)); });
  return faces;
}

std::vector<Vec3> icosahedron_face_centers() {
  auto v = icosahedron_vertices();
  std::vector<Vec3> c;
  for (const auto& f : icosahedron_faces()) c.push_back(normalized(v[f[0]] + v[f[1]] + v[f[2]]));
  return c;
}

} // namespace finrot
