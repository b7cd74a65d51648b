#include "finrot/rotation.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace finrot {

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += m[3 * i + k] * o.m[3 * k + j];
      r.m[3 * i + j] = s;
    }
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[3 * i + j] = m[3 * j + i];
  return r;
}

double det(const Mat3& a) {
  const auto& m = a.m;
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

double orthogonality_error(const Mat3& a) {
  Mat3 g = a.transposed() * a;
  double e = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e = std::max(e, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return std::max(e, std::abs(det(a) - 1.0));
}

double frobenius_distance(const Mat3& a, const Mat3& b) {
  double s = 0;
  for (int i = 0; i < 9; ++i) {
    double d = a.m[i] - b.m[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Quat operator*(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quat canonicalized(const Quat& q, double tol) {
  if (q.w > tol) return q;
  if (q.w < -tol) return {-q.w, -q.x, -q.y, -q.z};
  for (double c : {q.x, q.y, q.z}) {
    if (std::abs(c) > tol) {
      if (c < 0) return {-q.w, -q.x, -q.y, -q.z};
      return q;
    }
  }
  return q;
}

Mat3 quat_to_matrix(const Quat& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 r;
  r.m = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
         2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
  return r;
}

// Shepperd's method: branch on the largest of trace and diagonal entries.
Quat matrix_to_quat(const Mat3& a) {
  const auto& m = a.m;
  double tr = m[0] + m[4] + m[8];
  Quat q;
  if (tr > m[0] && tr > m[4] && tr > m[8]) {
    double s = std::sqrt(tr + 1.0) * 2;
    q = {0.25 * s, (m[7] - m[5]) / s, (m[2] - m[6]) / s, (m[3] - m[1]) / s};
  } else if (m[0] > m[4] && m[0] > m[8]) {
    double s = std::sqrt(1.0 + m[0] - m[4] - m[8]) * 2;
    q = {(m[7] - m[5]) / s, 0.25 * s, (m[1] + m[3]) / s, (m[2] + m[6]) / s};
  } else if (m[4] > m[8]) {
    double s = std::sqrt(1.0 + m[4] - m[0] - m[8]) * 2;
    q = {(m[2] - m[6]) / s, (m[1] + m[3]) / s, 0.25 * s, (m[5] + m[7]) / s};
  } else {
    double s = std::sqrt(1.0 + m[8] - m[0] - m[4]) * 2;
    q = {(m[3] - m[1]) / s, (m[2] + m[6]) / s, (m[5] + m[7]) / s, 0.25 * s};
  }
  return q;
}

Rotation Rotation::axis_angle(const Vec3& axis, double angle) {
  Vec3 a = normalized(axis);
  double h = angle / 2, s = std::sin(h);
  return from_quat({std::cos(h), a.x * s, a.y * s, a.z * s});
}

Rotation Rotation::from_quat(const Quat& qin) {
  double n = std::sqrt(qin.w * qin.w + qin.x * qin.x + qin.y * qin.y + qin.z * qin.z);
  if (n < 1e-12) throw std::invalid_argument("rotation: zero quaternion");
  Quat q = canonicalized({qin.w / n, qin.x / n, qin.y / n, qin.z / n});
  Rotation r;
  r.q = q;
  r.m = quat_to_matrix(q);
  return r;
}

Rotation Rotation::from_matrix(const Mat3& m) {
  if (orthogonality_error(m) > 1e-9)
    throw std::invalid_argument("rotation: matrix not special orthogonal");
  return from_quat(matrix_to_quat(m));
}

double Rotation::angle() const {
  return 2.0 * std::acos(std::clamp(std::abs(q.w), 0.0, 1.0));
}

Vec3 Rotation::axis() const {
  Vec3 v{q.x, q.y, q.z};
  double n = norm(v);
  if (n < 1e-12) return {0, 0, 1};
  return {v.x / n, v.y / n, v.z / n};
}

} // namespace finrot
