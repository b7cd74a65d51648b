#pragma once

#include <array>
#include <cmath>

namespace finrot {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  return {a.x / n, a.y / n, a.z / n};
}

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double& operator()(int r, int c) { return m[3 * r + c]; }
  double operator()(int r, int c) const { return m[3 * r + c]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
};

double det(const Mat3& a);
// Max deviation from I of A^T A plus |det - 1|; zero for exact rotations.
double orthogonality_error(const Mat3& a);
double frobenius_distance(const Mat3& a, const Mat3& b);

// Unit quaternion, scalar part first.
struct Quat {
  double w = 1, x = 0, y = 0, z = 0;
};

Quat operator*(const Quat& a, const Quat& b);

// Sign convention: w >= 0; if |w| <= tol the first component of (x, y, z)
// with magnitude > tol is made positive. Makes the stored representative of
// each rotation unique, q and -q describing the same rotation.
Quat canonicalized(const Quat& q, double tol = 1e-12);

// A 3D rotation carrying both representations. The matrix is always derived
// from the canonical quaternion, so the pair stays consistent by construction.
struct Rotation {
  Quat q;
  Mat3 m;

  static Rotation identity() { return from_quat({1, 0, 0, 0}); }
  static Rotation axis_angle(const Vec3& axis, double angle);
  static Rotation from_quat(const Quat& q);   // normalizes and canonicalizes
  static Rotation from_matrix(const Mat3& m); // requires orthogonality_error(m) < 1e-9

  Rotation operator*(const Rotation& o) const { return from_quat(q * o.q); }
  Rotation inverse() const { return from_quat({q.w, -q.x, -q.y, -q.z}); }

  double angle() const; // in [0, pi]
  Vec3 axis() const;    // unit; (0, 0, 1) for the identity
};

Mat3 quat_to_matrix(const Quat& q);
Quat matrix_to_quat(const Mat3& m);

} // namespace finrot
