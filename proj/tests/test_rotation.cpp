#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <finrot/rng.hpp>
#include <finrot/rotation.hpp>

#include <cmath>

using namespace finrot;

TEST_CASE("axis_angle round trips through angle() and axis()") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    Vec3 ax = normalized({rng.normal(), rng.normal(), rng.normal()});
    const double ang = rng.uniform(1e-3, M_PI - 1e-3);
    const Rotation r = Rotation::axis_angle(ax, ang);
    CHECK(r.angle() == doctest::Approx(ang).epsilon(1e-12));
    // axis() is canonical up to the quaternion sign convention
    const double align = std::fabs(dot(r.axis(), ax));
    CHECK(align == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("quaternion sign is canonical: q and -q build the same rotation") {
  const Quat q{-0.5, 0.5, 0.5, -0.5};
  const Rotation a = Rotation::from_quat(q);
  const Rotation b = Rotation::from_quat({0.5, -0.5, -0.5, 0.5});
  CHECK(a.q.w == b.q.w);
  CHECK(a.q.x == b.q.x);
  CHECK(a.q.y == b.q.y);
  CHECK(a.q.z == b.q.z);
  CHECK(a.q.w >= 0.0);
}

TEST_CASE("from_quat normalizes and rejects the zero quaternion") {
  const Rotation r = Rotation::from_quat({2, 0, 0, 0});
  CHECK(r.q.w == doctest::Approx(1.0));
  CHECK(orthogonality_error(r.m) < 1e-12);
  CHECK_THROWS(Rotation::from_quat({0, 0, 0, 0}));
}

TEST_CASE("matrix and quaternion composition agree") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Rotation a = rng.rotation(), b = rng.rotation();
    const Rotation c = a * b;
    CHECK(frobenius_distance(c.m, a.m * b.m) < 1e-12);
    CHECK(orthogonality_error(c.m) < 1e-12);
  }
}

TEST_CASE("inverse composes to the identity") {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = rng.rotation();
    const Rotation e = r * r.inverse();
    CHECK(e.angle() < 1e-12);
    CHECK(frobenius_distance(e.m, Mat3{}) < 1e-12);
  }
}

TEST_CASE("from_matrix inverts quat_to_matrix and validates input") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = rng.rotation();
    const Rotation back = Rotation::from_matrix(r.m);
    CHECK(std::fabs(back.q.w - r.q.w) < 1e-9);
    CHECK(std::fabs(back.q.x - r.q.x) < 1e-9);
    CHECK(std::fabs(back.q.y - r.q.y) < 1e-9);
    CHECK(std::fabs(back.q.z - r.q.z) < 1e-9);
  }
  Mat3 bad;
  bad(0, 0) = 2.0;
  CHECK_THROWS(Rotation::from_matrix(bad));
}

TEST_CASE("matrix_to_quat handles all trace branches") {
  // rotations by pi about each axis have trace -1 and exercise the
  // per-column branches of the extraction
  for (const Vec3 ax : {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}}) {
    const Rotation r = Rotation::axis_angle(ax, M_PI);
    const Quat q = matrix_to_quat(r.m);
    CHECK(frobenius_distance(quat_to_matrix(q), r.m) < 1e-12);
  }
}

TEST_CASE("identity basics") {
  const Rotation e = Rotation::identity();
  CHECK(e.angle() == 0.0);
  CHECK(e.axis().z == 1.0);
  CHECK(orthogonality_error(e.m) == 0.0);
}

TEST_CASE("uniform rotation sampling has zero mean matrix") {
  // the Haar mean of a rotation matrix is the zero matrix; 1e4 samples put
  // each entry within ~3/sqrt(n)
  Rng rng(101);
  Mat3 sum;
  for (double& v : sum.m) v = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Mat3 m = rng.rotation().m;
    for (int k = 0; k < 9; ++k) sum.m[size_t(k)] += m.m[size_t(k)];
  }
  for (int k = 0; k < 9; ++k) CHECK(std::fabs(sum.m[size_t(k)] / n) < 0.05);
}

TEST_CASE("uniform rotation sampling covers both hemispheres of angles") {
  // P(angle > pi/2) = (pi + 2) / (2 pi) for Haar measure; just check both
  // sides occur in a fair proportion
  Rng rng(103);
  int big = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i)
    if (rng.rotation().angle() > M_PI / 2) ++big;
  CHECK(big > n / 2);
  CHECK(big < 9 * n / 10);
}

TEST_CASE("orthogonality_error measures defect") {
  Mat3 id;
  CHECK(orthogonality_error(id) == 0.0);
  Mat3 scaled;
  for (int i = 0; i < 3; ++i) scaled(i, i) = 1.1;
  CHECK(orthogonality_error(scaled) > 0.1);
  Mat3 reflect;
  reflect(0, 0) = -1; // det -1: orthogonal but not a rotation
  CHECK(orthogonality_error(reflect) > 1.0);
}
