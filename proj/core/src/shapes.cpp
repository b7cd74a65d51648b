#include "finrot/shapes.hpp"

#include "finrot/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace finrot {

namespace {

constexpr const char* kNames[] = {"bent_prism", "tripod", "helix_r",     "hook",
                                  "cross_asym", "comb",   "wedge_stack", "helix_l"};
constexpr int kCount = int(sizeof(kNames) / sizeof(kNames[0]));

// The limb classes share thickness and length budgets on purpose: classes
// are meant to differ in how their parts are arranged, not in gross size
// statistics (normalization removes most of those anyway). The pairs
// tripod/cross_asym (planar Y vs skew triad), bent_prism/hook (sharp bend vs
// smooth arc), and helix_r/helix_l (mirror twins) only separate on relative
// geometry across views.
constexpr double kLimbRad = 0.085;
constexpr double kLimbLen = 0.8;

struct Builder {
  Rng& rng;
  std::vector<Vec3> pts;

  double jitter(double v) { return v * (1.0 + 0.1 * (2.0 * rng.uniform() - 1.0)); }

  // direction nudged by a random rotation of at most max_deg, so no instance
  // sits on an exact symmetry axis
  Vec3 tilt(Vec3 d, double max_deg) {
    Vec3 ax{2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
    if (norm(ax) < 1e-9) ax = {0, 0, 1};
    const double a = max_deg * M_PI / 180.0 * rng.uniform();
    return Rotation::axis_angle(normalized(ax), a).m * normalized(d);
  }

  // n points in a solid cylinder from p0 along unit dir.
  void tube(Vec3 p0, Vec3 dir, double len, double rad, int n) {
    Vec3 a = normalized(dir);
    // any unit vector not parallel to a
    Vec3 h = std::fabs(a.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    Vec3 u = normalized(cross(a, h));
    Vec3 v = cross(a, u);
    for (int i = 0; i < n; ++i) {
      const double t = rng.uniform() * len;
      const double r = rad * std::sqrt(rng.uniform());
      const double th = 2.0 * M_PI * rng.uniform();
      pts.push_back(p0 + a * t + u * (r * std::cos(th)) + v * (r * std::sin(th)));
    }
  }
};

Mat3 rot_z(double a) { return Rotation::axis_angle({0, 0, 1}, a).m; }

// two limbs meeting at a sharp 115-degree bend
void bent_prism(Builder& b, int n) {
  const double r = b.jitter(kLimbRad), bend = b.jitter(115.0 * M_PI / 180.0);
  b.tube({0, 0, 0}, b.tilt({1, 0, 0}, 4), b.jitter(1.0), r, n / 2);
  b.tube({0, 0, 0}, b.tilt({std::cos(bend), std::sin(bend), 0.12}, 4), b.jitter(0.8), r,
         n - n / 2);
}

// three equal legs, lifted Y with uneven azimuths (no 3-fold symmetry)
void tripod(Builder& b, int n) {
  const double r = b.jitter(kLimbRad);
  const double az[3] = {0.0, 110.0, 235.0};
  for (int k = 0; k < 3; ++k) {
    const double a = az[k] * M_PI / 180.0;
    const Vec3 d = b.tilt({std::cos(a), std::sin(a), 0.5}, 5);
    b.tube({0, 0, 0}, d, b.jitter(kLimbLen), r, n / 3 + (k < n % 3));
  }
}

// right-handed corkscrew, 1.75 turns
void helix(Builder& b, int n, double hand) {
  const double rad = b.jitter(0.5), pitch = b.jitter(0.7), tube = b.jitter(kLimbRad);
  const double turns = 1.75;
  for (int i = 0; i < n; ++i) {
    const double t = b.rng.uniform() * turns;
    const double a = 2.0 * M_PI * t;
    Vec3 c{rad * std::cos(a), rad * std::sin(a), hand * pitch * (t - 0.5 * turns)};
    // thicken with a random offset inside a ball
    for (;;) {
      Vec3 o{2 * b.rng.uniform() - 1, 2 * b.rng.uniform() - 1, 2 * b.rng.uniform() - 1};
      if (dot(o, o) <= 1) {
        b.pts.push_back(c + o * tube);
        break;
      }
    }
  }
}

// straight shaft plus a smooth 230-degree arc: same limb budget as
// bent_prism, curvature instead of a bend
void hook(Builder& b, int n) {
  const double shaft = b.jitter(0.9), arc_r = b.jitter(0.32), r = b.jitter(kLimbRad);
  const int n_arc = n / 2;
  b.tube({0, 0, 0}, b.tilt({0, 0, 1}, 4), shaft, r, n - n_arc);
  // arc in the xz-plane hanging below the shaft base, sweeping 230 degrees
  for (int i = 0; i < n_arc; ++i) {
    const double a = b.rng.uniform() * (230.0 / 180.0) * M_PI;
    Vec3 c{arc_r - arc_r * std::cos(a), 0, -arc_r * std::sin(a)};
    const double rr = r * std::sqrt(b.rng.uniform());
    const double th = 2.0 * M_PI * b.rng.uniform();
    // tube frame: tangent in xz, normal also in xz, binormal = y
    Vec3 nrm{std::cos(a), 0, -std::sin(a)};
    b.pts.push_back(c + nrm * (rr * std::cos(th)) + Vec3{0, 1, 0} * (rr * std::sin(th)));
  }
}

// three equal legs again, but a skew near-orthogonal triad
void cross_asym(Builder& b, int n) {
  const double r = b.jitter(kLimbRad);
  const Vec3 dirs[3] = {{1, 0.15, -0.1}, {-0.12, 1, 0.18}, {0.1, -0.2, -1}};
  for (int k = 0; k < 3; ++k)
    b.tube({0, 0, 0}, b.tilt(dirs[k], 5), b.jitter(kLimbLen), r, n / 3 + (k < n % 3));
}

// three equal rungs in parallel on an off-center spine
void comb(Builder& b, int n) {
  const double r = b.jitter(kLimbRad);
  const double xpos[3] = {-0.45, -0.05, 0.40};
  const Vec3 up = b.tilt({0, 1, 0.1}, 4);
  const int n_spine = n / 4;
  b.tube({-0.55, 0.05, 0}, b.tilt({1, 0.05, 0.02}, 3), b.jitter(1.0), r, n_spine);
  int used = n_spine;
  for (int k = 0; k < 3; ++k) {
    const int m = (k == 2) ? n - used : (n - n_spine) / 3;
    b.tube({xpos[k], 0, 0}, up, b.jitter(kLimbLen), r, m);
    used += m;
  }
}

// volumetric anchor class: twisted stack of shrinking triangular slabs
void wedge_stack(Builder& b, int n) {
  const double base = b.jitter(0.8), h = b.jitter(0.28), twist = b.jitter(0.7);
  int used = 0;
  for (int k = 0; k < 3; ++k) {
    const int m = (k == 2) ? n - used : n / 3;
    const double s = base * (1.0 - 0.3 * k);
    const Mat3 r = rot_z(twist * k);
    // triangular prism: sample a box and fold across the diagonal
    for (int i = 0; i < m; ++i) {
      double x = b.rng.uniform(), y = b.rng.uniform();
      if (x + y > 1) {
        x = 1 - x;
        y = 1 - y;
      }
      Vec3 p{s * (x - 1.0 / 3.0), s * (y - 1.0 / 3.0), h * (b.rng.uniform() - 0.5)};
      b.pts.push_back(r * p + Vec3{0, 0, h * 1.05 * k});
    }
    used += m;
  }
}

} // namespace

int shape_class_count() { return kCount; }

const char* shape_class_name(int class_id) {
  if (class_id < 0 || class_id >= kCount) throw std::out_of_range("shape_class_name");
  return kNames[class_id];
}

std::vector<Vec3> make_shape(int class_id, std::uint64_t seed, int n_points) {
  if (class_id < 0 || class_id >= kCount) throw std::out_of_range("make_shape: class_id");
  if (n_points < 1) throw std::invalid_argument("make_shape: n_points");
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + std::uint64_t(class_id) + 1);
  Builder b{rng, {}};
  b.pts.reserve(size_t(n_points));
  switch (class_id) {
    case 0: bent_prism(b, n_points); break;
    case 1: tripod(b, n_points); break;
    case 2: helix(b, n_points, 1.0); break;
    case 3: hook(b, n_points); break;
    case 4: cross_asym(b, n_points); break;
    case 5: comb(b, n_points); break;
    case 6: wedge_stack(b, n_points); break;
    case 7: helix(b, n_points, -1.0); break;
  }
  // center, then scale the farthest point onto the unit sphere
  Vec3 c{0, 0, 0};
  for (const Vec3& p : b.pts) c = c + p;
  c = c * (1.0 / double(b.pts.size()));
  double maxn = 0;
  for (Vec3& p : b.pts) {
    p = p - c;
    maxn = std::max(maxn, norm(p));
  }
  for (Vec3& p : b.pts) p = p * (1.0 / maxn);
  return b.pts;
}

} // namespace finrot
