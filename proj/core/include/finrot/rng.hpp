#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "finrot/rotation.hpp"

namespace finrot {

// Deterministic RNG. Distributions are hand-rolled on top of mt19937_64 so
// that a seed reproduces the same stream regardless of standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : s_(seed) {}

  std::uint64_t bits() { return s_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(s_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive bounds.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(s_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // Box-Muller; one fresh pair of uniforms per call.
  double normal() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
  }

  // Uniform over SO(3): four normals normalized to a unit quaternion.
  Rotation rotation() {
    Quat q{normal(), normal(), normal(), normal()};
    return Rotation::from_quat(q);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(uniform_int(0, i))]);
  }

 private:
  std::mt19937_64 s_;
};

} // namespace finrot
