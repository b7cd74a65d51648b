#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace finrot {

// Dense row-major tensor. All in-memory compute is double precision;
// narrower dtypes exist only in the file container.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  double& operator[](std::int64_t i) { return data[static_cast<size_t>(i)]; }
  double operator[](std::int64_t i) const { return data[static_cast<size_t>(i)]; }
};

bool same_shape(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);

} // namespace finrot
