#include "finrot/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace finrot {

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("tensor: negative dimension");
    n *= d;
  }
  data.assign(static_cast<size_t>(n), 0.0);
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!same_shape(a, b)) throw std::invalid_argument("tensor: shape mismatch");
  double m = 0;
  for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

} // namespace finrot
