#include "finrot/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace finrot {

SymEig jacobi_eigh(const std::vector<double>& a, int n) {
  if (n < 1 || static_cast<int>(a.size()) != n * n)
    throw std::invalid_argument("jacobi_eigh: need a square matrix");
  std::vector<double> m = a;
  std::vector<double> v(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i) * n + i] = 1.0;

  auto off = [&] {
    double s = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += m[static_cast<size_t>(p) * n + q] * m[static_cast<size_t>(p) * n + q];
    return s;
  };
  double scale = 0;
  for (double x : m) scale = std::max(scale, std::abs(x));
  const double stop = std::max(1e-300, 1e-28 * scale * scale);

  for (int sweep = 0; sweep < 100 && off() > stop; ++sweep) {
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        double apq = m[static_cast<size_t>(p) * n + q];
        if (std::abs(apq) < 1e-300) continue;
        double app = m[static_cast<size_t>(p) * n + p];
        double aqq = m[static_cast<size_t>(q) * n + q];
        double theta = (aqq - app) / (2 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < n; ++k) {
          double mkp = m[static_cast<size_t>(k) * n + p], mkq = m[static_cast<size_t>(k) * n + q];
          m[static_cast<size_t>(k) * n + p] = c * mkp - s * mkq;
          m[static_cast<size_t>(k) * n + q] = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          double mpk = m[static_cast<size_t>(p) * n + k], mqk = m[static_cast<size_t>(q) * n + k];
          m[static_cast<size_t>(p) * n + k] = c * mpk - s * mqk;
          m[static_cast<size_t>(q) * n + k] = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v[static_cast<size_t>(k) * n + p], vkq = v[static_cast<size_t>(k) * n + q];
          v[static_cast<size_t>(k) * n + p] = c * vkp - s * vkq;
          v[static_cast<size_t>(k) * n + q] = s * vkp + c * vkq;
        }
      }
  }

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return m[static_cast<size_t>(i) * n + i] > m[static_cast<size_t>(j) * n + j];
  });

  SymEig out;
  out.values.resize(static_cast<size_t>(n));
  out.vectors.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n)));
  for (int k = 0; k < n; ++k) {
    int src = order[static_cast<size_t>(k)];
    out.values[static_cast<size_t>(k)] = m[static_cast<size_t>(src) * n + src];
    for (int i = 0; i < n; ++i) out.vectors[static_cast<size_t>(k)][static_cast<size_t>(i)] = v[static_cast<size_t>(i) * n + src];
  }
  return out;
}

Tensor pca_rgb(const Tensor& f) { return pca_rgb(f, 0, f.shape.size() == 2 ? f.dim(1) : 0); }

Tensor pca_rgb(const Tensor& f, int c_lo, int c_hi) {
  if (f.shape.size() != 2) throw std::invalid_argument("pca_rgb: need a [N, C] tensor");
  const int n = f.dim(0), c_all = f.dim(1);
  if (c_lo < 0 || c_hi > c_all || c_lo >= c_hi) throw std::invalid_argument("pca_rgb: bad channel range");
  const int c = c_hi - c_lo;

  std::vector<double> mean(static_cast<size_t>(c), 0.0);
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < c; ++i) mean[static_cast<size_t>(i)] += f.data[static_cast<size_t>(r) * c_all + c_lo + i];
  for (auto& m : mean) m /= n;

  std::vector<double> cov(static_cast<size_t>(c) * c, 0.0);
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < c; ++i) {
      double xi = f.data[static_cast<size_t>(r) * c_all + c_lo + i] - mean[static_cast<size_t>(i)];
      for (int j = i; j < c; ++j) {
        double xj = f.data[static_cast<size_t>(r) * c_all + c_lo + j] - mean[static_cast<size_t>(j)];
        cov[static_cast<size_t>(i) * c + j] += xi * xj;
      }
    }
  const double denom = n > 1 ? n - 1 : 1;
  for (int i = 0; i < c; ++i)
    for (int j = i; j < c; ++j) {
      cov[static_cast<size_t>(i) * c + j] /= denom;
      cov[static_cast<size_t>(j) * c + i] = cov[static_cast<size_t>(i) * c + j];
    }

  SymEig eig = jacobi_eigh(cov, c);
  double trace = 0;
  for (int i = 0; i < c; ++i) trace += cov[static_cast<size_t>(i) * c + i];
  const double var_floor = 1e-12 * std::max(1.0, trace);

  Tensor out({n, 3});
  for (int k = 0; k < 3; ++k) {
    if (k >= c || eig.values[static_cast<size_t>(k)] <= var_floor) {
      for (int r = 0; r < n; ++r) out.data[static_cast<size_t>(r) * 3 + k] = 0.5;
      continue;
    }
    std::vector<double> proj(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
      double s = 0;
      for (int i = 0; i < c; ++i)
        s += (f.data[static_cast<size_t>(r) * c_all + c_lo + i] - mean[static_cast<size_t>(i)]) *
             eig.vectors[static_cast<size_t>(k)][static_cast<size_t>(i)];
      proj[static_cast<size_t>(r)] = s;
    }
    auto [lo, hi] = std::minmax_element(proj.begin(), proj.end());
    double span = *hi - *lo;
    for (int r = 0; r < n; ++r)
      out.data[static_cast<size_t>(r) * 3 + k] =
          span > 1e-12 ? (proj[static_cast<size_t>(r)] - *lo) / span : 0.5;
  }
  return out;
}

} // namespace finrot
