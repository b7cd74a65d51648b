#pragma once

#include <vector>

#include "finrot/tensor.hpp"

namespace finrot {

// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
struct SymEig {
  std::vector<double> values;               // descending
  std::vector<std::vector<double>> vectors; // vectors[k] is unit, A v = values[k] v
};
SymEig jacobi_eigh(const std::vector<double>& a, int n); // a row-major n x n symmetric

// Rows of f ([N, C]) projected on the top three principal components of their
// covariance, each component affinely rescaled to [0, 1]. Components with
// (near-)zero variance map to a constant 0.5 instead, so a constant signal
// colors everything mid-gray and C < 3 inputs are padded rather than
// rejected. Restricting to channels [c_lo, c_hi) first is the common use for
// wide feature maps.
Tensor pca_rgb(const Tensor& f);
Tensor pca_rgb(const Tensor& f, int c_lo, int c_hi);

} // namespace finrot
