#pragma once

// Independent reference computations used to freeze expected values.

#include "nsync/matrix_core.hpp"

namespace nsync::testing {

// t^{-1} * integral_0^t e^{F^T s} e^{F s} ds by composite Simpson on `steps` panels.
inline Matrix cesaro_quadrature(const Matrix& f, double t, long steps) {
  const double h = t / static_cast<double>(steps);
  const Matrix half = expm(f, 0.5 * h);
  Matrix e = Matrix::Identity(f.rows(), f.cols());
  Matrix sum = Matrix::Zero(f.rows(), f.cols());
  for (long k = 0; k < steps; ++k) {
    const Matrix mid = e * half;
    const Matrix next = mid * half;
    sum += e.transpose() * e + 4.0 * mid.transpose() * mid + next.transpose() * next;
    e = next;
  }
  return sum * (h / 6.0) / t;
}

}  // namespace nsync::testing
