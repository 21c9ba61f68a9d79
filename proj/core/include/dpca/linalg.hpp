#pragma once

#include <Eigen/Dense>

namespace dpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Copies the lower triangle onto the upper one so the result is exactly
/// symmetric.
inline void mirror_lower(Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) m(j, i) = m(i, j);
}

/// (A + A^T) / 2, exactly symmetric in floating point.
inline Matrix symmetrized(const Matrix& a) {
  Matrix s = a;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  return s;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace dpca
