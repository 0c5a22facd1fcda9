#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "decoh/errors.hpp"

namespace decoh {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr cplx kI{0.0, 1.0};

template <typename Derived>
double asymmetry(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.transpose()).norm();
}

template <typename Derived>
auto symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return (0.5 * (m + m.transpose())).eval();
}

inline bool is_positive_definite(const Mat& m) {
  if (m.rows() != m.cols()) return false;
  Eigen::LLT<Mat> llt(m);
  return llt.info() == Eigen::Success;
}

inline void require_dim(Eigen::Index got, Eigen::Index want, const std::string& what) {
  if (got != want) {
    throw ConfigError(what, "dimension mismatch: got " + std::to_string(got) + ", expected " +
                                std::to_string(want));
  }
}

/// Sum of principal logarithms of the eigenvalues of m.
///
/// This is a log-determinant on a specific branch: it is continuous in m as
/// long as no eigenvalue crosses the negative real axis. Callers pick
/// matrices whose spectrum is confined to a half plane so that the branch
/// is unambiguous. `max_arg` receives the largest |arg| over eigenvalues.
inline cplx eigen_log_det(const CMat& m, double* max_arg = nullptr) {
  Eigen::ComplexEigenSolver<CMat> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed in log-determinant");
  cplx sum{0.0, 0.0};
  double worst = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const cplx lambda = es.eigenvalues()(k);
    if (lambda == cplx{0.0, 0.0}) throw NumericalError("singular matrix in log-determinant");
    sum += std::log(lambda);
    worst = std::max(worst, std::abs(std::arg(lambda)));
  }
  if (max_arg != nullptr) *max_arg = worst;
  return sum;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

}  // namespace decoh
