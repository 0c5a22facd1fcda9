#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "decoh/detail/json_util.hpp"
#include "decoh/errors.hpp"
#include "decoh/linalg.hpp"

namespace decoh {

/// Gaussian wavepacket on one electronic state, in scaled coordinates with hbar = 1:
///
///   chi(R) = a * exp{ i [ 1/2 (R-q)^T A (R-q) + p^T (R-q) + gamma ] }
///
/// Re(gamma) is the dynamical phase, Im(gamma) the normalization. The
/// electronic amplitude `a` is excluded from norm().
struct GaussianWavepacket {
  cplx amplitude{1.0, 0.0};
  Vec position;
  Vec momentum;
  CMat width;
  cplx gamma{0.0, 0.0};

  Eigen::Index dim() const noexcept { return position.size(); }

  /// Throws ConfigError on shape problems, NumericalError on a broken width.
  void validate() const {
    const auto d = position.size();
    require_dim(momentum.size(), d, "wavepacket.momentum");
    require_dim(width.rows(), d, "wavepacket.width");
    require_dim(width.cols(), d, "wavepacket.width");
    if (asymmetry(width) > 1e-12 * std::max(1.0, width.norm())) throw NumericalError("wavepacket width matrix is not symmetric");
    if (!is_positive_definite(width.imag())) throw NumericalError("wavepacket width has a non-positive-definite imaginary part");
  }
};

/// Ground state of the neutral harmonic surface: R = P = 0, A = i*I, normalized.
inline GaussianWavepacket ground_state(Eigen::Index d, cplx amplitude = {1.0, 0.0});

/// Integral of |chi/a|^2 = exp(-2 Im gamma) pi^(D/2) det(Im A)^(-1/2).
inline double norm(const GaussianWavepacket& wp) {
  const Mat im = wp.width.imag();
  Eigen::LLT<Mat> llt(im);
  if (llt.info() != Eigen::Success) throw NumericalError("norm: Im A is not positive definite");
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double d = static_cast<double>(wp.dim());
  return std::exp(-2.0 * wp.gamma.imag() + 0.5 * d * std::log(std::numbers::pi) - 0.5 * log_det);
}

/// Sets Im gamma = -1/4 ln det(Im A / pi); everything else unchanged.
inline GaussianWavepacket normalize(GaussianWavepacket wp) {
  const Mat im = wp.width.imag();
  Eigen::LLT<Mat> llt(im / std::numbers::pi);
  if (llt.info() != Eigen::Success) throw NumericalError("normalize: Im A is not positive definite");
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  wp.gamma = {wp.gamma.real(), -0.25 * log_det};
  return wp;
}

inline GaussianWavepacket ground_state(Eigen::Index d, cplx amplitude) {
  GaussianWavepacket wp;
  wp.amplitude = amplitude;
  wp.position = Vec::Zero(d);
  wp.momentum = Vec::Zero(d);
  wp.width = kI * CMat::Identity(d, d);
  return normalize(wp);
}

/// Value at a single point.
inline cplx evaluate(const GaussianWavepacket& wp, const Vec& point) {
  require_dim(point.size(), wp.dim(), "evaluate point");
  const Vec x = point - wp.position;
  const cplx quad = 0.5 * x.cast<cplx>().dot(wp.width * x.cast<cplx>());
  return wp.amplitude * std::exp(kI * (quad + wp.momentum.dot(x) + wp.gamma));
}

inline std::vector<cplx> evaluate(const GaussianWavepacket& wp, const std::vector<Vec>& points) {
  std::vector<cplx> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(evaluate(wp, p));
  return out;
}

// Snapshot serialization: fields verbatim, complex numbers as [re, im].

inline detail::json to_json(const GaussianWavepacket& wp) {
  return {{"amplitude", detail::complex_to_json(wp.amplitude)},
          {"position", detail::vector_to_json(wp.position)},
          {"momentum", detail::vector_to_json(wp.momentum)},
          {"width", detail::cmatrix_to_json(wp.width)},
          {"gamma", detail::complex_to_json(wp.gamma)}};
}

inline GaussianWavepacket wavepacket_from_json(const detail::json& j, const std::string& path = "wavepacket") {
  detail::reject_unknown_keys(j, path, {"amplitude", "position", "momentum", "width", "gamma"});
  GaussianWavepacket wp;
  wp.amplitude = detail::get_complex(detail::require_key(j, path, "amplitude"), path + ".amplitude");
  wp.position = detail::get_vector(detail::require_key(j, path, "position"), path + ".position");
  wp.momentum = detail::get_vector(detail::require_key(j, path, "momentum"), path + ".momentum");
  wp.width = detail::get_cmatrix(detail::require_key(j, path, "width"), path + ".width");
  wp.gamma = detail::get_complex(detail::require_key(j, path, "gamma"), path + ".gamma");
  wp.validate();
  return wp;
}

}  // namespace decoh
