#pragma once

// Shared fixtures: fixed-seed random model generators and bundled-model paths.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "decoh/decoh.hpp"

namespace testing_support {

using namespace decoh;

inline std::filesystem::path source_dir() { return DECOH_SOURCE_DIR; }
inline std::filesystem::path model(const std::string& name) { return source_dir() / "models" / name; }
inline std::string cli() { return DECOH_CLI; }

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  Vec vec(Eigen::Index d, double lo, double hi) {
    Vec v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  Mat orthogonal(Eigen::Index d) {
    Mat m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = normal();
    }
    Eigen::HouseholderQR<Mat> qr(m);
    return qr.householderQ() * Mat::Identity(d, d);
  }

  /// Neutral frequencies in hartree, 300-3000 cm^-1.
  Vec omega(Eigen::Index d) {
    Vec w(d);
    for (Eigen::Index i = 0; i < d; ++i) w(i) = units::cm1_to_hartree(uniform(300.0, 3000.0));
    return w;
  }

  /// Positive-definite Hessian near diag(omega) in a rotated eigenbasis.
  Mat hessian(const Vec& omega, double spread = 0.3) {
    const auto d = omega.size();
    const Mat q = orthogonal(d);
    Vec ev(d);
    for (Eigen::Index i = 0; i < d; ++i) ev(i) = omega(i) * uniform(1.0 - spread, 1.0 + spread);
    const Vec s = omega.cwiseSqrt();
    return symmetrized((s.asDiagonal() * q * ev.cwiseQuotient(omega).asDiagonal() * q.transpose() * s.asDiagonal()).eval());
  }

  QuadraticSurface quadratic(const Vec& omega, double shift = 0.8) {
    QuadraticSurface s;
    s.energy = uniform(-0.05, 0.05);
    s.center = Vec::Zero(omega.size());
    s.hessian = hessian(omega);
    s.gradient = -(s.hessian * vec(omega.size(), -shift, shift));
    return s;
  }

  /// Weakly anharmonic surface: quadratic plus small diagonal cubic/quartic terms.
  QuarticPerturbed quartic(const Vec& omega, double shift = 0.6) {
    QuarticPerturbed s;
    s.base = quadratic(omega, shift);
    s.cubic = omega.cwiseProduct(vec(omega.size(), -0.01, 0.01));
    s.quartic = omega.cwiseProduct(vec(omega.size(), 0.0, 0.004));
    return s;
  }

  cplx phase() { return std::polar(1.0, uniform(-3.14159, 3.14159)); }

 private:
  std::mt19937_64 rng_;
};

/// Relative deviation of every wavepacket parameter block, worst case.
inline double relative_error(const GaussianWavepacket& a, const GaussianWavepacket& ref) {
  auto rel = [](double diff, double scale) { return diff / std::max(1.0, scale); };
  double e = 0.0;
  e = std::max(e, rel((a.position - ref.position).cwiseAbs().maxCoeff(), ref.position.cwiseAbs().maxCoeff()));
  e = std::max(e, rel((a.momentum - ref.momentum).cwiseAbs().maxCoeff(), ref.momentum.cwiseAbs().maxCoeff()));
  e = std::max(e, rel((a.width - ref.width).cwiseAbs().maxCoeff(), ref.width.cwiseAbs().maxCoeff()));
  e = std::max(e, rel(std::abs(a.gamma - ref.gamma), std::abs(ref.gamma)));
  return e;
}

/// Largest absolute parameter difference.
inline double parameter_distance(const GaussianWavepacket& a, const GaussianWavepacket& b) {
  double e = (a.position - b.position).cwiseAbs().maxCoeff();
  e = std::max(e, (a.momentum - b.momentum).cwiseAbs().maxCoeff());
  e = std::max(e, (a.width - b.width).cwiseAbs().maxCoeff());
  return std::max(e, std::abs(a.gamma - b.gamma));
}

inline StateTrajectory run(const Vec& omega, const SurfaceSpec& s, double dt_fs, long n, Variant v = Variant::thawed,
                           Splitting split = Splitting::harmonic_reference) {
  PropagationConfig c;
  c.dt_fs = dt_fs;
  c.n_steps = n;
  c.variant = v;
  c.splitting = split;
  return propagate_state(omega, "S", ground_state(omega.size()), s, std::nullopt, c);
}

}  // namespace testing_support
