#pragma once

#include <algorithm>
#include <string>
#include <variant>

#include "decoh/detail/json_util.hpp"
#include "decoh/errors.hpp"
#include "decoh/linalg.hpp"

namespace decoh {

/// V(R) = E0 + g^T (R - R0) + 1/2 (R - R0)^T H (R - R0)
struct QuadraticSurface {
  double energy = 0.0;
  Vec center;
  Vec gradient;
  Mat hessian;
};

/// V(R) = E0 + sum_j D_j (1 - exp(-a_j (R_j - c_j)))^2
struct MorseDiagonal {
  double energy = 0.0;
  Vec depth;
  Vec stiffness;
  Vec center;
};

/// Quadratic base plus sum_j (k_j y_j^3 + l_j y_j^4), y = R - R0.
struct QuarticPerturbed {
  QuadraticSurface base;
  Vec cubic;
  Vec quartic;
};

using SurfaceSpec = std::variant<QuadraticSurface, MorseDiagonal, QuarticPerturbed>;

/// Energy, gradient and Hessian at one point.
struct LocalData {
  double energy = 0.0;
  Vec gradient;
  Mat hessian;
};

inline Eigen::Index surface_dim(const SurfaceSpec& spec) {
  return std::visit(
      [](const auto& s) -> Eigen::Index {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, QuadraticSurface>) return s.center.size();
        else if constexpr (std::is_same_v<T, MorseDiagonal>) return s.center.size();
        else return s.base.center.size();
      },
      spec);
}

inline void validate(const QuadraticSurface& s, const std::string& path = "surface") {
  const auto d = s.center.size();
  require_dim(s.gradient.size(), d, path + ".gradient");
  require_dim(s.hessian.rows(), d, path + ".hessian");
  require_dim(s.hessian.cols(), d, path + ".hessian");
  if (asymmetry(s.hessian) > 1e-12 * std::max(1.0, s.hessian.norm())) throw ConfigError(path + ".hessian", "Hessian must be symmetric");
  if (!s.hessian.allFinite() || !s.gradient.allFinite() || !s.center.allFinite()) throw ConfigError(path, "non-finite parameters");
}

inline void validate(const MorseDiagonal& s, const std::string& path = "surface") {
  const auto d = s.center.size();
  require_dim(s.depth.size(), d, path + ".depth");
  require_dim(s.stiffness.size(), d, path + ".stiffness");
  if ((s.depth.array() <= 0.0).any()) throw ConfigError(path + ".depth", "well depths must be positive");
  if ((s.stiffness.array() <= 0.0).any()) throw ConfigError(path + ".stiffness", "stiffness must be positive");
}

inline void validate(const QuarticPerturbed& s, const std::string& path = "surface") {
  validate(s.base, path);
  require_dim(s.cubic.size(), s.base.center.size(), path + ".cubic");
  require_dim(s.quartic.size(), s.base.center.size(), path + ".quartic");
}

inline void validate(const SurfaceSpec& spec, const std::string& path = "surface") {
  std::visit([&](const auto& s) { validate(s, path); }, spec);
}

inline LocalData evaluate_local(const QuadraticSurface& s, const Vec& r) {
  require_dim(r.size(), s.center.size(), "surface point");
  const Vec y = r - s.center;
  const Vec hy = s.hessian * y;
  return {s.energy + s.gradient.dot(y) + 0.5 * y.dot(hy), s.gradient + hy, s.hessian};
}

inline LocalData evaluate_local(const MorseDiagonal& s, const Vec& r) {
  require_dim(r.size(), s.center.size(), "surface point");
  const auto d = r.size();
  LocalData out{s.energy, Vec::Zero(d), Mat::Zero(d, d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    const double arg = -s.stiffness(j) * (r(j) - s.center(j));
    if (!std::isfinite(arg) || arg > 700.0) {
      throw NumericalError("Morse exponent overflow in mode " + std::to_string(j + 1) +
                           " (argument " + std::to_string(arg) + ")");
    }
    const double u = std::exp(arg);
    const double a = s.stiffness(j);
    out.energy += s.depth(j) * (1.0 - u) * (1.0 - u);
    out.gradient(j) = 2.0 * s.depth(j) * a * u * (1.0 - u);
    out.hessian(j, j) = 2.0 * s.depth(j) * a * a * u * (2.0 * u - 1.0);
  }
  return out;
}

inline LocalData evaluate_local(const QuarticPerturbed& s, const Vec& r) {
  LocalData out = evaluate_local(s.base, r);
  const Vec y = r - s.base.center;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double y2 = y(j) * y(j);
    out.energy += s.cubic(j) * y2 * y(j) + s.quartic(j) * y2 * y2;
    out.gradient(j) += 3.0 * s.cubic(j) * y2 + 4.0 * s.quartic(j) * y2 * y(j);
    out.hessian(j, j) += 6.0 * s.cubic(j) * y(j) + 12.0 * s.quartic(j) * y2;
  }
  return out;
}

inline LocalData evaluate_local(const SurfaceSpec& spec, const Vec& r) {
  if (!r.allFinite()) throw NumericalError("surface evaluated at a non-finite point");
  return std::visit([&](const auto& s) { return evaluate_local(s, r); }, spec);
}

inline double energy(const SurfaceSpec& spec, const Vec& r) { return evaluate_local(spec, r).energy; }

/// Largest deviation between analytic derivatives and central differences with
/// step h, relative to the largest analytic derivative entry.
inline double gradient_check(const SurfaceSpec& spec, const Vec& r, double h) {
  if (!(h > 0.0)) throw ConfigError("h", "finite-difference step must be positive");
  const LocalData at = evaluate_local(spec, r);
  const auto d = r.size();
  Vec fd_grad(d);
  Mat fd_hess(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Vec plus = r;
    Vec minus = r;
    plus(k) += h;
    minus(k) -= h;
    const LocalData lp = evaluate_local(spec, plus);
    const LocalData lm = evaluate_local(spec, minus);
    fd_grad(k) = (lp.energy - lm.energy) / (2.0 * h);
    fd_hess.col(k) = (lp.gradient - lm.gradient) / (2.0 * h);
  }
  const double scale = std::max({at.gradient.cwiseAbs().maxCoeff(), at.hessian.cwiseAbs().maxCoeff(), 1e-12});
  const double dev = std::max((fd_grad - at.gradient).cwiseAbs().maxCoeff(), (fd_hess - at.hessian).cwiseAbs().maxCoeff());
  return dev / scale;
}

// Surface blocks in the run configuration; matrices are row-major lists.
//   { "type": "quadratic", "energy": E0, "center": [...], "gradient": [...], "hessian": [[...]] }
//   { "type": "morse", "energy": E0, "depth": [...], "stiffness": [...], "center": [...] }
//   { "type": "quartic", <quadratic keys>, "cubic": [...], "quartic": [...] }

namespace detail {

inline QuadraticSurface quadratic_from_json(const json& j, const std::string& path, Eigen::Index d) {
  QuadraticSurface s;
  s.energy = j.contains("energy") ? get_number(j["energy"], path + ".energy") : 0.0;
  s.center = j.contains("center") ? get_vector(j["center"], path + ".center") : Vec::Zero(d);
  s.gradient = j.contains("gradient") ? get_vector(j["gradient"], path + ".gradient") : Vec::Zero(d);
  s.hessian = get_matrix(require_key(j, path, "hessian"), path + ".hessian");
  require_dim(s.center.size(), d, path + ".center");
  validate(s, path);
  return s;
}

}  // namespace detail

/// `d` is the mode count of the system the surface belongs to.
inline SurfaceSpec surface_from_json(const detail::json& j, const std::string& path, Eigen::Index d) {
  using namespace detail;
  require_object(j, path);
  const std::string type = get_string(require_key(j, path, "type"), path + ".type");
  if (type == "quadratic") {
    reject_unknown_keys(j, path, {"type", "energy", "center", "gradient", "hessian"});
    return quadratic_from_json(j, path, d);
  }
  if (type == "morse") {
    reject_unknown_keys(j, path, {"type", "energy", "depth", "stiffness", "center"});
    MorseDiagonal s;
    s.energy = j.contains("energy") ? get_number(j["energy"], path + ".energy") : 0.0;
    s.depth = get_vector(require_key(j, path, "depth"), path + ".depth");
    s.stiffness = get_vector(require_key(j, path, "stiffness"), path + ".stiffness");
    s.center = j.contains("center") ? get_vector(j["center"], path + ".center") : Vec::Zero(d);
    require_dim(s.center.size(), d, path + ".center");
    validate(s, path);
    return s;
  }
  if (type == "quartic") {
    reject_unknown_keys(j, path, {"type", "energy", "center", "gradient", "hessian", "cubic", "quartic"});
    QuarticPerturbed s;
    s.base = quadratic_from_json(j, path, d);
    s.cubic = j.contains("cubic") ? get_vector(j["cubic"], path + ".cubic") : Vec::Zero(d);
    s.quartic = j.contains("quartic") ? get_vector(j["quartic"], path + ".quartic") : Vec::Zero(d);
    validate(s, path);
    return s;
  }
  throw ConfigError(path + ".type", "unknown surface type '" + type + "' (expected quadratic, morse or quartic)");
}

}  // namespace decoh
