#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "decoh/errors.hpp"
#include "decoh/frame.hpp"
#include "decoh/linalg.hpp"
#include "decoh/surfaces.hpp"
#include "decoh/units.hpp"
#include "decoh/wavepacket.hpp"

namespace decoh {

enum class Variant { thawed, frozen };

/// How the Hamiltonian is split for the symmetric second-order integrator.
///
/// harmonic_reference: exact flow of T + V_ref, where V_ref is the global
///   quadratic built from the reference Hessian at the Franck-Condon point,
///   with half kicks from the remainder V - V_ref. Exact on quadratic surfaces
///   whose Hessian equals the reference Hessian.
/// kinetic_potential: plain semiclassical Verlet, V(dt/2) T(dt) V(dt/2).
enum class Splitting { harmonic_reference, kinetic_potential };

inline std::string to_string(Variant v) { return v == Variant::thawed ? "thawed" : "frozen"; }
inline std::string to_string(Splitting s) {
  return s == Splitting::harmonic_reference ? "harmonic_reference" : "kinetic_potential";
}

struct PropagationConfig {
  double dt_fs = 0.25;
  long n_steps = 100;
  Variant variant = Variant::thawed;
  Splitting splitting = Splitting::harmonic_reference;

  void validate() const {
    if (!(dt_fs > 0.0) || !std::isfinite(dt_fs)) throw ConfigError("propagation.dt_fs", "time step must be positive");
    if (n_steps < 1) throw ConfigError("propagation.n_steps", "at least one step is required");
  }
};

/// Global quadratic V_ref(x) = c + f^T x + 1/2 x^T K x.
struct ReferenceQuadratic {
  double constant = 0.0;
  Vec linear;
  Mat curvature;

  static ReferenceQuadratic zero(Eigen::Index d) { return {0.0, Vec::Zero(d), Mat::Zero(d, d)}; }

  /// Second-order expansion about x0 with value/gradient from `at` and Hessian `hessian`.
  static ReferenceQuadratic taylor(const LocalData& at, const Vec& x0, const Mat& hessian) {
    ReferenceQuadratic q;
    q.curvature = hessian;
    q.linear = at.gradient - hessian * x0;
    q.constant = at.energy - at.gradient.dot(x0) + 0.5 * x0.dot(hessian * x0);
    return q;
  }

  double value(const Vec& x) const { return constant + linear.dot(x) + 0.5 * x.dot(curvature * x); }
  Vec gradient(const Vec& x) const { return linear + curvature * x; }
};

/// Per-state data fixed for the whole run: the single reference Hessian used
/// for width propagation and the quadratic carried by the exact sub-flow.
struct ReferenceModel {
  Mat hessian;
  ReferenceQuadratic quadratic;
};

inline ReferenceModel make_reference(const SurfaceSpec& surface, const Vec& point, Splitting splitting,
                                     const std::optional<Mat>& explicit_hessian = std::nullopt) {
  const LocalData at = evaluate_local(surface, point);
  ReferenceModel ref;
  ref.hessian = explicit_hessian.value_or(at.hessian);
  require_dim(ref.hessian.rows(), point.size(), "reference_hessian");
  require_dim(ref.hessian.cols(), point.size(), "reference_hessian");
  if (asymmetry(ref.hessian) > 1e-12 * std::max(1.0, ref.hessian.norm()) || !ref.hessian.allFinite()) {
    throw ConfigError("reference_hessian", "reference Hessian must be symmetric and finite");
  }
  ref.quadratic = splitting == Splitting::harmonic_reference ? ReferenceQuadratic::taylor(at, point, ref.hessian)
                                                             : ReferenceQuadratic::zero(point.size());
  return ref;
}

/// Exact one-step flow of H = 1/2 P^T Omega P + V_ref(R) for a fixed step.
///
/// The classical map is affine, (R, P) -> M (R, P) + m; the action integral
/// along it is the quadratic form 1/2 y^T W y in y = (R, P, 1), both obtained
/// from a single Van Loan block exponential.
class QuadraticFlow {
 public:
  QuadraticFlow(const Vec& omega, const ReferenceQuadratic& ref, double dt) : d_(omega.size()), dt_(dt), constant_(ref.constant) {
    const Eigen::Index d = d_;
    const Eigen::Index n = 2 * d + 1;
    Mat g = Mat::Zero(n, n);
    g.block(0, d, d, d) = omega.asDiagonal();
    g.block(d, 0, d, d) = -ref.curvature;
    g.block(d, 2 * d, d, 1) = -ref.linear;

    // Lagrangian 1/2 P^T Omega P - f^T R - 1/2 R^T K R; the constant is added analytically.
    Mat q = Mat::Zero(n, n);
    q.block(0, 0, d, d) = -ref.curvature;
    q.block(d, d, d, d) = omega.asDiagonal();
    q.block(0, 2 * d, d, 1) = -ref.linear;
    q.block(2 * d, 0, 1, d) = -ref.linear.transpose();

    Mat c = Mat::Zero(2 * n, 2 * n);
    c.block(0, 0, n, n) = -g.transpose();
    c.block(0, n, n, n) = q;
    c.block(n, n, n, n) = g;
    const Mat e = (c * dt).exp();
    const Mat f22 = e.block(n, n, n, n);
    const Mat f12 = e.block(0, n, n, n);
    map_ = f22.topLeftCorner(2 * d, 2 * d);
    shift_ = f22.block(0, 2 * d, 2 * d, 1);
    action_ = symmetrized(f22.transpose() * f12);
  }

  Eigen::Index dim() const noexcept { return d_; }
  double dt() const noexcept { return dt_; }
  const Mat& map() const noexcept { return map_; }
  const Vec& shift() const noexcept { return shift_; }

  auto qq() const { return map_.topLeftCorner(d_, d_); }
  auto qp() const { return map_.topRightCorner(d_, d_); }
  auto pq() const { return map_.bottomLeftCorner(d_, d_); }
  auto pp() const { return map_.bottomRightCorner(d_, d_); }

  /// Classical action accumulated over one step starting from (r, p).
  double action(const Vec& r, const Vec& p) const {
    Vec y(2 * d_ + 1);
    y << r, p, 1.0;
    return 0.5 * y.dot(action_ * y) - constant_ * dt_;
  }

 private:
  Eigen::Index d_;
  double dt_;
  double constant_;
  Mat map_;
  Vec shift_;
  Mat action_;
};

/// One symmetric step: remainder half kick, exact quadratic flow, remainder half kick.
class Stepper {
 public:
  Stepper(const Vec& omega, SurfaceSpec surface, ReferenceModel reference, double dt_au, Variant variant)
      : surface_(std::move(surface)),
        reference_(std::move(reference)),
        flow_(omega, reference_.quadratic, dt_au),
        dt_(dt_au),
        variant_(variant),
        kick_hessian_(reference_.hessian - reference_.quadratic.curvature),
        kick_width_(kick_hessian_.cwiseAbs().maxCoeff() > 0.0) {
    require_dim(surface_dim(surface_), omega.size(), "surface");
  }

  GaussianWavepacket operator()(const GaussianWavepacket& wp) const {
    LocalData at = evaluate_local(surface_, wp.position);
    GaussianWavepacket out = wp;
    advance(out, at);
    return out;
  }

  /// Advances `wp` in place. `at` holds the local data at the current center
  /// on entry and at the new center on exit, so consecutive steps share one
  /// surface evaluation.
  void advance(GaussianWavepacket& wp, LocalData& at) const {
    const double half = 0.5 * dt_;
    kick(wp, at, half);

    const CMat a0 = wp.width;
    const Vec r0 = wp.position;
    const Vec p0 = wp.momentum;
    const double action = flow_.action(r0, p0);
    wp.position = flow_.qq() * r0 + flow_.qp() * p0 + flow_.shift().head(flow_.dim());
    wp.momentum = flow_.pq() * r0 + flow_.pp() * p0 + flow_.shift().tail(flow_.dim());
    wp.gamma += action;
    if (variant_ == Variant::thawed) {
      const CMat denom = flow_.qq().cast<cplx>() + flow_.qp().cast<cplx>() * a0;
      const CMat numer = flow_.pq().cast<cplx>() + flow_.pp().cast<cplx>() * a0;
      double max_arg = 0.0;
      const cplx log_det = eigen_log_det(denom, &max_arg);
      if (max_arg >= 0.5 * std::numbers::pi) {
        throw NumericalError("time step too large: log-determinant increment leaves the principal branch; reduce dt");
      }
      wp.width = symmetrized(denom.transpose().partialPivLu().solve(numer.transpose()).transpose());
      wp.gamma += 0.5 * kI * log_det;
    }

    at = evaluate_local(surface_, wp.position);
    kick(wp, at, half);
  }

  double dt() const noexcept { return dt_; }
  const SurfaceSpec& surface() const noexcept { return surface_; }
  const ReferenceModel& reference() const noexcept { return reference_; }

 private:
  void kick(GaussianWavepacket& wp, const LocalData& at, double delta) const {
    const ReferenceQuadratic& q = reference_.quadratic;
    wp.momentum -= delta * (at.gradient - q.gradient(wp.position));
    wp.gamma -= delta * (at.energy - q.value(wp.position));
    if (variant_ == Variant::thawed && kick_width_) {
      wp.width -= delta * kick_hessian_.cast<cplx>();
    }
  }

  SurfaceSpec surface_;
  ReferenceModel reference_;
  QuadraticFlow flow_;
  double dt_;
  Variant variant_;
  Mat kick_hessian_;
  bool kick_width_;
};

/// Single step from scratch; `dt_au` may be negative (time reversal).
inline GaussianWavepacket step(const GaussianWavepacket& wp, const Vec& omega, const SurfaceSpec& surface,
                               const ReferenceModel& reference, double dt_au, Variant variant) {
  return Stepper(omega, surface, reference, dt_au, variant)(wp);
}

/// One electronic state of a run: its id, sudden-ionization amplitude, surface,
/// and optionally an explicit reference Hessian (otherwise taken at the FC point).
struct ElectronicState {
  std::string id;
  cplx amplitude{1.0, 0.0};
  SurfaceSpec surface;
  std::optional<Mat> reference_hessian;
};

/// Wavepackets with their surfaces, in state order.
struct StateSet {
  std::vector<std::string> ids;
  std::vector<GaussianWavepacket> wavepackets;
  std::vector<SurfaceSpec> surfaces;
  std::vector<std::optional<Mat>> reference_hessians;

  std::size_t size() const noexcept { return ids.size(); }

  double population() const {
    double s = 0.0;
    for (const auto& wp : wavepackets) s += std::norm(wp.amplitude);
    return s;
  }

  std::size_t index_of(const std::string& id) const {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (ids[k] == id) return k;
    }
    throw ConfigError("states", "unknown state id '" + id + "'");
  }
};

/// Vertical duplication of the neutral ground state onto every state, weighted by a_I.
inline StateSet prepare_initial(const NormalModeFrame& frame, const std::vector<ElectronicState>& states) {
  if (states.empty()) throw ConfigError("states", "at least one electronic state is required");
  double population = 0.0;
  for (const auto& s : states) population += std::norm(s.amplitude);
  if (population > 1.0 + 1e-12) {
    throw ConfigError("states", "sum of |a_I|^2 is " + std::to_string(population) + " > 1");
  }
  StateSet set;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& s = states[k];
    for (std::size_t m = 0; m < k; ++m) {
      if (states[m].id == s.id) throw ConfigError("states", "duplicate state id '" + s.id + "'");
    }
    require_dim(surface_dim(s.surface), frame.dim(), "surfaces." + s.id);
    if (s.reference_hessian) {
      require_dim(s.reference_hessian->rows(), frame.dim(), "reference_hessians." + s.id);
      require_dim(s.reference_hessian->cols(), frame.dim(), "reference_hessians." + s.id);
    }
    set.ids.push_back(s.id);
    set.wavepackets.push_back(ground_state(frame.dim(), s.amplitude));
    set.surfaces.push_back(s.surface);
    set.reference_hessians.push_back(s.reference_hessian);
  }
  return set;
}

struct StateTrajectory {
  std::string id;
  std::vector<double> times_fs;
  std::vector<GaussianWavepacket> snapshots;
  std::vector<double> potential;
  std::vector<double> kinetic;
};

struct TrajectoryRecord {
  Variant variant = Variant::thawed;
  std::vector<StateTrajectory> states;

  const StateTrajectory& state(const std::string& id) const {
    for (const auto& s : states) {
      if (s.id == id) return s;
    }
    throw ConfigError("states", "unknown state id '" + id + "'");
  }
};

inline StateTrajectory propagate_state(const Vec& omega, const std::string& id, const GaussianWavepacket& initial,
                                       const SurfaceSpec& surface, const std::optional<Mat>& reference_hessian,
                                       const PropagationConfig& config) {
  config.validate();
  const ReferenceModel reference = make_reference(surface, initial.position, config.splitting, reference_hessian);
  const Stepper stepper(omega, surface, reference, units::fs_to_au(config.dt_fs), config.variant);

  StateTrajectory out;
  out.id = id;
  const auto n = static_cast<std::size_t>(config.n_steps) + 1;
  out.times_fs.reserve(n);
  out.snapshots.reserve(n);
  GaussianWavepacket wp = initial;
  LocalData at = evaluate_local(surface, wp.position);
  auto record = [&](long k) {
    out.times_fs.push_back(static_cast<double>(k) * config.dt_fs);
    out.snapshots.push_back(wp);
    out.potential.push_back(at.energy);
    out.kinetic.push_back(0.5 * wp.momentum.dot(omega.cwiseProduct(wp.momentum)));
  };
  record(0);
  for (long k = 1; k <= config.n_steps; ++k) {
    stepper.advance(wp, at);
    record(k);
  }
  return out;
}

/// Worker count: DECOH_THREADS if set, else hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("DECOH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// States are independent and run in parallel; results are merged in state order.
inline TrajectoryRecord propagate(const NormalModeFrame& frame, const StateSet& set, const PropagationConfig& config,
                                  unsigned threads = default_thread_count()) {
  config.validate();
  TrajectoryRecord record;
  record.variant = config.variant;
  record.states.resize(set.size());
  std::vector<std::exception_ptr> errors(set.size());
  auto run = [&](std::size_t k) {
    try {
      record.states[k] = propagate_state(frame.omega(), set.ids[k], set.wavepackets[k], set.surfaces[k],
                                         set.reference_hessians[k], config);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), set.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < set.size(); ++k) run(k);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < set.size(); k += workers) run(k);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return record;
}

}  // namespace decoh
