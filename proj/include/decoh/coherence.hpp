#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "decoh/csv.hpp"
#include "decoh/errors.hpp"
#include "decoh/frame.hpp"
#include "decoh/linalg.hpp"
#include "decoh/propagator.hpp"
#include "decoh/wavepacket.hpp"

namespace decoh {

// Coherence convention: chi_IJ = <chi_I | chi_J>, conjugate on the first index.

/// Closed-form Gaussian overlap including the amplitudes, conj(a_I) a_J <g_I|g_J>.
///
/// The square root of the determinant is taken eigenvalue by eigenvalue on
/// the principal branch. The combined width -i(A_J - conj(A_I)) has a positive
/// definite real part, so its spectrum stays in the right half plane and the
/// branch is continuous along any trajectory.
inline cplx overlap_coherence(const GaussianWavepacket& wi, const GaussianWavepacket& wj) {
  require_dim(wj.dim(), wi.dim(), "overlap");
  const auto d = wi.dim();
  const Vec delta = wj.position - wi.position;
  const CVec delta_c = delta.cast<cplx>();
  const CMat c = wj.width - wi.width.conjugate();
  if (!is_positive_definite(c.imag())) throw NumericalError("overlap: combined width is not positive definite");
  const CVec b = -(wj.width * delta_c) + (wj.momentum - wi.momentum).cast<cplx>();
  const cplx quad = 0.5 * (delta_c.transpose() * wj.width * delta_c)(0);
  const cplx c0 = quad - wj.momentum.dot(delta) + wj.gamma - std::conj(wi.gamma);
  const cplx bcb = (b.transpose() * c.partialPivLu().solve(b))(0);
  const cplx log_det = eigen_log_det(-kI * c);
  const cplx exponent = kI * c0 + 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det -
                        0.5 * kI * bcb;
  return std::conj(wi.amplitude) * wj.amplitude * std::exp(exponent);
}

enum class CoherenceMethod { overlap, analytic, grid };

inline std::string to_string(CoherenceMethod m) {
  switch (m) {
    case CoherenceMethod::overlap: return "overlap";
    case CoherenceMethod::analytic: return "analytic";
    case CoherenceMethod::grid: return "grid";
  }
  return "unknown";
}

struct CoherencePoint {
  double t_fs = 0.0;
  cplx chi{0.0, 0.0};
  double d2_total = 0.0;
  double d2_position = 0.0;
  double d2_momentum = 0.0;
  Vec d2_position_modes;
  Vec d2_momentum_modes;
  double action = 0.0;  // analytic method only
};

struct CoherenceTrace {
  std::string state_i;
  std::string state_j;
  CoherenceMethod method = CoherenceMethod::overlap;
  std::vector<CoherencePoint> points;

  Eigen::Index modes() const { return points.empty() ? 0 : points.front().d2_position_modes.size(); }
};

/// Phase-space separation of two centers, mode by mode.
inline CoherencePoint separation(double t_fs, const Vec& ri, const Vec& pi, const Vec& rj, const Vec& pj) {
  CoherencePoint pt;
  pt.t_fs = t_fs;
  pt.d2_position_modes = (rj - ri).array().square().matrix();
  pt.d2_momentum_modes = (pj - pi).array().square().matrix();
  pt.d2_position = pt.d2_position_modes.sum();
  pt.d2_momentum = pt.d2_momentum_modes.sum();
  pt.d2_total = pt.d2_position + pt.d2_momentum;
  return pt;
}

namespace detail {

inline void require_matching(const StateTrajectory& ti, const StateTrajectory& tj) {
  if (ti.times_fs.size() != tj.times_fs.size()) throw ConfigError("trajectories", "time grids differ in length");
  for (std::size_t k = 0; k < ti.times_fs.size(); ++k) {
    if (ti.times_fs[k] != tj.times_fs[k]) throw ConfigError("trajectories", "time grids differ");
  }
  if (!ti.snapshots.empty()) require_dim(tj.snapshots.front().dim(), ti.snapshots.front().dim(), "trajectories");
}

}  // namespace detail

/// Exact overlap at every snapshot. The d2 columns come from the centers; for
/// thawed trajectories they are a diagnostic, not the full coherence decay.
inline CoherenceTrace overlap_trace(const StateTrajectory& ti, const StateTrajectory& tj) {
  detail::require_matching(ti, tj);
  CoherenceTrace trace{ti.id, tj.id, CoherenceMethod::overlap, {}};
  trace.points.reserve(ti.snapshots.size());
  for (std::size_t k = 0; k < ti.snapshots.size(); ++k) {
    const auto& wi = ti.snapshots[k];
    const auto& wj = tj.snapshots[k];
    CoherencePoint pt = separation(ti.times_fs[k], wi.position, wi.momentum, wj.position, wj.momentum);
    pt.chi = overlap_coherence(wi, wj);
    trace.points.push_back(std::move(pt));
  }
  return trace;
}

/// Frozen-Gaussian coherence conj(a_I) a_J exp(-d^2/4) exp(iS) with
/// S = Re(gamma_J - gamma_I) + 1/2 (P_I + P_J)^T (R_I - R_J).
/// Both widths must equal i*I; anything else signals thawed data.
inline CoherenceTrace analytic_coherence(const StateTrajectory& ti, const StateTrajectory& tj, cplx ai, cplx aj) {
  detail::require_matching(ti, tj);
  CoherenceTrace trace{ti.id, tj.id, CoherenceMethod::analytic, {}};
  if (ti.snapshots.empty()) return trace;
  const auto d = ti.snapshots.front().dim();
  const CMat unit = kI * CMat::Identity(d, d);
  for (std::size_t k = 0; k < ti.snapshots.size(); ++k) {
    const auto& wi = ti.snapshots[k];
    const auto& wj = tj.snapshots[k];
    if ((wi.width - unit).cwiseAbs().maxCoeff() > 1e-10 || (wj.width - unit).cwiseAbs().maxCoeff() > 1e-10) {
      throw ConfigError("analytic_coherence", "width differs from i*I at t = " + csv::fmt(ti.times_fs[k]) +
                                                  " fs; the analytic expression needs frozen trajectories");
    }
    CoherencePoint pt = separation(ti.times_fs[k], wi.position, wi.momentum, wj.position, wj.momentum);
    pt.action = wj.gamma.real() - wi.gamma.real() + 0.5 * (wi.momentum + wj.momentum).dot(wi.position - wj.position);
    pt.chi = std::conj(ai) * aj * std::exp(-0.25 * pt.d2_total) * std::exp(kI * pt.action);
    trace.points.push_back(std::move(pt));
  }
  return trace;
}

inline CoherenceTrace analytic_coherence(const StateTrajectory& ti, const StateTrajectory& tj) {
  if (ti.snapshots.empty()) return {ti.id, tj.id, CoherenceMethod::analytic, {}};
  return analytic_coherence(ti, tj, ti.snapshots.front().amplitude, tj.snapshots.front().amplitude);
}

/// Per-mode factors exp(-dR_j^2/4) and exp(-dP_j^2/4); rows are times.
struct ModeFactors {
  std::vector<double> times_fs;
  Mat position;
  Mat momentum;

  /// Product over all modes and both kinds at row k.
  double product(Eigen::Index k) const { return position.row(k).prod() * momentum.row(k).prod(); }
};

inline ModeFactors per_mode_factors(const StateTrajectory& ti, const StateTrajectory& tj) {
  detail::require_matching(ti, tj);
  ModeFactors f;
  f.times_fs = ti.times_fs;
  const auto n = static_cast<Eigen::Index>(ti.snapshots.size());
  const auto d = n > 0 ? ti.snapshots.front().dim() : 0;
  f.position.resize(n, d);
  f.momentum.resize(n, d);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& wi = ti.snapshots[static_cast<std::size_t>(k)];
    const auto& wj = tj.snapshots[static_cast<std::size_t>(k)];
    f.position.row(k) = (-0.25 * (wj.position - wi.position).array().square()).exp().matrix().transpose();
    f.momentum.row(k) = (-0.25 * (wj.momentum - wi.momentum).array().square()).exp().matrix().transpose();
  }
  return f;
}

// ---------------------------------------------------------------------------
// Aggregation over mode groups

/// A set of modes (0-based) and which of their contributions to include.
struct ModeGroup {
  std::string name;
  std::vector<Eigen::Index> modes;
  bool position = true;
  bool momentum = true;
};

struct GroupedTrace {
  std::vector<double> times_fs;
  std::vector<std::string> names;
  Mat d2;  // rows: times, cols: groups

  /// exp(-d2/4) per group.
  Mat coherence_factor() const { return (-0.25 * d2.array()).exp().matrix(); }
};

/// One group per distinct irrep, in order of first appearance.
inline std::vector<ModeGroup> group_by_irrep(const NormalModeFrame& frame) {
  if (!frame.has_irreps()) throw ConfigError("modes", "no irrep labels available for by-irrep grouping");
  std::vector<ModeGroup> groups;
  for (Eigen::Index j = 0; j < frame.dim(); ++j) {
    const std::string& irrep = frame.irreps()[static_cast<std::size_t>(j)];
    auto it = std::find_if(groups.begin(), groups.end(), [&](const ModeGroup& g) { return g.name == irrep; });
    if (it == groups.end()) groups.push_back({irrep, {j}});
    else it->modes.push_back(j);
  }
  return groups;
}

/// One group per distinct motion label, in order of first appearance.
inline std::vector<ModeGroup> group_by_label(const NormalModeFrame& frame) {
  std::vector<ModeGroup> groups;
  for (Eigen::Index j = 0; j < frame.dim(); ++j) {
    const std::string& label = frame.labels()[static_cast<std::size_t>(j)];
    auto it = std::find_if(groups.begin(), groups.end(), [&](const ModeGroup& g) { return g.name == label; });
    if (it == groups.end()) groups.push_back({label, {j}});
    else it->modes.push_back(j);
  }
  return groups;
}

inline std::vector<ModeGroup> group_position_momentum(Eigen::Index d) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) all[static_cast<std::size_t>(j)] = j;
  return {{"position", all, true, false}, {"momentum", all, false, true}};
}

/// `subset` as one group and, when `rest` is non-empty, its complement as another.
inline std::vector<ModeGroup> group_subset(Eigen::Index d, const std::string& name, std::vector<Eigen::Index> subset,
                                           const std::string& rest = {}) {
  std::vector<ModeGroup> groups{{name, subset}};
  if (!rest.empty()) {
    ModeGroup other{rest, {}};
    for (Eigen::Index j = 0; j < d; ++j) {
      if (std::find(subset.begin(), subset.end(), j) == subset.end()) other.modes.push_back(j);
    }
    groups.push_back(std::move(other));
  }
  return groups;
}

inline GroupedTrace aggregate(const CoherenceTrace& trace, const std::vector<ModeGroup>& groups) {
  const auto d = trace.modes();
  GroupedTrace out;
  for (const auto& g : groups) {
    for (Eigen::Index j : g.modes) {
      if (j < 0 || j >= d) throw ConfigError("groupings." + g.name, "unknown mode " + std::to_string(j + 1));
    }
    out.names.push_back(g.name);
  }
  const auto n = static_cast<Eigen::Index>(trace.points.size());
  out.d2 = Mat::Zero(n, static_cast<Eigen::Index>(groups.size()));
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& pt = trace.points[static_cast<std::size_t>(k)];
    out.times_fs.push_back(pt.t_fs);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      double s = 0.0;
      for (Eigen::Index j : groups[g].modes) {
        if (groups[g].position) s += pt.d2_position_modes(j);
        if (groups[g].momentum) s += pt.d2_momentum_modes(j);
      }
      out.d2(k, static_cast<Eigen::Index>(g)) = s;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Observables

/// Constant Hermitian matrix O_IJ over the modeled states, in state order.
struct ObservableMatrix {
  std::vector<std::string> ids;
  CMat values;

  void validate() const {
    require_dim(values.rows(), static_cast<Eigen::Index>(ids.size()), "observable");
    require_dim(values.cols(), static_cast<Eigen::Index>(ids.size()), "observable");
    if ((values - values.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw ConfigError("observable", "matrix is not Hermitian");
  }
};

/// <O>(t) = sum_I O_II |a_I|^2 + 2 Re sum_{I<J} O_IJ chi_IJ(t).
/// Every pair with a non-zero O_IJ needs a trace, in either orientation.
inline std::vector<double> expectation_trace(const TrajectoryRecord& record, const std::vector<CoherenceTrace>& coherences,
                                             const ObservableMatrix& o) {
  o.validate();
  const std::size_t n = o.ids.size();
  std::vector<double> populations(n);
  std::size_t steps = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& traj = record.state(o.ids[i]);
    if (traj.snapshots.empty()) throw ConfigError("observable", "empty trajectory for state " + o.ids[i]);
    populations[i] = std::norm(traj.snapshots.front().amplitude);
    steps = traj.snapshots.size();
  }
  std::vector<double> out(steps, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : out) v += o.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real() * populations[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx oij = o.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (oij == cplx{0.0, 0.0}) continue;
      const CoherenceTrace* found = nullptr;
      bool flipped = false;
      for (const auto& c : coherences) {
        if (c.state_i == o.ids[i] && c.state_j == o.ids[j]) found = &c;
        if (c.state_i == o.ids[j] && c.state_j == o.ids[i] && found == nullptr) {
          found = &c;
          flipped = true;
        }
      }
      if (found == nullptr) throw ConfigError("observable", "no coherence trace for pair " + o.ids[i] + "/" + o.ids[j]);
      if (found->points.size() != steps) throw ConfigError("observable", "coherence trace length mismatch");
      for (std::size_t k = 0; k < steps; ++k) {
        const cplx chi = flipped ? std::conj(found->points[k].chi) : found->points[k].chi;
        out[k] += 2.0 * (oij * chi).real();
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV: t_fs, re_coh, im_coh, abs_coh, d2_total, d2_pos, d2_mom, then
// d2_pos_<j>, d2_mom_<j> for modes j = 1..D.

inline std::vector<std::string> coherence_csv_header(Eigen::Index d) {
  std::vector<std::string> h{"t_fs", "re_coh", "im_coh", "abs_coh", "d2_total", "d2_pos", "d2_mom"};
  for (Eigen::Index j = 1; j <= d; ++j) {
    h.push_back("d2_pos_" + std::to_string(j));
    h.push_back("d2_mom_" + std::to_string(j));
  }
  return h;
}

inline void write_coherence_csv(std::ostream& os, const CoherenceTrace& trace) {
  const auto d = trace.modes();
  os << csv::join(coherence_csv_header(d)) << '\n';
  for (const auto& pt : trace.points) {
    std::vector<std::string> row{csv::fmt(pt.t_fs), csv::fmt(pt.chi.real()), csv::fmt(pt.chi.imag()),
                                 csv::fmt(std::abs(pt.chi)), csv::fmt(pt.d2_total), csv::fmt(pt.d2_position),
                                 csv::fmt(pt.d2_momentum)};
    for (Eigen::Index j = 0; j < d; ++j) {
      row.push_back(csv::fmt(pt.d2_position_modes(j)));
      row.push_back(csv::fmt(pt.d2_momentum_modes(j)));
    }
    os << csv::join(row) << '\n';
  }
}

}  // namespace decoh
