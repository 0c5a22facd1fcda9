#pragma once

// Ground-truth engines for validation: the closed-form Gaussian solution on a
// globally quadratic surface, and exact split-operator propagation on a grid
// for up to two modes.

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "decoh/errors.hpp"
#include "decoh/linalg.hpp"
#include "decoh/surfaces.hpp"
#include "decoh/units.hpp"
#include "decoh/wavepacket.hpp"

namespace decoh::oracle {

/// Exact Gaussian at time t_au on a quadratic surface with positive-definite
/// Hessian, kinetic form 1/2 P^T Omega P.
///
/// Works in u = Omega^(-1/2) R, where the Hamiltonian has unit masses, and
/// rotates into the eigenbasis of Omega^(1/2) H Omega^(1/2) so that every mode
/// is an independent shifted oscillator.
inline GaussianWavepacket harmonic_closed_form(const QuadraticSurface& surface, const Vec& omega,
                                               const GaussianWavepacket& wp0, double t_au) {
  validate(surface);
  const auto d = omega.size();
  require_dim(surface.center.size(), d, "surface");
  require_dim(wp0.dim(), d, "wavepacket");
  Eigen::LLT<Mat> llt(surface.hessian);
  if (llt.info() != Eigen::Success) throw ConfigError("surface.hessian", "closed form needs a positive-definite Hessian");

  const Vec minimum = surface.center - llt.solve(surface.gradient);
  const double e_min = surface.energy - 0.5 * surface.gradient.dot(llt.solve(surface.gradient));

  const Vec s = omega.cwiseSqrt();
  const Mat k = s.asDiagonal() * surface.hessian * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(k));
  const Mat& u = es.eigenvectors();
  const Vec w = es.eigenvalues().cwiseSqrt();

  const Vec v0 = u.transpose() * (wp0.position - minimum).cwiseQuotient(s);
  const Vec pi0 = u.transpose() * s.cwiseProduct(wp0.momentum);
  const CMat a_modes = u.transpose().cast<cplx>() * (s.asDiagonal() * wp0.width * s.asDiagonal()) * u.cast<cplx>();

  auto cos_wt = [&](double t) { return (w * t).array().cos().matrix().eval(); };
  auto sin_wt = [&](double t) { return (w * t).array().sin().matrix().eval(); };

  const Vec c = cos_wt(t_au);
  const Vec sn = sin_wt(t_au);
  const Vec vt = v0.cwiseProduct(c) + pi0.cwiseProduct(sn).cwiseQuotient(w);
  const Vec pit = -v0.cwiseProduct(w).cwiseProduct(sn) + pi0.cwiseProduct(c);

  auto z_of = [&](double t) {
    const Vec ct = cos_wt(t);
    const Vec st = sin_wt(t);
    const CMat mqq = ct.cast<cplx>().asDiagonal();
    const CMat mqp = st.cwiseQuotient(w).cast<cplx>().asDiagonal();
    return (mqq + mqp * a_modes).eval();
  };

  // Continuous branch of log det Z(t): accumulate principal logs of det ratios
  // on a sub-grid fine enough that no ratio winds by more than a small angle.
  const double wmax = w.maxCoeff();
  const auto substeps = static_cast<long>(std::ceil(std::abs(t_au) * wmax / 0.02)) + 1;
  cplx log_det{0.0, 0.0};
  cplx prev = z_of(0.0).determinant();
  log_det = std::log(prev);
  for (long n = 1; n <= substeps; ++n) {
    const cplx cur = z_of(t_au * static_cast<double>(n) / static_cast<double>(substeps)).determinant();
    log_det += std::log(cur / prev);
    prev = cur;
  }

  const CMat z = z_of(t_au);
  const CMat mpq = (-w.cwiseProduct(sn)).cast<cplx>().asDiagonal();
  const CMat mpp = c.cast<cplx>().asDiagonal();
  const CMat a_t = (mpq + mpp * a_modes) * z.inverse();

  const double action = 0.5 * (pit.dot(vt) - pi0.dot(v0)) - e_min * t_au;

  GaussianWavepacket out = wp0;
  out.position = minimum + s.cwiseProduct(u * vt);
  out.momentum = (u * pit).cwiseQuotient(s);
  const Vec s_inv = s.cwiseInverse();
  out.width = symmetrized((s_inv.asDiagonal() * (u.cast<cplx>() * a_t * u.transpose().cast<cplx>()) * s_inv.asDiagonal()).eval());
  out.gamma = wp0.gamma + action + 0.5 * kI * log_det;
  return out;
}

// ---------------------------------------------------------------------------
// Grid

struct GridAxis {
  double min = -8.0;
  double max = 8.0;
  std::size_t points = 256;
};

/// Uniform periodic grid over [min, max) per axis; `dt_fs` is the split-operator
/// step, results are reported every `output_every` steps.
struct GridSpec {
  std::vector<GridAxis> axes;
  double dt_fs = 0.0125;
  long n_steps = 2000;
  long output_every = 20;

  std::size_t dim() const noexcept { return axes.size(); }
  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.points;
    return n;
  }
  double cell_volume() const {
    double v = 1.0;
    for (const auto& a : axes) v *= (a.max - a.min) / static_cast<double>(a.points);
    return v;
  }

  void validate() const {
    if (axes.empty() || axes.size() > 2) {
      throw ConfigError("grid.axes", "grid oracle supports 1 or 2 modes only (got " + std::to_string(axes.size()) +
                                         "); grids scale exponentially with dimension");
    }
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const auto& a = axes[k];
      const std::string p = "grid.axes[" + std::to_string(k) + "]";
      if (a.points < 2 || (a.points & (a.points - 1)) != 0) throw ConfigError(p + ".points", "point count must be a power of two");
      if (!(a.max > a.min)) throw ConfigError(p, "range must satisfy min < max");
    }
    if (!(dt_fs > 0.0)) throw ConfigError("grid.dt_fs", "time step must be positive");
    if (n_steps < 1) throw ConfigError("grid.n_steps", "at least one step is required");
    if (output_every < 1) throw ConfigError("grid.output_every", "must be >= 1");
  }
};

inline constexpr double kBoundaryDensityLimit = 1e-10;

namespace detail {

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

class Plan {
 public:
  Plan() = default;
  explicit Plan(fftw_plan p) : plan_(p) {}
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  Plan(Plan&& o) noexcept : plan_(std::exchange(o.plan_, nullptr)) {}
  Plan& operator=(Plan&& o) noexcept {
    std::swap(plan_, o.plan_);
    return *this;
  }
  ~Plan() {
    if (plan_ != nullptr) fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_ = nullptr;
};

}  // namespace detail

/// A wavefunction sampled on the grid, with in-place FFT plans.
class GridWavefunction {
 public:
  explicit GridWavefunction(const GridSpec& spec) : spec_(spec), n_(spec.size()) {
    spec_.validate();
    data_.reset(fftw_alloc_complex(n_));
    if (!data_) throw NumericalError("FFTW allocation failed");
    auto* buf = data_.get();
    if (spec_.dim() == 1) {
      const int n0 = static_cast<int>(spec_.axes[0].points);
      forward_ = detail::Plan(fftw_plan_dft_1d(n0, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE));
      backward_ = detail::Plan(fftw_plan_dft_1d(n0, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE));
    } else {
      const int n0 = static_cast<int>(spec_.axes[0].points);
      const int n1 = static_cast<int>(spec_.axes[1].points);
      forward_ = detail::Plan(fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE));
      backward_ = detail::Plan(fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE));
    }
  }

  std::size_t size() const noexcept { return n_; }
  cplx* data() noexcept { return reinterpret_cast<cplx*>(data_.get()); }
  const cplx* data() const noexcept { return reinterpret_cast<const cplx*>(data_.get()); }
  cplx& operator[](std::size_t i) noexcept { return data()[i]; }
  const cplx& operator[](std::size_t i) const noexcept { return data()[i]; }

  void forward() { forward_.execute(); }
  void backward() {
    backward_.execute();
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) data()[i] *= scale;
  }

 private:
  GridSpec spec_;
  std::size_t n_;
  std::unique_ptr<fftw_complex, detail::FftwDeleter> data_;
  detail::Plan forward_;
  detail::Plan backward_;
};

/// Grid point coordinates, row-major over axes.
inline std::vector<Vec> grid_points(const GridSpec& spec) {
  spec.validate();
  std::vector<Vec> pts;
  pts.reserve(spec.size());
  const auto& a0 = spec.axes[0];
  const double dx0 = (a0.max - a0.min) / static_cast<double>(a0.points);
  if (spec.dim() == 1) {
    for (std::size_t i = 0; i < a0.points; ++i) pts.push_back(Vec::Constant(1, a0.min + dx0 * static_cast<double>(i)));
    return pts;
  }
  const auto& a1 = spec.axes[1];
  const double dx1 = (a1.max - a1.min) / static_cast<double>(a1.points);
  for (std::size_t i = 0; i < a0.points; ++i) {
    for (std::size_t j = 0; j < a1.points; ++j) {
      Vec p(2);
      p << a0.min + dx0 * static_cast<double>(i), a1.min + dx1 * static_cast<double>(j);
      pts.push_back(p);
    }
  }
  return pts;
}

/// Angular wavenumbers in FFT order, per axis.
inline std::vector<Vec> grid_wavenumbers(const GridSpec& spec) {
  std::vector<Vec> ks;
  for (const auto& a : spec.axes) {
    const auto n = static_cast<Eigen::Index>(a.points);
    const double length = a.max - a.min;
    Vec k(n);
    for (Eigen::Index m = 0; m < n; ++m) {
      const double idx = m < n / 2 ? static_cast<double>(m) : static_cast<double>(m - n);
      k(m) = 2.0 * std::numbers::pi * idx / length;
    }
    ks.push_back(std::move(k));
  }
  return ks;
}

/// Largest |psi|^2 over the outermost grid points of every axis.
inline double boundary_density(const GridSpec& spec, const cplx* psi) {
  double worst = 0.0;
  if (spec.dim() == 1) {
    const std::size_t n = spec.axes[0].points;
    return std::max(std::norm(psi[0]), std::norm(psi[n - 1]));
  }
  const std::size_t n0 = spec.axes[0].points;
  const std::size_t n1 = spec.axes[1].points;
  for (std::size_t i = 0; i < n0; ++i) {
    worst = std::max({worst, std::norm(psi[i * n1]), std::norm(psi[i * n1 + n1 - 1])});
  }
  for (std::size_t j = 0; j < n1; ++j) {
    worst = std::max({worst, std::norm(psi[j]), std::norm(psi[(n0 - 1) * n1 + j])});
  }
  return worst;
}

inline void check_boundary(const GridSpec& spec, const cplx* psi, const std::string& what) {
  const double b = boundary_density(spec, psi);
  if (!(b < kBoundaryDensityLimit)) {
    throw NumericalError(what + ": boundary density " + std::to_string(b) + " exceeds 1e-10; enlarge the grid");
  }
}

/// Trapezoidal (periodic) evaluation of conj(a_I) a_J <g_I | g_J>.
inline cplx quadrature_overlap(const GaussianWavepacket& wi, const GaussianWavepacket& wj, const GridSpec& spec) {
  spec.validate();
  require_dim(wi.dim(), static_cast<Eigen::Index>(spec.dim()), "quadrature_overlap");
  require_dim(wj.dim(), static_cast<Eigen::Index>(spec.dim()), "quadrature_overlap");
  const auto pts = grid_points(spec);
  GaussianWavepacket gi = wi;
  GaussianWavepacket gj = wj;
  gi.amplitude = gj.amplitude = 1.0;
  std::vector<cplx> vi(pts.size());
  std::vector<cplx> vj(pts.size());
  cplx sum{0.0, 0.0};
  for (std::size_t p = 0; p < pts.size(); ++p) {
    vi[p] = evaluate(gi, pts[p]);
    vj[p] = evaluate(gj, pts[p]);
    sum += std::conj(vi[p]) * vj[p];
  }
  check_boundary(spec, vi.data(), "quadrature_overlap (state I)");
  check_boundary(spec, vj.data(), "quadrature_overlap (state J)");
  return std::conj(wi.amplitude) * wj.amplitude * sum * spec.cell_volume();
}

struct GridSample {
  double t_fs = 0.0;
  cplx chi{0.0, 0.0};
  Vec mean_position_i, mean_momentum_i;
  Vec mean_position_j, mean_momentum_j;
  double norm_i = 1.0;
  double norm_j = 1.0;
};

/// Exact propagation of the same initial Gaussian on two surfaces with the
/// second-order split-operator method; kinetic eigenvalues 1/2 sum_j w_j k_j^2.
class SplitOperator {
 public:
  SplitOperator(const SurfaceSpec& surface, const Vec& omega, const GridSpec& spec)
      : spec_(spec), psi_(spec) {
    spec_.validate();
    require_dim(omega.size(), static_cast<Eigen::Index>(spec_.dim()), "grid dimension");
    require_dim(surface_dim(surface), omega.size(), "surface");
    const double dt = units::fs_to_au(spec_.dt_fs);
    points_ = grid_points(spec_);
    const auto ks = grid_wavenumbers(spec_);
    const std::size_t n = spec_.size();
    half_potential_.resize(n);
    kinetic_.resize(n);
    kinetic_k_.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
      const double v = energy(surface, points_[p]);
      half_potential_[p] = std::exp(-kI * (0.5 * dt * v));
    }
    for (std::size_t p = 0; p < n; ++p) {
      Vec k(spec_.dim());
      if (spec_.dim() == 1) {
        k(0) = ks[0](static_cast<Eigen::Index>(p));
      } else {
        const std::size_t n1 = spec_.axes[1].points;
        k(0) = ks[0](static_cast<Eigen::Index>(p / n1));
        k(1) = ks[1](static_cast<Eigen::Index>(p % n1));
      }
      kinetic_k_[p] = k;
      const double t = 0.5 * k.dot(omega.cwiseProduct(k));
      kinetic_[p] = std::exp(-kI * (dt * t));
    }
  }

  void load(const GaussianWavepacket& wp) {
    GaussianWavepacket g = wp;
    g.amplitude = 1.0;
    for (std::size_t p = 0; p < points_.size(); ++p) psi_[p] = evaluate(g, points_[p]);
  }

  void step() {
    const std::size_t n = psi_.size();
    for (std::size_t p = 0; p < n; ++p) psi_[p] *= half_potential_[p];
    psi_.forward();
    for (std::size_t p = 0; p < n; ++p) psi_[p] *= kinetic_[p];
    psi_.backward();
    for (std::size_t p = 0; p < n; ++p) psi_[p] *= half_potential_[p];
  }

  const GridWavefunction& psi() const noexcept { return psi_; }

  double norm() const {
    double s = 0.0;
    for (std::size_t p = 0; p < psi_.size(); ++p) s += std::norm(psi_[p]);
    return s * spec_.cell_volume();
  }

  Vec mean_position() const {
    Vec m = Vec::Zero(static_cast<Eigen::Index>(spec_.dim()));
    double w = 0.0;
    for (std::size_t p = 0; p < psi_.size(); ++p) {
      const double rho = std::norm(psi_[p]);
      m += rho * points_[p];
      w += rho;
    }
    return m / w;
  }

  /// <p> from the momentum-space density; uses a scratch copy.
  Vec mean_momentum() const {
    GridWavefunction scratch(spec_);
    for (std::size_t p = 0; p < psi_.size(); ++p) scratch[p] = psi_[p];
    scratch.forward();
    Vec m = Vec::Zero(static_cast<Eigen::Index>(spec_.dim()));
    double w = 0.0;
    for (std::size_t p = 0; p < scratch.size(); ++p) {
      const double rho = std::norm(scratch[p]);
      m += rho * kinetic_k_[p];
      w += rho;
    }
    return m / w;
  }

 private:
  GridSpec spec_;
  GridWavefunction psi_;
  std::vector<Vec> points_;
  std::vector<Vec> kinetic_k_;
  std::vector<cplx> half_potential_;
  std::vector<cplx> kinetic_;
};

/// Exact coherence conj(a_I) a_J <psi_I(t)|psi_J(t)> at t = 0 and every
/// `output_every` steps. Throws if either wavefunction reaches the boundary.
inline std::vector<GridSample> grid_propagate(const SurfaceSpec& surface_i, const SurfaceSpec& surface_j, const Vec& omega,
                                              const GaussianWavepacket& wp0, const GridSpec& spec, cplx a_i = 1.0,
                                              cplx a_j = 1.0) {
  spec.validate();
  require_dim(wp0.dim(), static_cast<Eigen::Index>(spec.dim()), "grid initial wavepacket");
  SplitOperator pi(surface_i, omega, spec);
  SplitOperator pj(surface_j, omega, spec);
  pi.load(wp0);
  pj.load(wp0);
  const double dv = spec.cell_volume();

  std::vector<GridSample> out;
  auto sample = [&](long step) {
    check_boundary(spec, pi.psi().data(), "grid state I");
    check_boundary(spec, pj.psi().data(), "grid state J");
    GridSample s;
    s.t_fs = static_cast<double>(step) * spec.dt_fs;
    cplx sum{0.0, 0.0};
    for (std::size_t p = 0; p < spec.size(); ++p) sum += std::conj(pi.psi()[p]) * pj.psi()[p];
    s.chi = std::conj(a_i) * a_j * sum * dv;
    s.mean_position_i = pi.mean_position();
    s.mean_momentum_i = pi.mean_momentum();
    s.mean_position_j = pj.mean_position();
    s.mean_momentum_j = pj.mean_momentum();
    s.norm_i = pi.norm();
    s.norm_j = pj.norm();
    out.push_back(std::move(s));
  };
  sample(0);
  for (long k = 1; k <= spec.n_steps; ++k) {
    pi.step();
    pj.step();
    if (k % spec.output_every == 0) sample(k);
  }
  return out;
}

}  // namespace decoh::oracle
