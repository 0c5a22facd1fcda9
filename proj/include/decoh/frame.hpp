#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "decoh/detail/json_util.hpp"
#include "decoh/errors.hpp"
#include "decoh/linalg.hpp"
#include "decoh/units.hpp"

namespace decoh {

struct Atom {
  std::string element;
  double mass_amu = 0.0;
  Eigen::Vector3d position_bohr = Eigen::Vector3d::Zero();
};

/// Equilibrium geometry. Masses are in amu, positions in bohr.
class MolecularFrame {
 public:
  explicit MolecularFrame(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.size() < 2) throw ConfigError("geometry.atoms", "at least two atoms are required");
    for (std::size_t a = 0; a < atoms_.size(); ++a) {
      if (!(atoms_[a].mass_amu > 0.0)) {
        throw ConfigError("geometry.atoms[" + std::to_string(a) + "].mass_amu", "mass must be positive");
      }
    }
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  Eigen::Index cartesian_dim() const noexcept { return static_cast<Eigen::Index>(3 * atoms_.size()); }

  Eigen::Vector3d center_of_mass() const {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    double total = 0.0;
    for (const auto& a : atoms_) {
      c += a.mass_amu * a.position_bohr;
      total += a.mass_amu;
    }
    return c / total;
  }

 private:
  std::vector<Atom> atoms_;
};

/// Normal-mode basis of the neutral ground state. Defines the mass- and
/// frequency-scaled coordinates: R_j = sqrt(w_j) Q_j, P_j = P_Qj / sqrt(w_j),
/// with Q the mass-weighted normal coordinates in atomic units.
class NormalModeFrame {
 public:
  /// `omega` in hartree. `labels` and `irreps` may be empty (defaults are
  /// generated), `mode_vectors` holds one mass-weighted 3N-vector per column.
  NormalModeFrame(Vec omega, std::vector<std::string> labels = {}, std::vector<std::string> irreps = {},
                  std::optional<MolecularFrame> geometry = std::nullopt,
                  std::optional<Mat> mode_vectors = std::nullopt)
      : omega_(std::move(omega)),
        labels_(std::move(labels)),
        irreps_(std::move(irreps)),
        geometry_(std::move(geometry)),
        modes_(std::move(mode_vectors)) {
    const auto d = omega_.size();
    if (d < 1) throw ConfigError("modes", "at least one mode is required");
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!(omega_(j) > 0.0) || !std::isfinite(omega_(j))) {
        throw ConfigError("modes[" + std::to_string(j) + "].frequency_cm1",
                          "frequencies must be real and positive (imaginary modes are rejected)");
      }
    }
    if (labels_.empty()) {
      for (Eigen::Index j = 0; j < d; ++j) labels_.push_back("mode " + std::to_string(j + 1));
    }
    if (static_cast<Eigen::Index>(labels_.size()) != d) throw ConfigError("modes", "label count differs from mode count");
    if (!irreps_.empty() && static_cast<Eigen::Index>(irreps_.size()) != d) {
      throw ConfigError("modes", "irrep count differs from mode count");
    }
    if (modes_.has_value()) {
      if (!geometry_.has_value()) throw ConfigError("geometry", "mode vectors require atoms");
      require_dim(modes_->rows(), geometry_->cartesian_dim(), "geometry.mode_vectors");
      require_dim(modes_->cols(), d, "geometry.mode_vectors");
      const Mat gram = modes_->transpose() * *modes_;
      if ((gram - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
        throw ConfigError("geometry.mode_vectors", "mode vectors must be orthonormal to 1e-10");
      }
    }
  }

  static NormalModeFrame from_wavenumbers(const std::vector<double>& cm1, std::vector<std::string> labels = {},
                                          std::vector<std::string> irreps = {}) {
    Vec w(static_cast<Eigen::Index>(cm1.size()));
    for (std::size_t j = 0; j < cm1.size(); ++j) w(static_cast<Eigen::Index>(j)) = units::cm1_to_hartree(cm1[j]);
    return NormalModeFrame(std::move(w), std::move(labels), std::move(irreps));
  }

  Eigen::Index dim() const noexcept { return omega_.size(); }
  const Vec& omega() const noexcept { return omega_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& irreps() const noexcept { return irreps_; }
  bool has_irreps() const noexcept { return !irreps_.empty(); }
  const std::optional<MolecularFrame>& geometry() const noexcept { return geometry_; }
  const std::optional<Mat>& mode_vectors() const noexcept { return modes_; }

  NormalModeFrame with_irreps(std::vector<std::string> irreps) const {
    return NormalModeFrame(omega_, labels_, std::move(irreps), geometry_, modes_);
  }

 private:
  Vec omega_;
  std::vector<std::string> labels_;
  std::vector<std::string> irreps_;
  std::optional<MolecularFrame> geometry_;
  std::optional<Mat> modes_;
};

/// Omega = diag(w_j). In scaled coordinates dR/dt = Omega P, dP/dt = -grad V.
inline Mat harmonic_hamiltonian_form(const NormalModeFrame& frame) {
  return frame.omega().asDiagonal();
}

namespace detail {

inline Vec sqrt_masses_me(const NormalModeFrame& frame) {
  if (!frame.mode_vectors().has_value()) {
    throw ConfigError("geometry.mode_vectors", "frame has no mode vectors; Cartesian transforms need them");
  }
  const auto& atoms = frame.geometry()->atoms();
  Vec s(frame.geometry()->cartesian_dim());
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    s.segment<3>(static_cast<Eigen::Index>(3 * a)).setConstant(std::sqrt(units::amu_to_me(atoms[a].mass_amu)));
  }
  return s;
}

}  // namespace detail

/// Cartesian displacement (bohr, from equilibrium) and momentum (a.u.) to
/// scaled (R, P).
inline std::pair<Vec, Vec> to_scaled(const NormalModeFrame& frame, const Vec& displacement, const Vec& momentum) {
  const Vec sm = detail::sqrt_masses_me(frame);
  require_dim(displacement.size(), sm.size(), "displacement");
  require_dim(momentum.size(), sm.size(), "momentum");
  const Mat& modes = *frame.mode_vectors();
  const Vec sqrt_w = frame.omega().cwiseSqrt();
  const Vec q = modes.transpose() * displacement.cwiseProduct(sm);
  const Vec pq = modes.transpose() * momentum.cwiseQuotient(sm);
  return {q.cwiseProduct(sqrt_w), pq.cwiseQuotient(sqrt_w)};
}

/// Inverse of to_scaled on the span of the mode vectors.
inline std::pair<Vec, Vec> from_scaled(const NormalModeFrame& frame, const Vec& r, const Vec& p) {
  const Vec sm = detail::sqrt_masses_me(frame);
  require_dim(r.size(), frame.dim(), "R");
  require_dim(p.size(), frame.dim(), "P");
  const Mat& modes = *frame.mode_vectors();
  const Vec sqrt_w = frame.omega().cwiseSqrt();
  const Vec q = modes * r.cwiseQuotient(sqrt_w);
  const Vec pq = modes * p.cwiseProduct(sqrt_w);
  return {q.cwiseQuotient(sm), pq.cwiseProduct(sm)};
}

// ---------------------------------------------------------------------------
// System definition file
//
// {
//   "modes": [ { "frequency_cm1": 1808.0, "label": "C=O stretching", "irrep": "A'" }, ... ],
//   "geometry": {                                   // optional
//     "atoms": [ { "element": "C", "mass_amu": 12.0, "position_bohr": [x, y, z] }, ... ],
//     "mode_vectors": [ [3N numbers], ... ]         // one row per mode, mass-weighted, orthonormal
//   }
// }

/// Irrep names are stored with typographic primes; ASCII ' and '' are accepted.
inline std::string canonical_irrep_name(std::string name) {
  if (name.size() >= 2 && name.compare(name.size() - 2, 2, "''") == 0) return name.substr(0, name.size() - 2) + "″";
  if (!name.empty() && name.back() == '\'') return name.substr(0, name.size() - 1) + "′";
  return name;
}

inline MolecularFrame molecular_frame_from_json(const detail::json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of atoms");
  std::vector<Atom> atoms;
  for (std::size_t a = 0; a < j.size(); ++a) {
    const std::string ap = detail::index_path(path, a);
    detail::reject_unknown_keys(j[a], ap, {"element", "mass_amu", "position_bohr"});
    Atom atom;
    atom.element = detail::get_string(detail::require_key(j[a], ap, "element"), ap + ".element");
    atom.mass_amu = detail::get_number(detail::require_key(j[a], ap, "mass_amu"), ap + ".mass_amu");
    const Vec pos = detail::get_vector(detail::require_key(j[a], ap, "position_bohr"), ap + ".position_bohr");
    require_dim(pos.size(), 3, ap + ".position_bohr");
    atom.position_bohr = pos;
    atoms.push_back(std::move(atom));
  }
  return MolecularFrame(std::move(atoms));
}

inline NormalModeFrame system_from_json(const detail::json& j) {
  detail::reject_unknown_keys(j, "", {"modes", "geometry"});
  const auto& modes = detail::require_key(j, "", "modes");
  if (!modes.is_array() || modes.empty()) throw ConfigError("modes", "expected a non-empty array");
  Vec omega(static_cast<Eigen::Index>(modes.size()));
  std::vector<std::string> labels;
  std::vector<std::string> irreps;
  std::size_t with_irrep = 0;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const std::string mp = detail::index_path("modes", m);
    detail::reject_unknown_keys(modes[m], mp, {"frequency_cm1", "label", "irrep"});
    const double cm1 = detail::get_number(detail::require_key(modes[m], mp, "frequency_cm1"), mp + ".frequency_cm1");
    if (!(cm1 > 0.0)) throw ConfigError(mp + ".frequency_cm1", "frequencies must be real and positive (imaginary modes are rejected)");
    omega(static_cast<Eigen::Index>(m)) = units::cm1_to_hartree(cm1);
    labels.push_back(modes[m].contains("label") ? detail::get_string(modes[m]["label"], mp + ".label")
                                                : "mode " + std::to_string(m + 1));
    if (modes[m].contains("irrep")) {
      irreps.push_back(canonical_irrep_name(detail::get_string(modes[m]["irrep"], mp + ".irrep")));
      ++with_irrep;
    } else {
      irreps.emplace_back();
    }
  }
  if (with_irrep != 0 && with_irrep != modes.size()) throw ConfigError("modes", "irrep must be given for all modes or none");
  if (with_irrep == 0) irreps.clear();

  std::optional<MolecularFrame> geometry;
  std::optional<Mat> vectors;
  if (j.contains("geometry")) {
    const auto& g = j["geometry"];
    detail::reject_unknown_keys(g, "geometry", {"atoms", "mode_vectors"});
    geometry = molecular_frame_from_json(detail::require_key(g, "geometry", "atoms"), "geometry.atoms");
    if (g.contains("mode_vectors")) vectors = detail::get_matrix(g["mode_vectors"], "geometry.mode_vectors").transpose();
  }
  return NormalModeFrame(std::move(omega), std::move(labels), std::move(irreps), std::move(geometry), std::move(vectors));
}

}  // namespace decoh
