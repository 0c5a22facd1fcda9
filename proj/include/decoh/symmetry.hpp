#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "decoh/csv.hpp"
#include "decoh/detail/json_util.hpp"
#include "decoh/errors.hpp"
#include "decoh/frame.hpp"
#include "decoh/linalg.hpp"

namespace decoh {

/// Orthogonal 3x3 map plus the atom permutation it induces on the geometry:
/// atom a is carried onto atom permutation[a].
struct SymmetryOperation {
  std::string name;
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();
  std::vector<std::size_t> permutation;
};

struct Irrep {
  std::string name;
  std::vector<int> characters;  // one per operation, all +-1
};

/// Abelian point group with one-dimensional real irreps. The totally
/// symmetric irrep is always the first table row.
struct PointGroup {
  std::string name;
  std::vector<SymmetryOperation> operations;
  std::vector<Irrep> table;

  /// Closure of the matrices under composition, to 1e-10.
  void validate() const {
    for (const auto& a : operations) {
      for (const auto& b : operations) {
        const Eigen::Matrix3d ab = a.matrix * b.matrix;
        const bool closed = std::any_of(operations.begin(), operations.end(), [&](const SymmetryOperation& c) {
          return (c.matrix - ab).cwiseAbs().maxCoeff() <= 1e-10;
        });
        if (!closed) throw NumericalError("point group " + name + ": " + a.name + " * " + b.name + " is not in the group");
      }
    }
    for (const auto& irrep : table) {
      if (irrep.characters.size() != operations.size()) throw NumericalError("character table row size mismatch");
    }
  }

  /// Same group with every matrix conjugated by the rotation q (q M q^T).
  PointGroup conjugated(const Eigen::Matrix3d& q) const {
    PointGroup g = *this;
    for (auto& op : g.operations) op.matrix = q * op.matrix * q.transpose();
    return g;
  }
};

namespace detail {

struct GroupTemplate {
  std::vector<std::string> op_names;
  std::vector<Irrep> table;
};

inline GroupTemplate group_template(const std::string& name) {
  if (name == "C1") return {{"E"}, {{"A", {1}}}};
  if (name == "Cs") return {{"E", "σh"}, {{"A′", {1, 1}}, {"A″", {1, -1}}}};
  if (name == "Ci") return {{"E", "i"}, {{"Ag", {1, 1}}, {"Au", {1, -1}}}};
  if (name == "C2") return {{"E", "C2"}, {{"A", {1, 1}}, {"B", {1, -1}}}};
  if (name == "C2v") {
    return {{"E", "C2", "σv(xz)", "σv′(yz)"},
            {{"A1", {1, 1, 1, 1}}, {"A2", {1, 1, -1, -1}}, {"B1", {1, -1, 1, -1}}, {"B2", {1, -1, -1, 1}}}};
  }
  throw ConfigError("point_group", "unsupported point group '" + name + "' (supported: C1, Cs, Ci, C2, C2v)");
}

inline Eigen::Matrix3d reflection(const Eigen::Vector3d& normal) {
  return Eigen::Matrix3d::Identity() - 2.0 * normal * normal.transpose();
}

inline Eigen::Matrix3d half_turn(const Eigen::Vector3d& axis) {
  return 2.0 * axis * axis.transpose() - Eigen::Matrix3d::Identity();
}

/// Atom images under m; `missing` collects atoms without an image.
inline std::vector<std::size_t> match_atoms(const MolecularFrame& frame, const Eigen::Matrix3d& m, double tol,
                                            std::vector<std::size_t>* missing) {
  const Eigen::Vector3d com = frame.center_of_mass();
  const auto& atoms = frame.atoms();
  std::vector<std::size_t> perm(atoms.size(), atoms.size());
  std::vector<bool> taken(atoms.size(), false);
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const Eigen::Vector3d image = m * (atoms[a].position_bohr - com);
    for (std::size_t b = 0; b < atoms.size(); ++b) {
      if (taken[b] || atoms[b].element != atoms[a].element) continue;
      if (std::abs(atoms[b].mass_amu - atoms[a].mass_amu) > 1e-6) continue;
      if ((atoms[b].position_bohr - com - image).norm() <= tol) {
        perm[a] = b;
        taken[b] = true;
        break;
      }
    }
    if (perm[a] == atoms.size() && missing != nullptr) missing->push_back(a);
  }
  return perm;
}

inline std::vector<Eigen::Vector3d> candidate_axes(const MolecularFrame& frame) {
  std::vector<Eigen::Vector3d> axes{Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitX()};
  const Eigen::Vector3d com = frame.center_of_mass();
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();
  for (const auto& a : frame.atoms()) {
    const Eigen::Vector3d r = a.position_bohr - com;
    inertia += a.mass_amu * (r.squaredNorm() * Eigen::Matrix3d::Identity() - r * r.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(inertia);
  for (int k = 2; k >= 0; --k) {
    const Eigen::Vector3d v = es.eigenvectors().col(k).normalized();
    const bool dup = std::any_of(axes.begin(), axes.end(), [&](const Eigen::Vector3d& u) { return std::abs(std::abs(u.dot(v)) - 1.0) < 1e-12; });
    if (!dup) axes.push_back(v);
  }
  return axes;
}

}  // namespace detail

/// Finds the operations of the hinted group that map the geometry onto itself
/// (same element and mass, positions within `tol` bohr about the center of
/// mass). Axes of the input frame are tried first, then principal axes of
/// inertia. C2v follows C2 || z, sigma_v = xz, sigma_v' = yz in the frame
/// where the group was found.
inline PointGroup detect_operations(const MolecularFrame& frame, const std::string& hint, double tol = 1e-3) {
  const detail::GroupTemplate tpl = detail::group_template(hint);
  const auto axes = detail::candidate_axes(frame);

  std::vector<std::vector<Eigen::Matrix3d>> candidates;
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  if (hint == "C1") candidates.push_back({id});
  if (hint == "Ci") candidates.push_back({id, -id});
  if (hint == "Cs") {
    for (const auto& n : axes) candidates.push_back({id, detail::reflection(n)});
  }
  if (hint == "C2") {
    for (const auto& n : axes) candidates.push_back({id, detail::half_turn(n)});
  }
  if (hint == "C2v") {
    for (const auto& n : axes) {
      for (const auto& m : axes) {
        if (std::abs(n.dot(m)) > 1e-8) continue;
        candidates.push_back({id, detail::half_turn(n), detail::reflection(m), detail::reflection(n.cross(m).normalized())});
      }
    }
  }

  std::vector<std::size_t> first_missing;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    PointGroup g{hint, {}, tpl.table};
    std::vector<std::size_t> missing;
    for (std::size_t k = 0; k < candidates[c].size(); ++k) {
      auto perm = detail::match_atoms(frame, candidates[c][k], tol, &missing);
      g.operations.push_back({tpl.op_names[k], candidates[c][k], std::move(perm)});
    }
    if (missing.empty()) {
      g.validate();
      return g;
    }
    if (c == 0) {
      std::sort(missing.begin(), missing.end());
      missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
      first_missing = missing;
    }
  }
  std::string atoms;
  for (std::size_t a : first_missing) {
    if (!atoms.empty()) atoms += ", ";
    atoms += std::to_string(a + 1) + " (" + frame.atoms()[a].element + ")";
  }
  throw ConfigError("geometry", "geometry is not symmetric under " + hint + " within " + csv::fmt(tol) +
                                    " bohr; atoms without a symmetric image: " + atoms);
}

struct ModeIrrep {
  std::string irrep;
  std::vector<int> characters;
  std::vector<double> raw_characters;
  double confidence = 0.0;  // min over operations of |<v, O v>|
};

struct IrrepAssignment {
  std::string point_group;
  std::vector<std::string> operation_names;
  std::vector<std::string> table_order;
  std::vector<ModeIrrep> modes;

  std::vector<std::string> irreps() const {
    std::vector<std::string> out;
    for (const auto& m : modes) out.push_back(m.irrep);
    return out;
  }
};

/// Character of one mass-weighted 3N mode vector under one operation.
inline double character(const SymmetryOperation& op, const Eigen::Ref<const Vec>& v) {
  double s = 0.0;
  for (std::size_t a = 0; a < op.permutation.size(); ++a) {
    const auto src = static_cast<Eigen::Index>(3 * a);
    const auto dst = static_cast<Eigen::Index>(3 * op.permutation[a]);
    s += v.segment<3>(dst).dot(op.matrix * v.segment<3>(src));
  }
  return s;
}

/// Assigns each column of `modes` to an irrep. Characters are rounded to +-1
/// when |value| >= threshold; anything else is an error, as is a sign pattern
/// that matches no table row.
inline IrrepAssignment classify_modes(const PointGroup& group, const Mat& modes, double threshold = 0.99) {
  group.validate();
  IrrepAssignment out;
  out.point_group = group.name;
  for (const auto& op : group.operations) out.operation_names.push_back(op.name);
  for (const auto& irrep : group.table) out.table_order.push_back(irrep.name);
  if (!group.operations.empty()) {
    require_dim(modes.rows(), static_cast<Eigen::Index>(3 * group.operations.front().permutation.size()), "mode_vectors");
  }
  for (Eigen::Index j = 0; j < modes.cols(); ++j) {
    ModeIrrep m;
    m.confidence = 1e300;
    for (std::size_t k = 0; k < group.operations.size(); ++k) {
      const double value = character(group.operations[k], modes.col(j));
      m.raw_characters.push_back(value);
      m.confidence = std::min(m.confidence, std::abs(value));
      if (std::abs(value) < threshold) {
        throw NumericalError("mode " + std::to_string(j + 1) + ": character " + std::to_string(value) + " under " +
                             group.operations[k].name + " is not close to +-1 (mixed irreps or contaminated vector)");
      }
      m.characters.push_back(value > 0.0 ? 1 : -1);
    }
    const auto row = std::find_if(group.table.begin(), group.table.end(),
                                  [&](const Irrep& r) { return r.characters == m.characters; });
    if (row == group.table.end()) {
      throw NumericalError("mode " + std::to_string(j + 1) + ": character vector matches no irrep of " + group.name);
    }
    m.irrep = row->name;
    out.modes.push_back(std::move(m));
  }
  return out;
}

/// Irrep counts in character-table order, and the formatted string, e.g.
/// "9A1+5A2+5B1+8B2". Irreps with zero modes are omitted.
inline std::vector<std::pair<std::string, int>> tally_counts(const IrrepAssignment& assignment) {
  std::vector<std::pair<std::string, int>> counts;
  for (const auto& name : assignment.table_order) {
    const int n = static_cast<int>(std::count_if(assignment.modes.begin(), assignment.modes.end(),
                                                 [&](const ModeIrrep& m) { return m.irrep == name; }));
    if (n > 0) counts.emplace_back(name, n);
  }
  return counts;
}

inline std::string tally(const IrrepAssignment& assignment) {
  std::string out;
  for (const auto& [name, n] : tally_counts(assignment)) {
    if (!out.empty()) out += '+';
    out += std::to_string(n) + name;
  }
  return out;
}

inline detail::json to_json(const IrrepAssignment& a, const std::vector<std::string>& labels = {}) {
  detail::json modes = detail::json::array();
  for (std::size_t j = 0; j < a.modes.size(); ++j) {
    detail::json m{{"mode", j + 1},
                   {"irrep", a.modes[j].irrep},
                   {"characters", a.modes[j].characters},
                   {"raw_characters", a.modes[j].raw_characters},
                   {"confidence", a.modes[j].confidence}};
    if (j < labels.size()) m["label"] = labels[j];
    modes.push_back(std::move(m));
  }
  return {{"point_group", a.point_group}, {"operations", a.operation_names}, {"gamma_vib", tally(a)}, {"modes", modes}};
}

}  // namespace decoh
