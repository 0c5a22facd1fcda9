#pragma once

// Run configuration: one JSON document shared by all subcommands. Each command
// requires only the sections it uses; unknown keys are rejected everywhere.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "decoh/coherence.hpp"
#include "decoh/detail/json_util.hpp"
#include "decoh/errors.hpp"
#include "decoh/frame.hpp"
#include "decoh/oracle.hpp"
#include "decoh/propagator.hpp"
#include "decoh/surfaces.hpp"

namespace decoh {

namespace fs = std::filesystem;

/// Reads a JSON file; parse errors are reported with line and column.
inline detail::json load_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return detail::json::parse(text);
  } catch (const detail::json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col), "JSON syntax error");
  }
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Grouping request as written in the config.
struct GroupingSpec {
  enum class Kind { by_irrep, by_label, position_momentum, subset };
  Kind kind = Kind::by_irrep;
  std::string name;                  // subset only
  std::vector<Eigen::Index> modes;   // subset: 0-based
  std::vector<std::string> labels;   // subset: alternative to modes
  std::string rest;                  // subset: name of the complement group, optional

  std::string kind_name() const {
    switch (kind) {
      case Kind::by_irrep: return "by_irrep";
      case Kind::by_label: return "by_label";
      case Kind::position_momentum: return "position_momentum";
      case Kind::subset: return "subset";
    }
    return "unknown";
  }
};

/// Expands a grouping request against the frame. Labels and irreps must exist.
inline std::vector<ModeGroup> resolve_grouping(const GroupingSpec& g, const NormalModeFrame& frame) {
  switch (g.kind) {
    case GroupingSpec::Kind::by_irrep: return group_by_irrep(frame);
    case GroupingSpec::Kind::by_label: return group_by_label(frame);
    case GroupingSpec::Kind::position_momentum: return group_position_momentum(frame.dim());
    case GroupingSpec::Kind::subset: {
      std::vector<Eigen::Index> modes = g.modes;
      for (const auto& label : g.labels) {
        bool found = false;
        for (Eigen::Index j = 0; j < frame.dim(); ++j) {
          if (frame.labels()[static_cast<std::size_t>(j)] == label) {
            modes.push_back(j);
            found = true;
          }
        }
        if (!found) throw ConfigError("analysis.groupings." + g.name, "unknown mode label '" + label + "'");
      }
      for (Eigen::Index j : modes) {
        if (j < 0 || j >= frame.dim()) {
          throw ConfigError("analysis.groupings." + g.name, "unknown mode " + std::to_string(j + 1));
        }
      }
      return group_subset(frame.dim(), g.name, std::move(modes), g.rest);
    }
  }
  return {};
}

struct SymmetrySettings {
  std::string point_group = "C1";
  double tolerance_bohr = 1e-3;
  double character_threshold = 0.99;
};

struct OracleSettings {
  std::string state_i;
  std::string state_j;
  oracle::GridSpec grid;
};

struct RunConfig {
  fs::path source;   // config file, for resolving relative paths
  std::string text;  // raw bytes, hashed into the manifest
  std::optional<NormalModeFrame> frame;
  std::vector<ElectronicState> states;
  PropagationConfig propagation;
  bool explicit_reference = false;

  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<GroupingSpec> groupings;
  std::optional<ObservableMatrix> observable;

  std::optional<SymmetrySettings> symmetry;
  std::optional<OracleSettings> oracle;
  std::vector<fs::path> traces;  // decompose inputs

  const NormalModeFrame& require_frame() const {
    if (!frame) throw ConfigError("system", "missing required key");
    return *frame;
  }

  const ElectronicState& state(const std::string& id) const {
    for (const auto& s : states) {
      if (s.id == id) return s;
    }
    throw ConfigError("states", "unknown state id '" + id + "'");
  }

  /// Defaults to every pair I < J in state order.
  std::vector<std::pair<std::string, std::string>> effective_pairs() const {
    if (!pairs.empty()) return pairs;
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < states.size(); ++i) {
      for (std::size_t j = i + 1; j < states.size(); ++j) out.emplace_back(states[i].id, states[j].id);
    }
    return out;
  }
};

namespace detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base.parent_path() / path;
}

inline PropagationConfig parse_propagation(const json& j, bool& explicit_reference) {
  reject_unknown_keys(j, "propagation", {"dt_fs", "n_steps", "variant", "reference_hessian", "splitting"});
  PropagationConfig c;
  if (j.contains("dt_fs")) c.dt_fs = get_number(j["dt_fs"], "propagation.dt_fs");
  if (j.contains("n_steps")) c.n_steps = get_integer(j["n_steps"], "propagation.n_steps");
  if (j.contains("variant")) {
    const std::string v = get_string(j["variant"], "propagation.variant");
    if (v == "thawed") c.variant = Variant::thawed;
    else if (v == "frozen") c.variant = Variant::frozen;
    else throw ConfigError("propagation.variant", "expected 'thawed' or 'frozen', got '" + v + "'");
  }
  if (j.contains("splitting")) {
    const std::string s = get_string(j["splitting"], "propagation.splitting");
    if (s == "harmonic_reference") c.splitting = Splitting::harmonic_reference;
    else if (s == "kinetic_potential") c.splitting = Splitting::kinetic_potential;
    else throw ConfigError("propagation.splitting", "expected 'harmonic_reference' or 'kinetic_potential', got '" + s + "'");
  }
  if (j.contains("reference_hessian")) {
    const std::string r = get_string(j["reference_hessian"], "propagation.reference_hessian");
    if (r == "fc") explicit_reference = false;
    else if (r == "explicit") explicit_reference = true;
    else throw ConfigError("propagation.reference_hessian", "expected 'fc' or 'explicit', got '" + r + "'");
  }
  c.validate();
  return c;
}

inline GroupingSpec parse_grouping(const json& j, const std::string& path) {
  require_object(j, path);
  GroupingSpec g;
  const std::string type = get_string(require_key(j, path, "type"), path + ".type");
  if (type == "by_irrep" || type == "by_label" || type == "position_momentum") {
    reject_unknown_keys(j, path, {"type"});
    g.kind = type == "by_irrep" ? GroupingSpec::Kind::by_irrep
             : type == "by_label" ? GroupingSpec::Kind::by_label
                                  : GroupingSpec::Kind::position_momentum;
    return g;
  }
  if (type != "subset") throw ConfigError(path + ".type", "unknown grouping type '" + type + "'");
  reject_unknown_keys(j, path, {"type", "name", "modes", "labels", "rest"});
  g.kind = GroupingSpec::Kind::subset;
  g.name = get_string(require_key(j, path, "name"), path + ".name");
  if (j.contains("modes")) {
    const auto& m = j["modes"];
    if (!m.is_array()) throw ConfigError(path + ".modes", "expected an array of 1-based mode numbers");
    for (std::size_t k = 0; k < m.size(); ++k) {
      const long idx = get_integer(m[k], index_path(path + ".modes", k));
      if (idx < 1) throw ConfigError(index_path(path + ".modes", k), "mode numbers are 1-based");
      g.modes.push_back(idx - 1);
    }
  }
  if (j.contains("labels")) {
    const auto& l = j["labels"];
    if (!l.is_array()) throw ConfigError(path + ".labels", "expected an array of strings");
    for (std::size_t k = 0; k < l.size(); ++k) g.labels.push_back(get_string(l[k], index_path(path + ".labels", k)));
  }
  if (g.modes.empty() && g.labels.empty()) throw ConfigError(path, "subset needs 'modes' or 'labels'");
  if (j.contains("rest")) g.rest = get_string(j["rest"], path + ".rest");
  return g;
}

inline oracle::GridSpec parse_grid(const json& j, const std::string& path) {
  reject_unknown_keys(j, path, {"axes", "dt_fs", "n_steps", "output_every"});
  oracle::GridSpec g;
  const auto& axes = require_key(j, path, "axes");
  if (!axes.is_array()) throw ConfigError(path + ".axes", "expected an array");
  for (std::size_t k = 0; k < axes.size(); ++k) {
    const std::string ap = index_path(path + ".axes", k);
    reject_unknown_keys(axes[k], ap, {"min", "max", "points"});
    oracle::GridAxis a;
    a.min = get_number(require_key(axes[k], ap, "min"), ap + ".min");
    a.max = get_number(require_key(axes[k], ap, "max"), ap + ".max");
    const long pts = get_integer(require_key(axes[k], ap, "points"), ap + ".points");
    if (pts < 2) throw ConfigError(ap + ".points", "at least two points are required");
    a.points = static_cast<std::size_t>(pts);
    g.axes.push_back(a);
  }
  if (j.contains("dt_fs")) g.dt_fs = get_number(j["dt_fs"], path + ".dt_fs");
  if (j.contains("n_steps")) g.n_steps = get_integer(j["n_steps"], path + ".n_steps");
  if (j.contains("output_every")) g.output_every = get_integer(j["output_every"], path + ".output_every");
  return g;
}

/// Applies the "irrep" field of an assignment file written by `classify`.
inline NormalModeFrame apply_irreps_file(const NormalModeFrame& frame, const fs::path& path) {
  const json j = load_json_file(path);
  const std::string p = path.string();
  require_object(j, p);
  const auto& modes = require_key(j, p, "modes");
  if (!modes.is_array()) throw ConfigError(p + ".modes", "expected an array");
  require_dim(static_cast<Eigen::Index>(modes.size()), frame.dim(), p + ".modes");
  std::vector<std::string> irreps;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const std::string mp = index_path(p + ".modes", m);
    irreps.push_back(canonical_irrep_name(get_string(require_key(modes[m], mp, "irrep"), mp + ".irrep")));
  }
  return frame.with_irreps(std::move(irreps));
}

}  // namespace detail

inline RunConfig parse_run_config(const detail::json& j, const fs::path& source) {
  using namespace detail;
  reject_unknown_keys(j, "", {"description", "system", "irreps_file", "states", "surfaces", "reference_hessians",
                              "propagation", "analysis", "symmetry", "oracle", "decompose"});
  RunConfig cfg;
  cfg.source = source;

  if (j.contains("system")) {
    const auto& s = j["system"];
    if (s.is_string()) cfg.frame = system_from_json(load_json_file(resolve(source, s.get<std::string>())));
    else cfg.frame = system_from_json(s);
  }
  if (j.contains("irreps_file")) {
    const NormalModeFrame& f = cfg.require_frame();
    cfg.frame = apply_irreps_file(f, resolve(source, get_string(j["irreps_file"], "irreps_file")));
  }

  if (j.contains("propagation")) cfg.propagation = parse_propagation(j["propagation"], cfg.explicit_reference);

  if (j.contains("states")) {
    const NormalModeFrame& frame = cfg.require_frame();
    const auto& states = j["states"];
    if (!states.is_array() || states.empty()) throw ConfigError("states", "expected a non-empty array");
    const json empty = json::object();
    const json& surfaces = j.contains("surfaces") ? j["surfaces"] : empty;
    require_object(surfaces, "surfaces");
    const json& hessians = j.contains("reference_hessians") ? j["reference_hessians"] : empty;
    require_object(hessians, "reference_hessians");
    for (std::size_t k = 0; k < states.size(); ++k) {
      const std::string sp = index_path("states", k);
      reject_unknown_keys(states[k], sp, {"id", "amplitude"});
      ElectronicState st;
      st.id = get_string(require_key(states[k], sp, "id"), sp + ".id");
      st.amplitude = get_complex(require_key(states[k], sp, "amplitude"), sp + ".amplitude");
      if (!surfaces.contains(st.id)) throw ConfigError("surfaces." + st.id, "no surface given for state '" + st.id + "'");
      st.surface = surface_from_json(surfaces[st.id], "surfaces." + st.id, frame.dim());
      if (cfg.explicit_reference) {
        if (!hessians.contains(st.id)) {
          throw ConfigError("reference_hessians." + st.id, "explicit reference Hessian missing for state '" + st.id + "'");
        }
        const Mat h = get_matrix(hessians[st.id], "reference_hessians." + st.id);
        require_dim(h.rows(), frame.dim(), "reference_hessians." + st.id);
        require_dim(h.cols(), frame.dim(), "reference_hessians." + st.id);
        st.reference_hessian = h;
      }
      cfg.states.push_back(std::move(st));
    }
    for (const auto& [key, value] : surfaces.items()) {
      bool used = false;
      for (const auto& s : cfg.states) used = used || s.id == key;
      if (!used) throw ConfigError("surfaces." + key, "surface for a state that is not listed in 'states'");
    }
    if (!cfg.explicit_reference && !hessians.empty()) {
      throw ConfigError("reference_hessians", "given but propagation.reference_hessian is not 'explicit'");
    }
    prepare_initial(frame, cfg.states);  // amplitude and id checks
  } else if (j.contains("surfaces")) {
    throw ConfigError("states", "surfaces given without a 'states' list");
  }

  if (j.contains("analysis")) {
    const auto& a = j["analysis"];
    reject_unknown_keys(a, "analysis", {"pairs", "groupings", "observable"});
    if (a.contains("pairs")) {
      const auto& pairs = a["pairs"];
      if (!pairs.is_array()) throw ConfigError("analysis.pairs", "expected an array of [I, J] id pairs");
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const std::string pp = index_path("analysis.pairs", k);
        if (!pairs[k].is_array() || pairs[k].size() != 2) throw ConfigError(pp, "expected [I, J]");
        const std::string si = get_string(pairs[k][0], pp + "[0]");
        const std::string sj = get_string(pairs[k][1], pp + "[1]");
        cfg.state(si);
        cfg.state(sj);
        if (si == sj) throw ConfigError(pp, "a pair needs two different states");
        cfg.pairs.emplace_back(si, sj);
      }
    }
    if (a.contains("groupings")) {
      const auto& g = a["groupings"];
      if (!g.is_array()) throw ConfigError("analysis.groupings", "expected an array");
      for (std::size_t k = 0; k < g.size(); ++k) {
        cfg.groupings.push_back(parse_grouping(g[k], index_path("analysis.groupings", k)));
        if (cfg.frame) resolve_grouping(cfg.groupings.back(), *cfg.frame);  // early validation
      }
    }
    if (a.contains("observable")) {
      const auto& o = a["observable"];
      reject_unknown_keys(o, "analysis.observable", {"states", "matrix"});
      ObservableMatrix obs;
      const auto& ids = require_key(o, "analysis.observable", "states");
      if (!ids.is_array()) throw ConfigError("analysis.observable.states", "expected an array of state ids");
      for (std::size_t k = 0; k < ids.size(); ++k) {
        obs.ids.push_back(get_string(ids[k], index_path("analysis.observable.states", k)));
        cfg.state(obs.ids.back());
      }
      obs.values = get_cmatrix(require_key(o, "analysis.observable", "matrix"), "analysis.observable.matrix");
      obs.validate();
      cfg.observable = std::move(obs);
    }
  }

  if (j.contains("symmetry")) {
    const auto& s = j["symmetry"];
    reject_unknown_keys(s, "symmetry", {"point_group", "tolerance_bohr", "character_threshold"});
    SymmetrySettings set;
    set.point_group = get_string(require_key(s, "symmetry", "point_group"), "symmetry.point_group");
    if (s.contains("tolerance_bohr")) set.tolerance_bohr = get_number(s["tolerance_bohr"], "symmetry.tolerance_bohr");
    if (s.contains("character_threshold")) {
      set.character_threshold = get_number(s["character_threshold"], "symmetry.character_threshold");
    }
    if (!(set.tolerance_bohr > 0.0)) throw ConfigError("symmetry.tolerance_bohr", "must be positive");
    if (!(set.character_threshold > 0.0 && set.character_threshold <= 1.0)) {
      throw ConfigError("symmetry.character_threshold", "must lie in (0, 1]");
    }
    cfg.symmetry = set;
  }

  if (j.contains("oracle")) {
    const auto& o = j["oracle"];
    reject_unknown_keys(o, "oracle", {"pair", "grid"});
    OracleSettings set;
    if (o.contains("pair")) {
      const auto& p = o["pair"];
      if (!p.is_array() || p.size() != 2) throw ConfigError("oracle.pair", "expected [I, J]");
      set.state_i = get_string(p[0], "oracle.pair[0]");
      set.state_j = get_string(p[1], "oracle.pair[1]");
    } else {
      if (cfg.states.size() < 2) throw ConfigError("oracle.pair", "needs two states");
      set.state_i = cfg.states[0].id;
      set.state_j = cfg.states[1].id;
    }
    cfg.state(set.state_i);
    cfg.state(set.state_j);
    set.grid = parse_grid(require_key(o, "oracle", "grid"), "oracle.grid");
    cfg.oracle = std::move(set);
  }

  if (j.contains("decompose")) {
    const auto& d = j["decompose"];
    reject_unknown_keys(d, "decompose", {"traces"});
    const auto& t = require_key(d, "decompose", "traces");
    if (!t.is_array() || t.empty()) throw ConfigError("decompose.traces", "expected a non-empty array of CSV paths");
    for (std::size_t k = 0; k < t.size(); ++k) {
      cfg.traces.push_back(resolve(source, get_string(t[k], index_path("decompose.traces", k))));
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const fs::path& path) {
  RunConfig cfg = parse_run_config(load_json_file(path), path);
  cfg.text = read_text(path);
  return cfg;
}

}  // namespace decoh
