#pragma once

// Subcommand implementations behind the `decoh` executable. Each returns the
// list of files it wrote; errors propagate as ConfigError / NumericalError.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "decoh/coherence.hpp"
#include "decoh/config.hpp"
#include "decoh/csv.hpp"
#include "decoh/oracle.hpp"
#include "decoh/propagator.hpp"
#include "decoh/symmetry.hpp"
#include "decoh/version.hpp"

namespace decoh {

struct CommandOptions {
  fs::path config;
  fs::path out;
  std::optional<double> dt_fs;
  std::optional<long> steps;
  std::optional<std::string> variant;
  unsigned threads = default_thread_count();
};

struct CommandResult {
  std::vector<std::string> outputs;  // file names relative to the output directory
  std::string summary;               // one line for stdout
};

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Restricts to [A-Za-z0-9_-]; anything else becomes '_'.
inline std::string file_token(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    out += ok ? static_cast<char>(c) : '_';
  }
  return out.empty() ? "_" : out;
}

/// Commas would break the CSV header.
inline std::string column_token(std::string s) {
  for (auto& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

namespace detail {

class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw ConfigError("--out", "cannot create output directory: " + ec.message());
  }

  std::ofstream open(const std::string& name) {
    std::ofstream os(root_ / name, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("--out", "cannot write " + (root_ / name).string());
    written_.push_back(name);
    return os;
  }

  const std::vector<std::string>& written() const noexcept { return written_; }
  const fs::path& root() const noexcept { return root_; }

 private:
  fs::path root_;
  std::vector<std::string> written_;
};

inline void apply_overrides(RunConfig& cfg, const CommandOptions& opt) {
  if (opt.dt_fs) cfg.propagation.dt_fs = *opt.dt_fs;
  if (opt.steps) cfg.propagation.n_steps = *opt.steps;
  if (opt.variant) {
    if (*opt.variant == "thawed") cfg.propagation.variant = Variant::thawed;
    else if (*opt.variant == "frozen") cfg.propagation.variant = Variant::frozen;
    else throw ConfigError("--variant", "expected 'thawed' or 'frozen', got '" + *opt.variant + "'");
  }
  try {
    cfg.propagation.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("propagation", e.what());
  }
}

inline void write_trajectory_csv(std::ostream& os, const StateTrajectory& t) {
  const auto d = t.snapshots.empty() ? 0 : t.snapshots.front().dim();
  std::vector<std::string> header{"t_fs", "potential", "kinetic", "norm", "re_gamma", "im_gamma"};
  for (Eigen::Index j = 1; j <= d; ++j) header.push_back("R_" + std::to_string(j));
  for (Eigen::Index j = 1; j <= d; ++j) header.push_back("P_" + std::to_string(j));
  os << csv::join(header) << '\n';
  for (std::size_t k = 0; k < t.snapshots.size(); ++k) {
    const auto& wp = t.snapshots[k];
    std::vector<std::string> row{csv::fmt(t.times_fs[k]), csv::fmt(t.potential[k]),  csv::fmt(t.kinetic[k]),
                                 csv::fmt(norm(wp)),      csv::fmt(wp.gamma.real()), csv::fmt(wp.gamma.imag())};
    for (Eigen::Index j = 0; j < d; ++j) row.push_back(csv::fmt(wp.position(j)));
    for (Eigen::Index j = 0; j < d; ++j) row.push_back(csv::fmt(wp.momentum(j)));
    os << csv::join(row) << '\n';
  }
}

/// Thawed runs use the exact overlap; frozen runs the analytic expression,
/// which coincides with the overlap there.
inline CoherenceTrace pair_trace(const TrajectoryRecord& record, const std::string& i, const std::string& j) {
  const auto& ti = record.state(i);
  const auto& tj = record.state(j);
  return record.variant == Variant::frozen ? analytic_coherence(ti, tj) : overlap_trace(ti, tj);
}

/// True when the group counts every mode's position and momentum once.
inline bool covers_everything(const ModeGroup& g, Eigen::Index d) {
  if (!g.position || !g.momentum || static_cast<Eigen::Index>(g.modes.size()) != d) return false;
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  for (Eigen::Index j : g.modes) {
    if (j < 0 || j >= d || seen[static_cast<std::size_t>(j)]) return false;
    seen[static_cast<std::size_t>(j)] = true;
  }
  return true;
}

/// Writes one grouped file; a group covering all modes reuses the total's
/// text so that it is byte-identical to the input column.
inline GroupedTrace grouped_output(OutputDir& dir, const std::string& name, const CoherenceTrace& trace,
                                   const std::vector<ModeGroup>& groups, const std::vector<std::string>& totals) {
  GroupedTrace g = aggregate(trace, groups);
  auto os = dir.open(name);
  std::vector<std::string> header{"t_fs", "d2_total"};
  for (const auto& n : g.names) {
    header.push_back("d2_" + column_token(n));
    header.push_back("coh_" + column_token(n));
  }
  os << csv::join(header) << '\n';
  const Mat f = g.coherence_factor();
  for (Eigen::Index k = 0; k < g.d2.rows(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    std::vector<std::string> row{csv::fmt(g.times_fs[ks]), totals[ks]};
    for (std::size_t c = 0; c < groups.size(); ++c) {
      const auto cc = static_cast<Eigen::Index>(c);
      const bool whole = covers_everything(groups[c], trace.modes());
      row.push_back(whole ? totals[ks] : csv::fmt(g.d2(k, cc)));
      row.push_back(csv::fmt(f(k, cc)));
    }
    os << csv::join(row) << '\n';
  }
  return g;
}

inline std::string grouping_token(const GroupingSpec& g) {
  return g.kind == GroupingSpec::Kind::subset ? "subset_" + file_token(g.name) : g.kind_name();
}

inline void write_manifest(OutputDir& dir, const std::string& command, const RunConfig& cfg, const CommandOptions& opt,
                           double wall_s, const json& extra = json::object()) {
  json overrides = json::object();
  if (opt.dt_fs) overrides["dt_fs"] = *opt.dt_fs;
  if (opt.steps) overrides["steps"] = *opt.steps;
  if (opt.variant) overrides["variant"] = *opt.variant;
  json m{{"tool", "decoh"},
         {"version", kVersion},
         {"command", command},
         {"config", opt.config.string()},
         {"config_fnv1a64", hex64(fnv1a64(cfg.text))},
         {"overrides", overrides},
         {"threads", opt.threads},
         {"wall_time_s", wall_s},
         {"outputs", dir.written()}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  std::ofstream os(dir.root() / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("--out", "cannot write manifest.json");
  os << m.dump(2) << '\n';
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Column lookup for per-mode trace columns; D is inferred from the header.
inline CoherenceTrace trace_from_csv(const csv::Table& t, const std::string& name, std::vector<std::string>& totals) {
  for (const char* c : {"t_fs", "re_coh", "im_coh", "d2_total"}) t.column(c);
  Eigen::Index d = 0;
  while (t.has_column("d2_pos_" + std::to_string(d + 1)) && t.has_column("d2_mom_" + std::to_string(d + 1))) ++d;
  if (d == 0) throw ConfigError(name, "trace has no per-mode d2_pos_<j>/d2_mom_<j> columns");
  const auto ct = t.column("t_fs");
  const auto cre = t.column("re_coh");
  const auto cim = t.column("im_coh");
  const auto ctot = t.column("d2_total");
  std::vector<std::size_t> cpos;
  std::vector<std::size_t> cmom;
  for (Eigen::Index j = 1; j <= d; ++j) {
    cpos.push_back(t.column("d2_pos_" + std::to_string(j)));
    cmom.push_back(t.column("d2_mom_" + std::to_string(j)));
  }
  CoherenceTrace trace;
  trace.state_i = name;
  totals.clear();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    CoherencePoint pt;
    pt.t_fs = t.number(r, ct);
    pt.chi = {t.number(r, cre), t.number(r, cim)};
    pt.d2_position_modes.resize(d);
    pt.d2_momentum_modes.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      pt.d2_position_modes(j) = t.number(r, cpos[static_cast<std::size_t>(j)]);
      pt.d2_momentum_modes(j) = t.number(r, cmom[static_cast<std::size_t>(j)]);
    }
    pt.d2_position = pt.d2_position_modes.sum();
    pt.d2_momentum = pt.d2_momentum_modes.sum();
    pt.d2_total = t.number(r, ctot);
    // Each cell carries 12 significant digits, so the re-summed total can only
    // be held to that precision.
    const double resum = pt.d2_position + pt.d2_momentum;
    if (std::abs(resum - pt.d2_total) > 1e-10 * std::max(1.0, pt.d2_total)) {
      throw NumericalError(name + ": row " + std::to_string(r + 1) + ": per-mode d2 columns sum to " + csv::fmt(resum) +
                           ", d2_total is " + csv::fmt(pt.d2_total));
    }
    totals.push_back(t.rows[r][ctot]);
    trace.points.push_back(std::move(pt));
  }
  return trace;
}

}  // namespace detail

inline CommandResult cmd_propagate(const CommandOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = load_run_config(opt.config);
  detail::apply_overrides(cfg, opt);
  const NormalModeFrame& frame = cfg.require_frame();
  if (cfg.states.empty()) throw ConfigError("states", "missing required key");

  const StateSet set = prepare_initial(frame, cfg.states);
  const TrajectoryRecord record = propagate(frame, set, cfg.propagation, opt.threads);

  detail::OutputDir dir(opt.out);
  for (const auto& t : record.states) {
    auto os = dir.open("trajectory_" + file_token(t.id) + ".csv");
    detail::write_trajectory_csv(os, t);
  }

  std::vector<CoherenceTrace> traces;
  for (const auto& [i, j] : cfg.effective_pairs()) {
    traces.push_back(detail::pair_trace(record, i, j));
    const std::string stem = file_token(i) + "_" + file_token(j);
    {
      auto os = dir.open("coherence_" + stem + ".csv");
      write_coherence_csv(os, traces.back());
    }
    std::vector<std::string> totals;
    for (const auto& pt : traces.back().points) totals.push_back(csv::fmt(pt.d2_total));
    for (const auto& g : cfg.groupings) {
      detail::grouped_output(dir, "grouped_" + stem + "_" + detail::grouping_token(g) + ".csv", traces.back(),
                             resolve_grouping(g, frame), totals);
    }
  }

  if (cfg.observable) {
    const auto values = expectation_trace(record, traces, *cfg.observable);
    auto os = dir.open("expectation.csv");
    os << "t_fs,expectation\n";
    const auto& times = record.state(cfg.observable->ids.front()).times_fs;
    for (std::size_t k = 0; k < values.size(); ++k) os << csv::fmt(times[k]) << ',' << csv::fmt(values[k]) << '\n';
  }

  {
    detail::json finals = detail::json::object();
    for (const auto& t : record.states) finals[t.id] = to_json(t.snapshots.back());
    auto os = dir.open("final_wavepackets.json");
    os << finals.dump(2) << '\n';
  }

  const double wall = detail::seconds_since(t0);
  detail::write_manifest(dir, "propagate", cfg, opt, wall,
                         {{"variant", to_string(cfg.propagation.variant)},
                          {"splitting", to_string(cfg.propagation.splitting)},
                          {"dt_fs", cfg.propagation.dt_fs},
                          {"n_steps", cfg.propagation.n_steps}});
  return {dir.written(), "propagated " + std::to_string(record.states.size()) + " states, " +
                             std::to_string(traces.size()) + " coherence traces"};
}

inline CommandResult cmd_decompose(const CommandOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = load_run_config(opt.config);
  if (cfg.traces.empty()) throw ConfigError("decompose.traces", "missing required key");
  if (cfg.groupings.empty()) throw ConfigError("analysis.groupings", "decompose needs at least one grouping");

  detail::OutputDir dir(opt.out);
  for (const auto& path : cfg.traces) {
    std::vector<std::string> totals;
    const CoherenceTrace trace = detail::trace_from_csv(csv::read(path.string()), path.string(), totals);
    const auto d = trace.modes();
    std::optional<NormalModeFrame> own;
    if (!cfg.frame) own.emplace(Vec::Ones(d));
    const NormalModeFrame& frame = cfg.frame ? *cfg.frame : *own;
    require_dim(d, frame.dim(), path.string());
    for (const auto& g : cfg.groupings) {
      const std::string name = "decomposed_" + file_token(path.stem().string()) + "_" + detail::grouping_token(g) + ".csv";
      detail::grouped_output(dir, name, trace, resolve_grouping(g, frame), totals);
    }
  }
  detail::write_manifest(dir, "decompose", cfg, opt, detail::seconds_since(t0));
  return {dir.written(), "decomposed " + std::to_string(cfg.traces.size()) + " traces"};
}

inline CommandResult cmd_classify(const CommandOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = load_run_config(opt.config);
  const NormalModeFrame& frame = cfg.require_frame();
  if (!frame.geometry()) throw ConfigError("geometry", "classification needs atoms");
  const SymmetrySettings sym = cfg.symmetry.value_or(SymmetrySettings{});

  const PointGroup group = detect_operations(*frame.geometry(), sym.point_group, sym.tolerance_bohr);
  if (!frame.mode_vectors()) throw ConfigError("geometry.mode_vectors", "classification needs mode vectors");
  const IrrepAssignment assignment = classify_modes(group, *frame.mode_vectors(), sym.character_threshold);
  const std::string gamma = tally(assignment);

  detail::OutputDir dir(opt.out);
  {
    auto os = dir.open("irreps.json");
    os << to_json(assignment, frame.labels()).dump(2) << '\n';
  }
  {
    auto os = dir.open("gamma_vib.txt");
    os << gamma << '\n';
  }
  detail::write_manifest(dir, "classify", cfg, opt, detail::seconds_since(t0),
                         {{"point_group", assignment.point_group}, {"gamma_vib", gamma}});
  return {dir.written(), "Gamma_vib = " + gamma};
}

struct OracleReport {
  std::size_t compared = 0;
  double max_modulus_deviation = 0.0;
  double max_phase_deviation = 0.0;
  double max_norm_drift = 0.0;
};

/// Grid trace in the coherence CSV schema; d^2 from the grid's <R>, <P>.
inline CoherenceTrace grid_trace(const std::vector<oracle::GridSample>& samples, const std::string& i, const std::string& j) {
  CoherenceTrace trace{i, j, CoherenceMethod::grid, {}};
  for (const auto& s : samples) {
    CoherencePoint pt = separation(s.t_fs, s.mean_position_i, s.mean_momentum_i, s.mean_position_j, s.mean_momentum_j);
    pt.chi = s.chi;
    trace.points.push_back(std::move(pt));
  }
  return trace;
}

/// Compares at the grid sample times that coincide with TGA steps. The phase
/// deviation is taken only where both moduli exceed 1e-6.
inline OracleReport compare_traces(const CoherenceTrace& grid, const std::vector<oracle::GridSample>& samples,
                                   const CoherenceTrace& tga, double tga_dt_fs) {
  OracleReport r;
  for (std::size_t s = 0; s < grid.points.size(); ++s) {
    const double t = grid.points[s].t_fs;
    const double steps = t / tga_dt_fs;
    const double k = std::round(steps);
    r.max_norm_drift = std::max({r.max_norm_drift, std::abs(samples[s].norm_i - samples.front().norm_i),
                                 std::abs(samples[s].norm_j - samples.front().norm_j)});
    if (std::abs(steps - k) > 1e-9 || k < 0 || static_cast<std::size_t>(k) >= tga.points.size()) continue;
    const cplx a = grid.points[s].chi;
    const cplx b = tga.points[static_cast<std::size_t>(k)].chi;
    r.max_modulus_deviation = std::max(r.max_modulus_deviation, std::abs(std::abs(a) - std::abs(b)));
    if (std::abs(a) > 1e-6 && std::abs(b) > 1e-6) {
      r.max_phase_deviation = std::max(r.max_phase_deviation, std::abs(wrap_angle(std::arg(a) - std::arg(b))));
    }
    ++r.compared;
  }
  return r;
}

inline CommandResult cmd_oracle(const CommandOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = load_run_config(opt.config);
  detail::apply_overrides(cfg, opt);
  const NormalModeFrame& frame = cfg.require_frame();
  if (frame.dim() > 2) {
    throw ConfigError("system.modes", "the grid oracle supports at most 2 modes (got " + std::to_string(frame.dim()) +
                                          "); grid size grows exponentially with dimension");
  }
  if (!cfg.oracle) throw ConfigError("oracle", "missing required key");
  const OracleSettings& o = *cfg.oracle;
  o.grid.validate();
  require_dim(static_cast<Eigen::Index>(o.grid.dim()), frame.dim(), "oracle.grid.axes");

  const ElectronicState& si = cfg.state(o.state_i);
  const ElectronicState& sj = cfg.state(o.state_j);
  const GaussianWavepacket wp0 = ground_state(frame.dim(), 1.0);
  const auto samples = oracle::grid_propagate(si.surface, sj.surface, frame.omega(), wp0, o.grid, si.amplitude, sj.amplitude);
  const CoherenceTrace grid = grid_trace(samples, o.state_i, o.state_j);

  // TGA over the same span at the configured step.
  PropagationConfig pc = cfg.propagation;
  const double span = static_cast<double>(o.grid.n_steps) * o.grid.dt_fs;
  pc.n_steps = std::max<long>(1, static_cast<long>(std::ceil(span / pc.dt_fs - 1e-9)));
  const StateSet set = prepare_initial(frame, {si, sj});
  const TrajectoryRecord record = propagate(frame, set, pc, opt.threads);
  const CoherenceTrace tga = detail::pair_trace(record, o.state_i, o.state_j);

  const OracleReport rep = compare_traces(grid, samples, tga, pc.dt_fs);
  if (rep.compared == 0) throw ConfigError("oracle.grid", "no grid sample time coincides with a TGA step");
  if (rep.max_norm_drift > 1e-10 * std::max(1.0, static_cast<double>(o.grid.n_steps) / 100.0)) {
    throw NumericalError("grid norm drifted by " + csv::fmt(rep.max_norm_drift));
  }

  detail::OutputDir dir(opt.out);
  const std::string stem = file_token(o.state_i) + "_" + file_token(o.state_j);
  {
    auto os = dir.open("coherence_grid_" + stem + ".csv");
    write_coherence_csv(os, grid);
  }
  {
    auto os = dir.open("coherence_tga_" + stem + ".csv");
    write_coherence_csv(os, tga);
  }
  detail::json report{{"pair", {o.state_i, o.state_j}},
                      {"method", to_string(CoherenceMethod::grid)},
                      {"tga_variant", to_string(pc.variant)},
                      {"tga_dt_fs", pc.dt_fs},
                      {"grid_dt_fs", o.grid.dt_fs},
                      {"samples_compared", rep.compared},
                      {"max_abs_coh_deviation", rep.max_modulus_deviation},
                      {"max_phase_deviation_rad", rep.max_phase_deviation},
                      {"max_grid_norm_drift", rep.max_norm_drift}};
  {
    auto os = dir.open("oracle_report.json");
    os << report.dump(2) << '\n';
  }
  detail::write_manifest(dir, "oracle", cfg, opt, detail::seconds_since(t0));
  return {dir.written(), "max |d abs_coh| = " + csv::fmt(rep.max_modulus_deviation) +
                             ", max phase deviation = " + csv::fmt(rep.max_phase_deviation) + " rad"};
}

}  // namespace decoh
