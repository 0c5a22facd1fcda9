// decoh: command-line front end.
//
//   decoh propagate|decompose|classify|oracle --config <file> --out <dir>
//         [--dt-fs <fs>] [--steps <n>] [--variant thawed|frozen]
//
// Exit status 0 on success, 2 on configuration errors, 3 on numerical
// failures. Errors are also written to stderr as one JSON object per line.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <string>

#include "decoh/commands.hpp"
#include "decoh/version.hpp"

namespace {

int report(const char* kind, const std::string& field, const std::string& message, int status) {
  nlohmann::json rec{{"error", kind}, {"message", message}, {"exit_status", status}};
  if (!field.empty()) rec["field"] = field;
  std::cerr << rec.dump() << '\n';
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian wavepacket decoherence simulator"};
  app.set_version_flag("--version", std::string("decoh ") + decoh::kVersion);
  app.require_subcommand(1);

  decoh::CommandOptions opt;
  double dt_fs = 0.0;
  long steps = 0;
  std::string variant;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "run configuration (JSON)")->required();
    sub->add_option("--out", opt.out, "output directory")->required();
  };
  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--dt-fs", dt_fs, "override propagation.dt_fs");
    sub->add_option("--steps", steps, "override propagation.n_steps");
    sub->add_option("--variant", variant, "override propagation.variant")->check(CLI::IsMember({"thawed", "frozen"}));
  };

  auto* propagate = app.add_subcommand("propagate", "propagate all states and write coherence traces");
  auto* decompose = app.add_subcommand("decompose", "group per-mode d^2 columns of existing traces");
  auto* classify = app.add_subcommand("classify", "assign irreps to normal modes from the geometry");
  auto* oracle = app.add_subcommand("oracle", "compare TGA against exact grid propagation (1 or 2 modes)");
  for (auto* sub : {propagate, decompose, classify, oracle}) add_common(sub);
  add_overrides(propagate);
  add_overrides(oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return report("usage", "", e.what(), 2);
  }

  for (auto* sub : {propagate, oracle}) {
    if (!sub->parsed()) continue;
    if (sub->count("--dt-fs") > 0) opt.dt_fs = dt_fs;
    if (sub->count("--steps") > 0) opt.steps = steps;
    if (sub->count("--variant") > 0) opt.variant = variant;
  }

  try {
    decoh::CommandResult result;
    if (propagate->parsed()) result = decoh::cmd_propagate(opt);
    else if (decompose->parsed()) result = decoh::cmd_decompose(opt);
    else if (classify->parsed()) result = decoh::cmd_classify(opt);
    else result = decoh::cmd_oracle(opt);
    std::cout << result.summary << '\n';
    for (const auto& f : result.outputs) std::cout << "  " << (opt.out / f).string() << '\n';
    return 0;
  } catch (const decoh::ConfigError& e) {
    return report("config", e.field(), e.what(), 2);
  } catch (const decoh::NumericalError& e) {
    return report("numerical", "", e.what(), 3);
  } catch (const nlohmann::json::exception& e) {
    return report("config", "", e.what(), 2);
  } catch (const std::exception& e) {
    return report("internal", "", e.what(), 1);
  }
}
