#include <cstdio>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fwlab/experiment.hpp"

namespace {

std::string description(fwlab::Scenario s) {
  using fwlab::Scenario;
  switch (s) {
    case Scenario::simulate: return "Godunov run with snapshots, diagnostics and shock tracking";
    case Scenario::viscous: return "viscous runs over a list of epsilon, compared with the Godunov solution";
    case Scenario::wave_branch: return "traveling-wave branch continuation and endpoint search";
    case Scenario::wave_evolve: return "evolve a traveling-wave profile, optionally disturbed, with the orbit probe";
    case Scenario::perturb: return "disturbed traveling waves against the undisturbed orbit";
    case Scenario::threshold_scan: return "shock formation for cosine data of several amplitudes";
    case Scenario::entropy_check: return "entropy inequality on a trajectory and on its time reversal";
    case Scenario::l1_check: return "L1 stability of perturbed pairs against the Gronwall bound";
    case Scenario::phase_scan: return "phase-plane shooting for single-shock traveling waves";
  }
  return {};
}

std::string dashed(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

struct Command {
  fwlab::Scenario scenario{};
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config;
  std::string out = "out";
  unsigned jobs = 1;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fornberg-Whitham simulation laboratory"};
  app.require_subcommand(1, 1);

  std::vector<std::unique_ptr<Command>> commands;
  for (fwlab::Scenario s : fwlab::all_scenarios()) {
    auto cmd = std::make_unique<Command>();
    cmd->scenario = s;
    cmd->app = app.add_subcommand(std::string(fwlab::to_string(s)), description(s));
    cmd->app->add_option("--config", cmd->config, "key = value file; flags override it");
    cmd->app->add_option("--out", cmd->out, "output directory")->capture_default_str();
    cmd->app->add_option("--jobs", cmd->jobs, "worker threads for independent runs")->capture_default_str();
    for (const auto& def : fwlab::scenario_params(s)) {
      auto& slot = cmd->values[def.key];
      cmd->options[def.key] =
          cmd->app->add_option("--" + dashed(def.key), slot, fmt::format("{} [default: {}]", def.help, def.default_value));
    }
    commands.push_back(std::move(cmd));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fwlab::kExitUsage;
  }

  for (const auto& cmd : commands) {
    if (!cmd->app->parsed()) continue;
    fwlab::ParamMap overrides;
    for (const auto& [key, opt] : cmd->options) {
      if (opt->count() > 0) overrides[key] = cmd->values[key];
    }
    try {
      fwlab::ExperimentSpec spec = cmd->config.empty() ? fwlab::resolve_spec(cmd->scenario, {}, overrides)
                                                       : fwlab::validate_config(cmd->config, cmd->scenario, overrides);
      spec.output_dir = cmd->out;
      spec.jobs = std::max(1u, cmd->jobs);
      const fwlab::RunOutcome outcome = fwlab::run_experiment(spec);
      for (const auto& c : outcome.checks) {
        fmt::print("{} {} value={} limit={}\n", c.pass ? "PASS" : "FAIL", c.name, fwlab::format_number(c.value),
                   fwlab::format_number(c.limit));
      }
      if (!outcome.message.empty()) fmt::print(stderr, "error: {}\n", outcome.message);
      if (!outcome.manifest_path.empty()) fmt::print("manifest: {}\n", outcome.manifest_path.string());
      return outcome.exit_code;
    } catch (const fwlab::UsageError& e) {
      fmt::print(stderr, "error: {}\n", e.what());
      return fwlab::kExitUsage;
    }
  }
  return fwlab::kExitUsage;
}
