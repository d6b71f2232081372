#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fwlab {

enum class Scenario {
  simulate,
  viscous,
  wave_branch,
  wave_evolve,
  perturb,
  threshold_scan,
  entropy_check,
  l1_check,
  phase_scan,
};

/// Command name, e.g. "wave-branch".
std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view name);
const std::vector<Scenario>& all_scenarios();

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitNumerical = 3 };

/// Bad command line or configuration. `key` names the offending parameter
/// when there is one; `line` is the config-file line (0 when not from a file).
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what, std::string key = {}, int line = 0)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

enum class ParamType { integer, real, text, real_list, text_list, boolean };

struct ParamDef {
  std::string key;  // underscore form; the command-line flag uses dashes
  ParamType type = ParamType::real;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  // allowed values for text and text_list
};

const std::vector<ParamDef>& scenario_params(Scenario s);

using ParamMap = std::map<std::string, std::string>;

/// "t-end" and "t_end" both become "t_end".
std::string normalize_key(std::string_view key);

struct ExperimentSpec {
  Scenario scenario = Scenario::simulate;
  /// Every parameter of the scenario, resolved to its final textual value.
  ParamMap params;
  std::filesystem::path output_dir = "out";
  unsigned jobs = 1;

  long long get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  const std::string& get_text(const std::string& key) const;
  std::vector<double> get_reals(const std::string& key) const;
  std::vector<std::string> get_texts(const std::string& key) const;
  bool get_bool(const std::string& key) const;
};

/// Reads `key = value` lines. Blank lines and lines starting with '#' or ';'
/// are ignored; section headers may be [params] or the scenario name.
ParamMap read_config_file(const std::filesystem::path& file, Scenario scenario);

/// Defaults, then `file_values`, then `overrides`. Unknown keys and values
/// that do not parse as the declared type are rejected.
ExperimentSpec resolve_spec(Scenario scenario, const ParamMap& file_values, const ParamMap& overrides);

/// read_config_file + resolve_spec.
ExperimentSpec validate_config(const std::filesystem::path& file, Scenario scenario, const ParamMap& overrides = {});

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct RunOutcome {
  int exit_code = kExitPass;
  std::vector<CheckResult> checks;
  std::filesystem::path manifest_path;
  std::string message;
};

/// Runs the scenario, writing CSV files and `manifest.txt` into output_dir.
/// Solver failures give kExitNumerical; failed checks kExitCheckFailed.
RunOutcome run_experiment(const ExperimentSpec& spec);

/// Locale-independent shortest round-trip formatting of a double.
std::string format_number(double x);

}  // namespace fwlab
