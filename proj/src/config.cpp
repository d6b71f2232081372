#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fwlab/experiment.hpp"

namespace fwlab {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    out.push_back(trim(s.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, long long& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_bool(std::string_view s, bool& out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no" || s == "off") {
    out = false;
    return true;
  }
  return false;
}

std::string type_name(ParamType t) {
  switch (t) {
    case ParamType::integer: return "an integer";
    case ParamType::real: return "a number";
    case ParamType::text: return "a word";
    case ParamType::real_list: return "a comma-separated list of numbers";
    case ParamType::text_list: return "a comma-separated list of words";
    case ParamType::boolean: return "true or false";
  }
  return "a value";
}

const ParamDef* find_param(Scenario s, const std::string& key) {
  const auto& defs = scenario_params(s);
  const auto it = std::find_if(defs.begin(), defs.end(), [&](const ParamDef& d) { return d.key == key; });
  return it == defs.end() ? nullptr : &*it;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out;
}

void check_value(const ParamDef& def, const std::string& value, int line) {
  const auto fail = [&](const std::string& why) {
    throw UsageError(fmt::format("parameter '{}': {}", def.key, why), def.key, line);
  };
  switch (def.type) {
    case ParamType::integer: {
      long long v = 0;
      if (!parse_int(value, v)) fail(fmt::format("expected {}, got '{}'", type_name(def.type), value));
      break;
    }
    case ParamType::real: {
      double v = 0;
      if (!parse_double(value, v)) fail(fmt::format("expected {}, got '{}'", type_name(def.type), value));
      break;
    }
    case ParamType::boolean: {
      bool v = false;
      if (!parse_bool(value, v)) fail(fmt::format("expected {}, got '{}'", type_name(def.type), value));
      break;
    }
    case ParamType::real_list: {
      for (const auto& item : split_list(value)) {
        double v = 0;
        if (!parse_double(item, v)) fail(fmt::format("expected {}, got '{}'", type_name(def.type), value));
      }
      break;
    }
    case ParamType::text:
    case ParamType::text_list: {
      const auto items = def.type == ParamType::text ? std::vector<std::string>{value} : split_list(value);
      for (const auto& item : items) {
        if (item.empty()) fail("empty value");
        if (!def.choices.empty() && std::find(def.choices.begin(), def.choices.end(), item) == def.choices.end()) {
          fail(fmt::format("'{}' is not one of {}", item, join(def.choices)));
        }
      }
      break;
    }
  }
}

const std::string& lookup(const ExperimentSpec& spec, const std::string& key) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end()) throw std::logic_error("parameter '" + key + "' is not defined for this scenario");
  return it->second;
}

}  // namespace

std::string normalize_key(std::string_view key) {
  std::string out(key);
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

std::string format_number(double x) { return fmt::format("{}", x); }

long long ExperimentSpec::get_int(const std::string& key) const {
  long long v = 0;
  if (!parse_int(lookup(*this, key), v)) throw UsageError("parameter '" + key + "' is not an integer", key);
  return v;
}

double ExperimentSpec::get_real(const std::string& key) const {
  double v = 0;
  if (!parse_double(lookup(*this, key), v)) throw UsageError("parameter '" + key + "' is not a number", key);
  return v;
}

const std::string& ExperimentSpec::get_text(const std::string& key) const { return lookup(*this, key); }

std::vector<double> ExperimentSpec::get_reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(lookup(*this, key))) {
    double v = 0;
    if (!parse_double(item, v)) throw UsageError("parameter '" + key + "' is not a list of numbers", key);
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> ExperimentSpec::get_texts(const std::string& key) const {
  return split_list(lookup(*this, key));
}

bool ExperimentSpec::get_bool(const std::string& key) const {
  bool v = false;
  if (!parse_bool(lookup(*this, key), v)) throw UsageError("parameter '" + key + "' is not true/false", key);
  return v;
}

ParamMap read_config_file(const std::filesystem::path& file, Scenario scenario) {
  std::ifstream in(file);
  if (!in) throw UsageError(fmt::format("cannot open config file '{}'", file.string()));
  ParamMap values;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw UsageError(fmt::format("{}:{}: unterminated section header", file.string(), line_no), {}, line_no);
      }
      const std::string section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "params" && section != to_string(scenario)) {
        throw UsageError(fmt::format("{}:{}: unknown section [{}]", file.string(), line_no, section), section,
                         line_no);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("{}:{}: expected 'key = value'", file.string(), line_no), {}, line_no);
    }
    const std::string key = normalize_key(trim(std::string_view(line).substr(0, eq)));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw UsageError(fmt::format("{}:{}: missing key", file.string(), line_no), {}, line_no);
    const ParamDef* def = find_param(scenario, key);
    if (!def) {
      throw UsageError(fmt::format("{}:{}: unknown key '{}' for {}", file.string(), line_no, key, to_string(scenario)),
                       key, line_no);
    }
    check_value(*def, value, line_no);
    values[key] = value;
  }
  return values;
}

ExperimentSpec resolve_spec(Scenario scenario, const ParamMap& file_values, const ParamMap& overrides) {
  ExperimentSpec spec;
  spec.scenario = scenario;
  for (const auto& def : scenario_params(scenario)) spec.params[def.key] = def.default_value;
  for (const ParamMap* layer : {&file_values, &overrides}) {
    for (const auto& [raw_key, value] : *layer) {
      const std::string key = normalize_key(raw_key);
      const ParamDef* def = find_param(scenario, key);
      if (!def) throw UsageError(fmt::format("unknown key '{}' for {}", key, to_string(scenario)), key);
      check_value(*def, value, 0);
      spec.params[key] = value;
    }
  }
  return spec;
}

ExperimentSpec validate_config(const std::filesystem::path& file, Scenario scenario, const ParamMap& overrides) {
  return resolve_spec(scenario, read_config_file(file, scenario), overrides);
}

}  // namespace fwlab
