#include "qpt/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace qpt {

namespace {

using json = nlohmann::ordered_json;

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

void reject_unknown_keys(const json& j, const std::string& path,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

ProcessSpec parse_process(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object {kind, params}");
  reject_unknown_keys(j, path, {"kind", "params"});
  if (!j.contains("kind")) throw ConfigError(path + ".kind", "missing");
  ProcessSpec spec;
  spec.kind = get_string(j.at("kind"), path + ".kind");
  const auto& kinds = valid_process_kinds();
  if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end()) {
    throw ConfigError(path + ".kind",
                      "unknown process kind '" + spec.kind + "'; valid kinds: " + join(kinds));
  }
  if (j.contains("params")) {
    const auto& p = j.at("params");
    if (!p.is_object()) throw ConfigError(path + ".params", "expected an object");
    for (const auto& [name, value] : p.items()) {
      spec.params[name] = get_number(value, path + ".params." + name);
    }
  }
  try {
    make_channel(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ".params", e.what());
  }
  return spec;
}

}  // namespace

ConfigError::ConfigError(const std::string& path, const std::string& problem)
    : std::invalid_argument("config " + path + ": " + problem) {}

const std::vector<std::string>& valid_scenarios() {
  static const std::vector<std::string> s{"compare", "chi", "spheremap", "werner", "recoherer"};
  return s;
}

ScenarioConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  reject_unknown_keys(j, "",
                      {"scenario", "process", "noise", "trials", "out_dir", "kernel",
                       "pair_settings", "ancilla", "resolution", "sphere_maps", "shift",
                       "measured_sigma"});
  ScenarioConfig c;
  if (!j.contains("scenario")) throw ConfigError("scenario", "missing");
  c.scenario = get_string(j.at("scenario"), "scenario");
  const auto& scenarios = valid_scenarios();
  if (std::find(scenarios.begin(), scenarios.end(), c.scenario) == scenarios.end()) {
    throw ConfigError("scenario",
                      "unknown scenario '" + c.scenario + "'; valid scenarios: " + join(scenarios));
  }

  if (j.contains("process")) {
    const auto& p = j.at("process");
    if (p.is_array()) {
      if (p.empty()) throw ConfigError("process", "empty process list");
      for (std::size_t i = 0; i < p.size(); ++i) {
        c.processes.push_back(parse_process(p[i], "process[" + std::to_string(i) + "]"));
      }
    } else {
      c.processes.push_back(parse_process(p, "process"));
    }
  } else {
    c.processes.push_back(ProcessSpec{});
  }

  c.noise = NoiseConfig{};
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    if (n.is_string()) {
      if (n.get<std::string>() != "exact") throw ConfigError("noise", "expected \"exact\" or an object");
      c.noise.reset();
    } else if (n.is_object()) {
      reject_unknown_keys(n, "noise", {"counts", "seed"});
      if (n.contains("counts")) {
        c.noise->counts_per_setting = get_integer(n.at("counts"), "noise.counts");
        if (c.noise->counts_per_setting < 1) throw ConfigError("noise.counts", "must be >= 1");
      }
      if (n.contains("seed")) {
        if (!n.at("seed").is_number_unsigned()) {
          throw ConfigError("noise.seed", "expected a non-negative integer");
        }
        c.noise->seed = n.at("seed").get<std::uint64_t>();
      }
    } else {
      throw ConfigError("noise", "expected \"exact\" or an object {counts, seed}");
    }
  }

  if (j.contains("trials")) {
    const auto t = get_integer(j.at("trials"), "trials");
    if (t < 1) throw ConfigError("trials", "must be >= 1");
    c.trials = static_cast<int>(t);
  }
  if (j.contains("out_dir")) c.out_dir = get_string(j.at("out_dir"), "out_dir");
  if (j.contains("kernel")) {
    if (get_string(j.at("kernel"), "kernel") != "triangular") {
      throw ConfigError("kernel", "unknown kernel; valid kernels: triangular");
    }
  }
  if (j.contains("pair_settings")) {
    const auto n = get_integer(j.at("pair_settings"), "pair_settings");
    if (n != 16 && n != 36) throw ConfigError("pair_settings", "must be 16 or 36");
    c.pair_settings = static_cast<int>(n);
  }
  if (j.contains("ancilla")) {
    const auto& a = j.at("ancilla");
    if (!a.is_object()) throw ConfigError("ancilla", "expected an object {mode, state}");
    reject_unknown_keys(a, "ancilla", {"mode", "state"});
    if (a.contains("mode")) {
      const auto mode = get_string(a.at("mode"), "ancilla.mode");
      if (mode == "measured") {
        c.ancilla_mode = AncillaMode::Measured;
      } else if (mode == "ideal") {
        c.ancilla_mode = AncillaMode::Ideal;
      } else {
        throw ConfigError("ancilla.mode", "expected \"measured\" or \"ideal\"");
      }
    }
    if (a.contains("state")) {
      c.ancilla_state = get_string(a.at("state"), "ancilla.state");
      try {
        named_state(c.ancilla_state);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("ancilla.state", e.what());
      }
    }
  }
  if (j.contains("resolution")) {
    const auto& r = j.at("resolution");
    if (!r.is_array() || r.size() != 2) throw ConfigError("resolution", "expected [n_lat, n_lon]");
    c.n_lat = static_cast<int>(get_integer(r[0], "resolution[0]"));
    c.n_lon = static_cast<int>(get_integer(r[1], "resolution[1]"));
    if (c.n_lat < 2 || c.n_lon < 3) throw ConfigError("resolution", "must be at least [2, 3]");
  }
  if (j.contains("sphere_maps")) c.sphere_maps = get_bool(j.at("sphere_maps"), "sphere_maps");
  if (j.contains("shift")) c.shift = get_number(j.at("shift"), "shift");
  if (j.contains("measured_sigma")) {
    c.measured_sigma = get_bool(j.at("measured_sigma"), "measured_sigma");
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace qpt
