#pragma once

// Scenario configuration files.
//
// {
//   "scenario": "compare" | "chi" | "spheremap" | "werner" | "recoherer",
//   "process": {"kind": "...", "params": {...}}   (or an array of these),
//   "noise": {"counts": 13000, "seed": 1} | "exact",
//   "trials": 100,
//   "out_dir": "...",
//   "kernel": "triangular",
//   "pair_settings": 36,
//   "ancilla": {"mode": "measured" | "ideal", "state": "werner"},
//   "resolution": [33, 64],
//   "sphere_maps": false,
//   "shift": 1.0,            (recoherer: delay of the measured element)
//   "measured_sigma": false  (recoherer: tomograph sigma too)
// }

#include "qpt/scenario.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpt {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& problem);
};

struct ScenarioConfig {
  std::string scenario;
  std::vector<ProcessSpec> processes;
  std::optional<NoiseConfig> noise;  // nullopt = exact statistics
  int trials = 100;
  std::string out_dir;  // empty = not set in the file
  CoherenceKernel kernel = CoherenceKernel::Triangular;
  int pair_settings = 36;
  AncillaMode ancilla_mode = AncillaMode::Measured;
  std::string ancilla_state = "werner";
  int n_lat = kDefaultLatitudes;
  int n_lon = kDefaultLongitudes;
  bool sphere_maps = false;
  double shift = 1.0;
  bool measured_sigma = false;
};

const std::vector<std::string>& valid_scenarios();

ScenarioConfig parse_config(const nlohmann::ordered_json& j);
ScenarioConfig load_config(const std::string& path);

}  // namespace qpt
