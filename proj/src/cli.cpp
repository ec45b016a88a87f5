#include "qpt/cli.hpp"

#include "qpt/config.hpp"
#include "qpt/io.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace qpt::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": malformed JSON: " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Collects every file written by one invocation and finishes with the manifest.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw UsageError("out_dir " + dir_.string() + " is not writable");
    }
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + path.string());
    out << content;
    if (!out) throw UsageError("cannot write " + path.string());
    artifacts_.push_back(name);
  }

  void write_manifest(const std::string& subcommand, std::uint64_t config_hash,
                      std::optional<std::uint64_t> seed) {
    std::vector<std::string> names = artifacts_;
    std::sort(names.begin(), names.end());
    json m;
    m["subcommand"] = subcommand;
    m["config_hash"] = fmt::format("{:016x}", config_hash);
    m["seed"] = seed ? json(*seed) : json(nullptr);
    m["artifacts"] = names;
    write("run_manifest.json", dump(m));
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> artifacts_;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> counts;
  std::string out_dir;

  // Folded into the config hash so that overridden runs hash differently.
  std::string fingerprint() const {
    return fmt::format("|seed={}|counts={}", seed ? std::to_string(*seed) : "-",
                       counts ? std::to_string(*counts) : "-");
  }
};

fs::path resolve_out_dir(const Overrides& o, const std::string& from_config) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (!from_config.empty()) return from_config;
  if (const char* env = std::getenv("QPT_OUT_DIR"); env && *env) return env;
  return "qpt_out";
}

void apply_overrides(ScenarioConfig& c, const Overrides& o) {
  if (o.counts) {
    if (*o.counts < 1) throw ConfigError("noise.counts", "must be >= 1");
    if (!c.noise) c.noise = NoiseConfig{};
    c.noise->counts_per_setting = *o.counts;
  }
  if (o.seed) {
    if (!c.noise) c.noise = NoiseConfig{};
    c.noise->seed = *o.seed;
  }
}

json noise_to_json(const std::optional<NoiseConfig>& n) {
  if (!n) return "exact";
  return {{"counts", n->counts_per_setting}, {"seed", n->seed}};
}

json process_to_json(const ProcessSpec& spec) {
  json params = json::object();
  for (const auto& [k, v] : resolved_params(spec)) params[k] = v;
  return {{"kind", spec.kind}, {"params", params}};
}

// File stems per process: the kind, disambiguated by index when repeated.
std::vector<std::string> process_stems(const std::vector<ProcessSpec>& processes) {
  std::map<std::string, int> seen;
  for (const auto& p : processes) ++seen[p.kind];
  std::vector<std::string> stems;
  for (std::size_t i = 0; i < processes.size(); ++i) {
    const auto& kind = processes[i].kind;
    stems.push_back(seen[kind] > 1 ? fmt::format("{}_{}", kind, i) : kind);
  }
  return stems;
}

std::string sphere_csv(const SphereMesh& mesh) {
  std::ostringstream os;
  write_sphere_csv(os, mesh);
  return os.str();
}

std::string method_key(std::string m) {
  std::transform(m.begin(), m.end(), m.begin(), [](unsigned char c) { return std::tolower(c); });
  return m;
}

ComparisonConfig comparison_config(const ScenarioConfig& c, const ProcessSpec& p, int trials) {
  ComparisonConfig cc;
  cc.process = p;
  cc.noise = c.noise;
  cc.trials = trials;
  cc.pair_settings = c.pair_settings;
  cc.ancilla = c.ancilla_mode;
  cc.aapt_state = c.ancilla_state;
  return cc;
}

void scenario_compare(const ScenarioConfig& c, ArtifactWriter& w, std::ostream& out) {
  const auto stems = process_stems(c.processes);
  for (std::size_t i = 0; i < c.processes.size(); ++i) {
    const auto& p = c.processes[i];
    const ComparisonReport report = run_method_comparison(comparison_config(c, p, c.trials));
    json doc;
    doc["process"] = process_to_json(p);
    doc["noise"] = noise_to_json(c.noise);
    doc["pair_settings"] = c.pair_settings;
    doc["ancilla"] = {{"mode", c.ancilla_mode == AncillaMode::Measured ? "measured" : "ideal"},
                      {"state", c.ancilla_state}};
    doc["methods"] = comparison_to_json(report);
    w.write(stems[i] + "_comparison.json", dump(doc));
    w.write(stems[i] + "_chi_truth.json", dump(chi_to_json(report.truth)));
    for (const auto& m : report.methods) {
      w.write(stems[i] + "_chi_" + method_key(m.method) + ".json",
              dump(estimate_to_json(m.first_estimate)));
      out << fmt::format("{:<22} {:<5} F = {:.6f} +/- {:.6f} ({} trials)\n", stems[i], m.method,
                         m.mean_fidelity, m.std_fidelity, m.trials);
    }
    if (c.sphere_maps) {
      w.write(stems[i] + "_sphere_truth.csv",
              sphere_csv(sphere_map(make_channel(p), c.n_lat, c.n_lon)));
      for (const auto& m : report.methods) {
        w.write(stems[i] + "_sphere_" + method_key(m.method) + ".csv",
                sphere_csv(sphere_map(m.first_estimate.chi, c.n_lat, c.n_lon)));
      }
    }
  }
}

void scenario_chi(const ScenarioConfig& c, ArtifactWriter& w, std::ostream& out) {
  const auto stems = process_stems(c.processes);
  for (std::size_t i = 0; i < c.processes.size(); ++i) {
    const ComparisonReport report =
        run_method_comparison(comparison_config(c, c.processes[i], 1));
    json doc;
    doc["process"] = process_to_json(c.processes[i]);
    doc["noise"] = noise_to_json(c.noise);
    doc["truth"] = chi_to_json(report.truth);
    json methods = json::object();
    for (const auto& m : report.methods) {
      methods[m.method] = {{"chi", estimate_to_json(m.first_estimate)},
                           {"report", chi_report_to_json(chi_report(m.first_estimate.chi))},
                           {"process_fidelity", m.fidelities.front()}};
    }
    doc["methods"] = methods;
    w.write(stems[i] + "_chi.json", dump(doc));
    const auto& eapt = report.method("EAPT");
    out << fmt::format("{:<22} EAPT chi min eigenvalue {:.3e}, F = {:.6f}\n", stems[i],
                       chi_report(eapt.first_estimate.chi).min_eigenvalue,
                       eapt.fidelities.front());
  }
}

void scenario_spheremap(const ScenarioConfig& c, ArtifactWriter& w, std::ostream& out) {
  const auto stems = process_stems(c.processes);
  for (std::size_t i = 0; i < c.processes.size(); ++i) {
    const SphereMesh mesh = sphere_map(make_channel(c.processes[i]), c.n_lat, c.n_lon);
    json summary = sphere_summary_to_json(mesh);
    summary["process"] = process_to_json(c.processes[i]);
    w.write(stems[i] + "_sphere.csv", sphere_csv(mesh));
    w.write(stems[i] + "_sphere.json", dump(summary));
    out << fmt::format("{:<22} {} samples\n", stems[i], mesh.samples.size());
  }
}

json branches_to_json(const BranchState& s) {
  static const char* labels[] = {"HH", "HV", "VH", "VV"};
  json out = json::array();
  for (const auto& b : s.branches) {
    out.push_back({{"pol", labels[b.pol_index]},
                   {"re", b.amplitude.real()},
                   {"im", b.amplitude.imag()},
                   {"rel_delay", b.rel_delay}});
  }
  return out;
}

double partial_transpose_min_eigenvalue(const DensityMatrix& rho) {
  return DensityMatrix(partial_transpose(rho.matrix(), Subsystem::B)).min_eigenvalue();
}

void scenario_werner(const ScenarioConfig&, ArtifactWriter& w, std::ostream& out) {
  const BranchState branches = prepare_werner_branches();
  const DensityMatrix rho = effective_density(branches);
  const auto usability = aapt_usable(rho);
  const double fidelity = state_fidelity(rho, werner_target());
  const double pt_min = partial_transpose_min_eigenvalue(rho);
  json doc = state_to_json(rho);
  doc["fidelity_to_werner"] = fidelity;
  doc["purity"] = purity(rho);
  doc["partial_transpose_min_eigenvalue"] = pt_min;
  doc["entangled"] = pt_min < -kPhysicalTol;
  doc["schmidt_number"] = usability.schmidt_number;
  doc["schmidt_coefficients"] = usability.coefficients;
  doc["aapt_usable"] = usability.usable;
  doc["branches"] = branches_to_json(branches);
  w.write("werner_state.json", dump(doc));
  out << fmt::format("werner fidelity {:.12f}, partial transpose min eigenvalue {:.3e}\n",
                     fidelity, pt_min);
}

void scenario_recoherer(const ScenarioConfig& c, ArtifactWriter& w, std::ostream& out) {
  RecohererOptions opt;
  opt.shift = c.shift;
  opt.noise = c.noise;
  opt.measured_sigma = c.measured_sigma;
  opt.pair_settings = c.pair_settings;
  const RecohererResult r = recoherer_scenario(opt);
  json doc;
  doc["shift"] = c.shift;
  doc["noise"] = noise_to_json(c.noise);
  doc["sigma"] = state_to_json(r.sigma);
  doc["sigma_prime"] = state_to_json(r.sigma_prime);
  doc["sigma_prime_branches"] = branches_to_json(r.sigma_prime_branches);
  doc["aapt"] = {{"chi", estimate_to_json(r.aapt)}, {"report", chi_report_to_json(r.aapt_report)}};
  doc["sqpt"] = {{"chi", estimate_to_json(r.sqpt)}, {"report", chi_report_to_json(r.sqpt_report)}};
  w.write("recoherer.json", dump(doc));
  w.write("recoherer_sphere_aapt.csv", sphere_csv(sphere_map(r.aapt.chi, c.n_lat, c.n_lon)));
  w.write("recoherer_sphere_sqpt.csv", sphere_csv(sphere_map(r.sqpt.chi, c.n_lat, c.n_lon)));
  out << fmt::format("recoherer AAPT chi: {} (min eigenvalue {:.4f}); SQPT chi: {} (min eigenvalue {:.4f})\n",
                     r.aapt_report.verdict, r.aapt_report.min_eigenvalue, r.sqpt_report.verdict,
                     r.sqpt_report.min_eigenvalue);
}

struct ConfigRun {
  ScenarioConfig config;
  std::uint64_t hash;
};

ConfigRun load_with_overrides(const std::string& path, const Overrides& o) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("malformed JSON: ") + e.what());
  }
  ScenarioConfig c = parse_config(j);
  apply_overrides(c, o);
  return {c, fnv1a(text + o.fingerprint())};
}

std::optional<std::uint64_t> seed_of(const ScenarioConfig& c) {
  if (!c.noise) return std::nullopt;
  return c.noise->seed;
}

void run_scenario(const std::string& subcommand, const std::string& config_path,
                  const Overrides& o, bool force_compare, bool force_spheremap,
                  std::ostream& out) {
  ConfigRun run = load_with_overrides(config_path, o);
  ScenarioConfig& c = run.config;
  ArtifactWriter w(resolve_out_dir(o, c.out_dir));
  std::string kind = c.scenario;
  if (force_compare) kind = "compare";
  if (force_spheremap) kind = "spheremap";
  if (kind == "compare") {
    scenario_compare(c, w, out);
  } else if (kind == "chi") {
    scenario_chi(c, w, out);
  } else if (kind == "spheremap") {
    scenario_spheremap(c, w, out);
  } else if (kind == "werner") {
    scenario_werner(c, w, out);
  } else {
    scenario_recoherer(c, w, out);
  }
  w.write_manifest(subcommand, run.hash, seed_of(c));
  out << "wrote " << w.dir().string() << "\n";
}

std::vector<MeasurementSetting> settings_by_name(const std::string& name, int dim) {
  if (name == "auto") return dim == 2 ? settings_single() : settings_pair();
  if (name == "single") return settings_single();
  if (name == "pair") return settings_pair();
  if (name == "pair16") return settings_pair_16();
  throw UsageError("unknown settings list '" + name + "'; valid: auto, single, pair, pair16");
}

void cmd_simulate(const std::string& state_path, const std::string& settings_name, bool exact,
                  const Overrides& o, std::ostream& out) {
  const std::string text = read_file(state_path);
  const DensityMatrix rho = state_from_json(parse_json_file(state_path));
  const auto settings = settings_by_name(settings_name, rho.dim());
  if (settings.front().labels().size() != static_cast<std::size_t>(rho.dim() == 2 ? 1 : 2)) {
    throw UsageError("settings list does not match the state dimension");
  }
  NoiseConfig noise;
  if (o.counts) noise.counts_per_setting = *o.counts;
  if (o.seed) noise.seed = *o.seed;
  if (noise.counts_per_setting < 1) throw UsageError("--counts must be >= 1");
  const auto records = exact ? exact_counts(rho, settings, noise.counts_per_setting)
                             : simulate_counts(rho, settings, noise);
  ArtifactWriter w(resolve_out_dir(o, ""));
  std::ostringstream csv;
  write_counts_csv(csv, records);
  w.write("counts.csv", csv.str());
  w.write_manifest("simulate",
                   fnv1a(text + o.fingerprint() + "|settings=" + settings_name +
                         (exact ? "|exact" : "")),
                   exact ? std::nullopt : std::optional<std::uint64_t>(noise.seed));
  out << fmt::format("{} settings written to {}\n", records.size(), (w.dir() / "counts.csv").string());
}

void cmd_reconstruct(const std::string& counts_path, const std::string& method,
                     const Overrides& o, std::ostream& out) {
  const std::string text = read_file(counts_path);
  std::istringstream is(text);
  const auto records = read_counts_csv(is);
  if (records.empty()) throw UsageError(counts_path + ": no count records");
  const int dim = records.front().setting.labels().size() == 1 ? 2 : 4;
  json doc;
  if (method == "mle") {
    const MleResult r = mle_reconstruct_detailed(records, dim);
    doc = state_to_json(r.rho);
    doc["method"] = "mle";
    doc["iterations"] = r.iterations;
    doc["start_objective"] = r.start_objective;
    doc["final_objective"] = r.final_objective;
    doc["physical"] = r.rho.min_eigenvalue() >= -kPhysicalTol;
    doc["min_eigenvalue"] = r.rho.min_eigenvalue();
    if (dim == 2) doc["stokes"] = stokes_to_json(stokes_of(DensityMatrix(r.rho.normalized())));
  } else if (method == "linear") {
    const LinearEstimate e = linear_reconstruct(records);
    doc = state_to_json(e.rho);
    doc["method"] = "linear";
    doc["physical"] = e.physical;
    doc["min_eigenvalue"] = e.rho.min_eigenvalue();
    if (dim == 2) doc["stokes"] = stokes_to_json(stokes_of(DensityMatrix(e.rho.normalized())));
  } else {
    throw UsageError("unknown method '" + method + "'; valid: mle, linear");
  }
  ArtifactWriter w(resolve_out_dir(o, ""));
  w.write("state.json", dump(doc));
  w.write_manifest("reconstruct", fnv1a(text + "|method=" + method), std::nullopt);
  out << fmt::format("{} estimate written to {} (physical: {})\n", method,
                     (w.dir() / "state.json").string(), doc["physical"].get<bool>());
}

void cmd_schmidt(const std::string& state_path, const Overrides& o, std::ostream& out) {
  const std::string text = read_file(state_path);
  const DensityMatrix sigma = state_from_json(parse_json_file(state_path));
  if (sigma.dim() != 4) throw UsageError("schmidt needs a two-qubit (4x4) state");
  const auto u = aapt_usable(sigma);
  json doc;
  doc["schmidt_number"] = u.schmidt_number;
  doc["usable"] = u.usable;
  doc["coefficients"] = u.coefficients;
  doc["min_coefficient"] = u.min_coefficient;
  ArtifactWriter w(resolve_out_dir(o, ""));
  w.write("schmidt.json", dump(doc));
  w.write_manifest("schmidt", fnv1a(text), std::nullopt);
  out << fmt::format("schmidt_number {} usable {}\n", u.schmidt_number, u.usable);
}

}  // namespace

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum process tomography of polarization channels", "qpt"};
  app.require_subcommand(1);

  Overrides o;
  std::string input;
  std::string settings_name = "auto";
  std::string method = "mle";
  bool exact = false;

  auto add_common = [&](CLI::App* sub, const std::string& input_help) {
    sub->add_option("input", input, input_help)->required();
    sub->add_option("--out-dir", o.out_dir, "Output directory");
  };
  auto add_noise = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Override the noise seed");
    sub->add_option("--counts", o.counts, "Override counts per setting");
  };

  auto* simulate = app.add_subcommand("simulate", "Simulate Poisson counts for a state JSON");
  add_common(simulate, "State JSON");
  add_noise(simulate);
  simulate->add_option("--settings", settings_name, "auto, single, pair or pair16");
  simulate->add_flag("--exact", exact, "Expected counts instead of Poisson draws");

  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct a state from a counts CSV");
  add_common(reconstruct, "Counts CSV");
  reconstruct->add_option("--method", method, "mle or linear");

  auto* schmidt = app.add_subcommand("schmidt", "Operator-Schmidt report for a two-qubit state JSON");
  add_common(schmidt, "State JSON");

  auto* spheremap = app.add_subcommand("spheremap", "Sphere maps of the configured processes");
  add_common(spheremap, "Config JSON");

  auto* scenario = app.add_subcommand("scenario", "Run the scenario named in a config");
  add_common(scenario, "Config JSON");
  add_noise(scenario);

  auto* compare = app.add_subcommand("compare", "Compare SQPT, EAPT and AAPT");
  add_common(compare, "Config JSON");
  add_noise(compare);

  std::vector<const char*> argv;
  argv.push_back("qpt");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      cmd_simulate(input, settings_name, exact, o, out);
    } else if (reconstruct->parsed()) {
      cmd_reconstruct(input, method, o, out);
    } else if (schmidt->parsed()) {
      cmd_schmidt(input, o, out);
    } else if (spheremap->parsed()) {
      run_scenario("spheremap", input, o, false, true, out);
    } else if (scenario->parsed()) {
      run_scenario("scenario", input, o, false, false, out);
    } else {
      run_scenario("compare", input, o, true, false, out);
    }
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace qpt::cli
