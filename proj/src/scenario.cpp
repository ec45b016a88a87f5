#include "qpt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qpt {

namespace {

constexpr double kDelayTol = 1e-12;

int pol_of(int pol_index, Photon p) { return p == Photon::One ? pol_index / 2 : pol_index % 2; }

int with_pol(int pol_index, Photon p, int value) {
  return p == Photon::One ? value * 2 + pol_index % 2 : (pol_index / 2) * 2 + value;
}

// Sum amplitudes of branches that coincide in polarization and delay, drop
// empty ones and reset an all-common delay.
BranchState canonicalize(BranchState s) {
  std::sort(s.branches.begin(), s.branches.end(), [](const Branch& a, const Branch& b) {
    if (a.pol_index != b.pol_index) return a.pol_index < b.pol_index;
    return a.rel_delay < b.rel_delay - kDelayTol;
  });
  std::vector<Branch> merged;
  for (const auto& b : s.branches) {
    if (!merged.empty() && merged.back().pol_index == b.pol_index &&
        std::abs(merged.back().rel_delay - b.rel_delay) <= kDelayTol) {
      merged.back().amplitude += b.amplitude;
    } else {
      merged.push_back(b);
    }
  }
  std::erase_if(merged, [](const Branch& b) { return std::abs(b.amplitude) < 1e-15; });
  if (!merged.empty()) {
    const double first = merged.front().rel_delay;
    const bool common = std::all_of(merged.begin(), merged.end(), [&](const Branch& b) {
      return std::abs(b.rel_delay - first) <= kDelayTol;
    });
    if (common) {
      for (auto& b : merged) b.rel_delay = 0.0;
    }
  }
  s.branches = std::move(merged);
  return s;
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

double kernel_value(CoherenceKernel k, double delta) {
  switch (k) {
    case CoherenceKernel::Triangular: return std::max(0.0, 1.0 - std::abs(delta));
  }
  return 0.0;
}

OpticalElement OpticalElement::unitary(Photon target, ComplexMatrix u) {
  if (u.rows() != 2 || u.cols() != 2 ||
      !approx_equal(u.adjoint() * u, ComplexMatrix::Identity(2, 2), 1e-10)) {
    throw std::invalid_argument("polarization element must be a 2x2 unitary");
  }
  return {target, PolarizationUnitary{std::move(u)}};
}

OpticalElement OpticalElement::half_waveplate(Photon target, double axis_angle) {
  return unitary(target, channels::waveplate_unitary(M_PI, axis_angle));
}

OpticalElement OpticalElement::delay(Photon target, SlowAxis axis, double shift) {
  return {target, DelayShift{axis, shift}};
}

BranchState source_state(double pump_ratio, double phase) {
  if (!(pump_ratio >= 0.0)) throw std::invalid_argument("pump_ratio must be non-negative");
  const double norm = std::sqrt(1.0 + pump_ratio * pump_ratio);
  BranchState s;
  s.branches.push_back({0, complex(1.0 / norm, 0.0), 0.0});
  s.branches.push_back({3, std::polar(pump_ratio / norm, phase), 0.0});
  return canonicalize(std::move(s));
}

double werner_pump_ratio() { return (M_SQRT2 - 1.0) * (M_SQRT2 - 1.0); }

BranchState apply_element(const BranchState& state, const OpticalElement& el) {
  BranchState out;
  out.kernel = state.kernel;
  if (const auto* u = std::get_if<PolarizationUnitary>(&el.kind)) {
    for (const auto& b : state.branches) {
      const int p = pol_of(b.pol_index, el.target);
      for (int q = 0; q < 2; ++q) {
        const complex amp = u->u(q, p) * b.amplitude;
        if (amp != 0.0) out.branches.push_back({with_pol(b.pol_index, el.target, q), amp, b.rel_delay});
      }
    }
  } else {
    const auto& d = std::get<DelayShift>(el.kind);
    const int slow = d.axis == SlowAxis::H ? 0 : 1;
    for (auto b : state.branches) {
      if (pol_of(b.pol_index, el.target) == slow) {
        b.rel_delay += el.target == Photon::One ? d.shift : -d.shift;
      }
      out.branches.push_back(b);
    }
  }
  return canonicalize(std::move(out));
}

BranchState apply_elements(BranchState state, const std::vector<OpticalElement>& elements) {
  for (const auto& el : elements) state = apply_element(state, el);
  return state;
}

DensityMatrix effective_density(const BranchState& state) {
  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  for (const auto& a : state.branches) {
    for (const auto& b : state.branches) {
      const double k = kernel_value(state.kernel, a.rel_delay - b.rel_delay);
      if (k != 0.0) rho(a.pol_index, b.pol_index) += a.amplitude * std::conj(b.amplitude) * k;
    }
  }
  DensityMatrix out(std::move(rho));
  if (out.min_eigenvalue() < -kPhysicalTol) {
    throw NumericalError("effective density is not positive semidefinite");
  }
  return out;
}

BranchState prepare_werner_branches() {
  return apply_elements(source_state(werner_pump_ratio()),
                        {
                            OpticalElement::half_waveplate(Photon::One, M_PI / 8.0),
                            OpticalElement::half_waveplate(Photon::Two, M_PI / 8.0),
                            OpticalElement::delay(Photon::One, SlowAxis::V, 1.0),
                            OpticalElement::delay(Photon::Two, SlowAxis::V, 1.0),
                            OpticalElement::delay(Photon::Two, SlowAxis::V, 0.5),
                        });
}

DensityMatrix prepare_werner() { return effective_density(prepare_werner_branches()); }

DensityMatrix werner_target() {
  ComplexVector gamma = ComplexVector::Zero(4);
  gamma(0) = M_SQRT1_2;
  gamma(3) = M_SQRT1_2;
  return DensityMatrix(ComplexMatrix::Identity(4, 4) / 6.0 + gamma * gamma.adjoint() / 3.0);
}

DensityMatrix bell_phi_minus() {
  ComplexVector phi = ComplexVector::Zero(4);
  phi(0) = M_SQRT1_2;
  phi(3) = -M_SQRT1_2;
  return DensityMatrix::from_ket(phi);
}

SqptInput sqpt_input_for_element(const OpticalElement& el) {
  if (el.target != Photon::One) throw std::invalid_argument("SQPT element must act on photon 1");
  const std::array<ComplexVector, 4> kets{ket_h(), ket_v(), ket_d(), ket_r()};
  SqptInput input{{DensityMatrix(ComplexMatrix::Zero(2, 2)), DensityMatrix(ComplexMatrix::Zero(2, 2)),
                   DensityMatrix(ComplexMatrix::Zero(2, 2)), DensityMatrix(ComplexMatrix::Zero(2, 2))}};
  for (int j = 0; j < 4; ++j) {
    BranchState s;
    s.branches.push_back({0, kets[j](0), 0.0});  // |p1 = H, trigger H>
    s.branches.push_back({2, kets[j](1), 0.0});  // |p1 = V, trigger H>
    s = apply_element(canonicalize(std::move(s)), el);
    input.outputs[j] = DensityMatrix(partial_trace(effective_density(s).matrix(), Subsystem::B));
  }
  return input;
}

RecohererResult recoherer_scenario(const RecohererOptions& options) {
  const OpticalElement process = OpticalElement::delay(Photon::One, SlowAxis::H, options.shift);
  RecohererResult r;
  r.sigma_branches = prepare_werner_branches();
  r.sigma_prime_branches = apply_element(r.sigma_branches, process);
  r.sigma = effective_density(r.sigma_branches);
  r.sigma_prime = effective_density(r.sigma_prime_branches);

  DensityMatrix sigma_in = r.sigma;
  DensityMatrix sigma_out = r.sigma_prime;
  if (options.noise) {
    const auto settings = options.pair_settings == 16 ? settings_pair_16() : settings_pair();
    NoiseConfig out_noise = *options.noise;
    out_noise.seed = derive_seed(options.noise->seed, 0, 1);
    sigma_out = mle_reconstruct(simulate_counts(r.sigma_prime, settings, out_noise), 4);
    if (options.measured_sigma) {
      NoiseConfig in_noise = *options.noise;
      in_noise.seed = derive_seed(options.noise->seed, 0, 0);
      sigma_in = mle_reconstruct(simulate_counts(r.sigma, settings, in_noise), 4);
    }
  }
  r.aapt = aapt(sigma_in, sigma_out);
  r.aapt_report = chi_report(r.aapt.chi);
  r.sqpt = sqpt(sqpt_input_for_element(process));
  r.sqpt_report = chi_report(r.sqpt.chi);
  return r;
}

// ---------------------------------------------------------------------------
// Processes

namespace {

const std::map<std::string, std::map<std::string, double>>& process_defaults() {
  static const std::map<std::string, std::map<std::string, double>> d{
      {"identity", {}},
      {"waveplate", {{"retardance", M_PI}, {"axis_angle", M_PI / 4.0}}},
      {"rotator", {{"angle", 0.3}}},
      {"dephaser", {{"p", 1.0}}},
      {"coherent_partial_polarizer", {{"t_h", 0.88}, {"t_v", 0.45}}},
      {"incoherent_partial_polarizer", {{"p", 0.5}}},
  };
  return d;
}

}  // namespace

const std::vector<std::string>& valid_process_kinds() {
  static const std::vector<std::string> kinds{"identity",
                                              "waveplate",
                                              "rotator",
                                              "dephaser",
                                              "coherent_partial_polarizer",
                                              "incoherent_partial_polarizer"};
  return kinds;
}

std::map<std::string, double> resolved_params(const ProcessSpec& spec) {
  const auto& defaults = process_defaults();
  auto it = defaults.find(spec.kind);
  if (it == defaults.end()) {
    std::string msg = "unknown process kind '" + spec.kind + "'; valid kinds:";
    for (const auto& k : valid_process_kinds()) msg += " " + k;
    throw std::invalid_argument(msg);
  }
  auto params = it->second;
  for (const auto& [name, value] : spec.params) {
    if (!params.count(name)) {
      std::string msg = "unknown parameter '" + name + "' for process '" + spec.kind + "'";
      if (!it->second.empty()) {
        msg += "; valid parameters:";
        for (const auto& [k, v] : it->second) msg += " " + k;
      }
      throw std::invalid_argument(msg);
    }
    params[name] = value;
  }
  return params;
}

KrausChannel make_channel(const ProcessSpec& spec) {
  const auto p = resolved_params(spec);
  const std::string& k = spec.kind;
  if (k == "identity") return channels::identity();
  if (k == "waveplate") return channels::waveplate(p.at("retardance"), p.at("axis_angle"));
  if (k == "rotator") return channels::rotator(p.at("angle"));
  if (k == "dephaser") return channels::dephaser(p.at("p"));
  if (k == "coherent_partial_polarizer") {
    return channels::coherent_partial_polarizer(p.at("t_h"), p.at("t_v"));
  }
  return channels::incoherent_partial_polarizer(p.at("p"));
}

// ---------------------------------------------------------------------------
// Comparison

const MethodSummary& ComparisonReport::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw std::out_of_range("no method " + name + " in comparison report");
}

DensityMatrix named_state(const std::string& name) {
  if (name == "bell") return bell_phi_minus();
  if (name == "werner") return prepare_werner();
  if (name == "werner_target") return werner_target();
  if (name == "product") {
    return DensityMatrix(tensor(DensityMatrix::from_ket(ket_h()).matrix(),
                                DensityMatrix::from_ket(ket_d()).matrix()));
  }
  throw std::invalid_argument("unknown state '" + name +
                              "'; valid states: bell werner werner_target product");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t trial, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(base) ^ trial) ^ (stream + 0x5851F42D4C957F2DULL));
}

ComparisonReport run_method_comparison(const ComparisonConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (config.pair_settings != 16 && config.pair_settings != 36) {
    throw std::invalid_argument("pair_settings must be 16 or 36");
  }
  const KrausChannel ch = make_channel(config.process);
  ComparisonReport report;
  report.truth = kraus_to_chi(ch);

  const DensityMatrix bell = bell_phi_minus();
  const DensityMatrix separable = named_state(config.aapt_state);
  for (const DensityMatrix* s : {&bell, &separable}) {
    const auto u = aapt_usable(*s);
    if (!u.usable) throw UnusableAncillaState(u.coefficients);
  }
  const auto pair_settings = config.pair_settings == 16 ? settings_pair_16() : settings_pair();
  const auto& prep = StatePreparationBasis::standard().states();

  auto measure = [&](const DensityMatrix& rho, const std::vector<MeasurementSetting>& settings,
                     int trial, int stream) {
    if (!config.noise) return rho;
    NoiseConfig n = *config.noise;
    n.seed = derive_seed(config.noise->seed, static_cast<std::uint64_t>(trial),
                         static_cast<std::uint64_t>(stream));
    return mle_reconstruct(simulate_counts(rho, settings, n), rho.dim());
  };

  auto ancilla_run = [&](const DensityMatrix& sigma, int trial, int stream) {
    const DensityMatrix out = apply_extended(ch, sigma);
    const DensityMatrix sigma_in = config.ancilla == AncillaMode::Measured
                                       ? measure(sigma, pair_settings, trial, stream)
                                       : sigma;
    return aapt(sigma_in, measure(out, pair_settings, trial, stream + 1));
  };

  std::array<MethodSummary, 3> summaries;
  summaries[0].method = "SQPT";
  summaries[1].method = "EAPT";
  summaries[2].method = "AAPT";
  for (int t = 0; t < config.trials; ++t) {
    SqptInput input{{prep[0], prep[1], prep[2], prep[3]}};
    for (int j = 0; j < 4; ++j) input.outputs[j] = measure(apply(ch, prep[j]), settings_single(), t, j);
    const std::array<ProcessEstimate, 3> est{sqpt(input), ancilla_run(bell, t, 4),
                                             ancilla_run(separable, t, 6)};
    for (int m = 0; m < 3; ++m) {
      summaries[m].fidelities.push_back(process_fidelity(est[m].chi, report.truth));
      if (t == 0) summaries[m].first_estimate = est[m];
    }
  }
  for (auto& s : summaries) {
    s.trials = config.trials;
    s.mean_fidelity = std::accumulate(s.fidelities.begin(), s.fidelities.end(), 0.0) /
                      static_cast<double>(s.fidelities.size());
    s.std_fidelity = sample_std(s.fidelities, s.mean_fidelity);
    report.methods.push_back(std::move(s));
  }
  return report;
}

}  // namespace qpt
