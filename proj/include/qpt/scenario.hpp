#pragma once

// End-to-end experiment reproductions.
//
// Two-photon polarization states are tracked as branches: a polarization
// basis state |p1 p2> with an amplitude and the relative delay (photon 1 minus
// photon 2) it has accumulated in birefringent elements, in units of the
// single-photon coherence length. Tracing out the timing degree of freedom
// leaves rho_ij = sum a_i a_j^* kappa(r_i - r_j) with a triangular coherence
// kernel kappa(x) = max(0, 1 - |x|).

#include "qpt/analysis.hpp"
#include "qpt/process_tomo.hpp"
#include "qpt/tomography.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qpt {

enum class CoherenceKernel { Triangular };

double kernel_value(CoherenceKernel k, double delta);

struct Branch {
  int pol_index = 0;  // 0..3 = HH, HV, VH, VV
  complex amplitude;
  double rel_delay = 0.0;
};

struct BranchState {
  std::vector<Branch> branches;
  CoherenceKernel kernel = CoherenceKernel::Triangular;
};

enum class Photon { One, Two };
/// Which polarization travels along the slow axis of a birefringent delay.
enum class SlowAxis { H, V };

struct PolarizationUnitary {
  ComplexMatrix u;
};
struct DelayShift {
  SlowAxis axis = SlowAxis::V;
  double shift = 0.0;
};

struct OpticalElement {
  Photon target = Photon::One;
  std::variant<PolarizationUnitary, DelayShift> kind;

  static OpticalElement unitary(Photon target, ComplexMatrix u);
  static OpticalElement half_waveplate(Photon target, double axis_angle);
  static OpticalElement delay(Photon target, SlowAxis axis, double shift);
};

/// a|HH> + r e^{i phase} a|VV>, normalized. pump_ratio = 1, phase = pi gives
/// (|HH> - |VV>)/sqrt(2).
BranchState source_state(double pump_ratio, double phase = 0.0);
/// Amplitude ratio |VV|/|HH| of the partially entangled Werner source.
double werner_pump_ratio();

/// A common delay shared by every branch is unobservable and is reset to zero.
BranchState apply_element(const BranchState& state, const OpticalElement& el);
BranchState apply_elements(BranchState state, const std::vector<OpticalElement>& elements);

DensityMatrix effective_density(const BranchState& state);

/// Source -> HWP(22.5 deg) on both arms -> full decoherers on both arms ->
/// extra half-length decoherer on photon 2.
BranchState prepare_werner_branches();
DensityMatrix prepare_werner();
/// I/6 + |gamma><gamma|/3 with |gamma> = (|HH> + |VV>)/sqrt(2).
DensityMatrix werner_target();
/// (|HH> - |VV>)/sqrt(2)
DensityMatrix bell_phi_minus();

/// Output of `el` acting on photon 1 of each SQPT input (|H>, |V>, |D>, |R>,
/// paired with an H trigger photon and no delay history), photon 2 traced out.
SqptInput sqpt_input_for_element(const OpticalElement& el);

struct RecohererOptions {
  double shift = 1.0;
  /// Shot-noise tomography of sigma' (and of sigma when measured_sigma).
  std::optional<NoiseConfig> noise;
  bool measured_sigma = false;
  int pair_settings = 36;
};

struct RecohererResult {
  BranchState sigma_branches;
  BranchState sigma_prime_branches;
  DensityMatrix sigma;
  DensityMatrix sigma_prime;
  ProcessEstimate aapt;
  ChiReport aapt_report;
  ProcessEstimate sqpt;
  ChiReport sqpt_report;
};

RecohererResult recoherer_scenario(const RecohererOptions& options = {});

// ---------------------------------------------------------------------------
// Method comparison

struct ProcessSpec {
  std::string kind = "identity";
  std::map<std::string, double> params;
};

const std::vector<std::string>& valid_process_kinds();
/// Builds the channel, filling in default parameters.
KrausChannel make_channel(const ProcessSpec& spec);
/// The parameters actually used, defaults included.
std::map<std::string, double> resolved_params(const ProcessSpec& spec);

enum class AncillaMode { Measured, Ideal };

struct ComparisonConfig {
  ProcessSpec process;
  std::optional<NoiseConfig> noise;  // nullopt = exact statistics
  int trials = 100;
  int pair_settings = 36;  // 16 or 36
  AncillaMode ancilla = AncillaMode::Measured;
  /// Input state of the non-entangled AAPT arm; see named_state().
  std::string aapt_state = "werner";
};

struct MethodSummary {
  std::string method;  // SQPT, EAPT, AAPT
  double mean_fidelity = 0.0;
  double std_fidelity = 0.0;
  int trials = 0;
  std::vector<double> fidelities;  // by trial index
  ProcessEstimate first_estimate;
};

struct ComparisonReport {
  ChiMatrix truth;
  std::vector<MethodSummary> methods;  // SQPT, EAPT, AAPT

  const MethodSummary& method(const std::string& name) const;
};

/// "bell" (phi-minus), "werner" (prepared through the branch pipeline),
/// "werner_target" (closed form) or "product" (|H><H| (x) |D><D|).
DensityMatrix named_state(const std::string& name);

/// Independent 64-bit seed for a (trial, stream) pair, via splitmix64.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t trial, std::uint64_t stream);

ComparisonReport run_method_comparison(const ComparisonConfig& config);

}  // namespace qpt
