#pragma once

// Photon-counting polarization tomography: canonical analyzer settings,
// exact and Poisson-sampled counts, and density-matrix reconstruction by
// Stokes inversion or maximum likelihood.

#include "qpt/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qpt {

enum class Polarization { H, V, D, A, R, L };

char to_char(Polarization p);
Polarization polarization_from_char(char c);

/// Analyzer setting for one or two photons, e.g. (H) or (H, D).
class MeasurementSetting {
 public:
  MeasurementSetting() = default;
  explicit MeasurementSetting(Polarization a) : labels_{a} {}
  MeasurementSetting(Polarization a, Polarization b) : labels_{a, b} {}

  const std::vector<Polarization>& labels() const { return labels_; }
  int qubits() const { return static_cast<int>(labels_.size()); }
  std::string to_string() const;

  friend bool operator==(const MeasurementSetting&, const MeasurementSetting&) = default;

 private:
  std::vector<Polarization> labels_;
};

struct CountRecord {
  MeasurementSetting setting;
  std::int64_t counts = 0;
  std::int64_t reference_counts = 1;
};

struct NoiseConfig {
  std::int64_t counts_per_setting = 13000;
  std::uint64_t seed = 1;
};

ComplexMatrix projector(Polarization p);
ComplexMatrix projector(const MeasurementSetting& s);

/// tr(rho Pi). Includes the state's weight, so lossy states give smaller values.
double exact_probability(const DensityMatrix& rho, const MeasurementSetting& s);

/// Poisson(counts_per_setting * p) per setting, drawn in list order from a
/// generator seeded with noise.seed.
std::vector<CountRecord> simulate_counts(const DensityMatrix& rho,
                                         const std::vector<MeasurementSetting>& settings,
                                         const NoiseConfig& noise);

/// Noise-free records rounded to the nearest integer; with a large
/// `counts_per_setting` these stand in for infinite statistics.
std::vector<CountRecord> exact_counts(const DensityMatrix& rho,
                                      const std::vector<MeasurementSetting>& settings,
                                      std::int64_t counts_per_setting);

/// [H, V, D, A, R, L]
std::vector<MeasurementSetting> settings_single();
/// All 36 pairs from the six analyzers, first photon major.
std::vector<MeasurementSetting> settings_pair();
/// {H, V, D, R} x {H, V, D, R}
std::vector<MeasurementSetting> settings_pair_16();

struct LinearEstimate {
  DensityMatrix rho;
  bool physical = true;
};

/// Stokes inversion from the 6 (one qubit) or 36 (two qubits) settings.
/// Weight is the mean pair flux over the reference flux.
LinearEstimate linear_reconstruct(const std::vector<CountRecord>& records);

/// Least-squares inversion of tr(rho Pi_i) = n_i / N_i for any
/// tomographically complete setting list.
DensityMatrix least_squares_reconstruct(const std::vector<CountRecord>& records, int dim);

struct MleOptions {
  int max_iterations = 500;
  double step_tolerance = 1e-9;
  double gradient_tolerance = 1e-7;
};

struct MleResult {
  DensityMatrix rho;
  int iterations = 0;
  /// Normalized negative log-likelihood at the starting point and at the result.
  double start_objective = 0.0;
  double final_objective = 0.0;
};

class MleNonConvergence : public NumericalError {
 public:
  explicit MleNonConvergence(int iterations);
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

/// Poisson maximum-likelihood estimate over all PSD rho (weight included,
/// dim^2 real parameters), so rho = T^dag T for a lower-triangular T. Newton
/// iterations on a log-det barrier path, started from the linear estimate
/// projected to a physical state.
MleResult mle_reconstruct_detailed(const std::vector<CountRecord>& records, int dim,
                                   const MleOptions& options = {});
DensityMatrix mle_reconstruct(const std::vector<CountRecord>& records, int dim);

/// sum_i (n_bar_i - n_i log n_bar_i) / sum_i N_i with n_bar_i = N_i tr(rho Pi_i).
/// Infinite when some n_bar_i = 0 while n_i > 0.
double poisson_objective(const DensityMatrix& rho, const std::vector<CountRecord>& records);

/// Clips negative eigenvalues and rescales to the original trace.
DensityMatrix project_physical(const DensityMatrix& rho);

void write_counts_csv(std::ostream& os, const std::vector<CountRecord>& records);
std::vector<CountRecord> read_counts_csv(std::istream& is);

}  // namespace qpt
