#pragma once

// Comparing processes and mapping how they deform the Poincare sphere.

#include "qpt/channels.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qpt {

/// Choi matrix (E (x) I)(|Omega><Omega|), |Omega> = |00> + |11>.
ComplexMatrix choi_from_chi(const ChiMatrix& chi);

struct ProcessFidelity {
  double fidelity = 0.0;
  /// Frobenius distance moved by the PSD projection of each trace-normalized
  /// Choi matrix. Zero for completely positive inputs.
  double projection_distance_a = 0.0;
  double projection_distance_b = 0.0;
};

/// State fidelity between the trace-normalized Choi matrices. Inputs that are
/// not completely positive are first projected onto the PSD cone.
ProcessFidelity process_fidelity_detailed(const ChiMatrix& a, const ChiMatrix& b);
double process_fidelity(const ChiMatrix& a, const ChiMatrix& b);

struct SphereMapSample {
  int lat_index = 0;
  int lon_index = 0;
  StokesVector input_stokes;
  StokesVector output_stokes;  // of the renormalized output
  double transmission = 0.0;
  double output_purity = 0.0;
  bool annihilated = false;  // transmission < 1e-12, output undefined
  bool pole = false;
};

struct SphereMesh {
  int n_lat = 0;
  int n_lon = 0;
  /// Grid order: latitude major. Each pole appears once with lon_index 0.
  std::vector<SphereMapSample> samples;
  /// Images of H, R, V, A in that order.
  std::vector<SphereMapSample> markers;
};

inline constexpr int kDefaultLatitudes = 33;
inline constexpr int kDefaultLongitudes = 64;

/// Latitude is measured from the S1 axis (H pole) so that the poles are H and V.
SphereMesh sphere_map(const KrausChannel& ch, int n_lat = kDefaultLatitudes,
                      int n_lon = kDefaultLongitudes);
/// Same map from a chi matrix; works for reconstructed, non-positive chi.
SphereMesh sphere_map(const ChiMatrix& chi, int n_lat = kDefaultLatitudes,
                      int n_lon = kDefaultLongitudes);

void write_sphere_csv(std::ostream& os, const SphereMesh& mesh);

struct ChiReport {
  Eigen::VectorXd eigenvalues;  // ascending
  double min_eigenvalue = 0.0;
  double trace = 0.0;
  double hermiticity_residual = 0.0;
  double max_imaginary = 0.0;
  bool completely_positive = true;
  std::string verdict;
};

ChiReport chi_report(const ChiMatrix& chi);

}  // namespace qpt
