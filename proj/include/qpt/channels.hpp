#pragma once

// Single-qubit processes in operator-sum (Kraus) form and as chi matrices in
// the fixed basis {I, sx, sy, sz}, plus constructors for the optical elements
// used in the experiments: waveplates, rotators, the quartz decoherer and
// partial polarizers.

#include "qpt/core.hpp"

#include <string>
#include <vector>

namespace qpt {

class KrausChannel {
 public:
  KrausChannel() = default;
  /// Validates sum_j E_j^dag E_j <= I (eigenvalues <= 1 + 1e-9).
  explicit KrausChannel(std::vector<ComplexMatrix> elements);

  const std::vector<ComplexMatrix>& elements() const { return elements_; }
  int dim() const { return elements_.empty() ? 0 : static_cast<int>(elements_.front().rows()); }

  /// sum_j E_j^dag E_j
  ComplexMatrix effect() const;
  bool is_trace_preserving(double tol = kPhysicalTol) const;

 private:
  std::vector<ComplexMatrix> elements_;
};

/// chi matrix indexed by (I, X, Y, Z). Its trace equals the transmission
/// averaged over input states.
struct ChiMatrix {
  ComplexMatrix entries = ComplexMatrix::Zero(4, 4);

  static const std::array<std::string, 4>& labels();

  double trace() const { return entries.trace().real(); }
  double hermiticity_residual() const;
  /// Eigenvalues of the Hermitian part, ascending.
  Eigen::VectorXd eigenvalues() const;
  ChiMatrix hermitized() const;
};

/// Raised by chi_to_kraus when chi has an eigenvalue below -1e-6.
class NotCompletelyPositive : public NumericalError {
 public:
  explicit NotCompletelyPositive(double eigenvalue);
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho);
/// (E (x) I)(rho) on a two-qubit state; B is untouched.
DensityMatrix apply_extended(const KrausChannel& ch, const DensityMatrix& rho,
                             Subsystem on = Subsystem::A);
/// sum_mn chi_mn E_m rho E_n^dag, also valid for non-positive chi.
ComplexMatrix apply_chi(const ChiMatrix& chi, const ComplexMatrix& rho);

ChiMatrix kraus_to_chi(const KrausChannel& ch);
KrausChannel chi_to_kraus(const ChiMatrix& chi);

double transmission(const KrausChannel& ch, const DensityMatrix& rho);

/// Elements of `first` act before those of `second`.
KrausChannel compose(const KrausChannel& first, const KrausChannel& second);

namespace channels {

KrausChannel identity();
/// Linear retarder: phase `retardance` between fast axis at `axis_angle` and
/// the orthogonal axis. waveplate(pi, pi/4) is sx, waveplate(pi, 0) is sz.
KrausChannel waveplate(double retardance, double axis_angle);
ComplexMatrix waveplate_unitary(double retardance, double axis_angle);
/// Optically active element: rotates linear polarization by `angle`.
KrausChannel rotator(double angle);
/// HV dephasing. Off-diagonal elements are multiplied by (1 - p).
KrausChannel dephaser(double p);
KrausChannel coherent_partial_polarizer(double t_h, double t_v);
/// Horizontal polarizer inserted with probability p.
KrausChannel incoherent_partial_polarizer(double p);

}  // namespace channels

}  // namespace qpt
