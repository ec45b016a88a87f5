#pragma once

// Complex-matrix domain types shared by every part of the toolkit:
// density matrices (possibly sub-normalized), Stokes vectors, operator bases
// and the fixed single-qubit preparation basis {H, V, D, R}.
//
// Conventions used throughout:
//   * |H> = |0>, |V> = |1>.
//   * Composite systems are ordered A first, row-major: index = iA * dB + iB.
//   * Stokes axes (S1, S2, S3) = (H/V, D/A, R/L) correspond to (sz, sx, sy).

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpt {

using complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kPhysicalTol = 1e-9;

/// Thrown when an input violates a precondition that is numerical rather than
/// structural (non-PSD state, singular basis, vacuum state, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Subsystem { A, B };

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol = kAlgebraTol);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

namespace pauli {
ComplexMatrix identity();
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
/// {I, sx, sy, sz} in that order.
const std::array<ComplexMatrix, 4>& all();
}  // namespace pauli

/// Operator carrying a quantum state. The trace is the survival probability
/// (weight), so states after a lossy channel stay sub-normalized.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(ComplexMatrix m);

  static DensityMatrix from_ket(const ComplexVector& ket);

  const ComplexMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  int qubits() const { return dim() == 4 ? 2 : 1; }
  double weight() const { return m_.trace().real(); }

  /// Matrix divided by its weight. Throws for a vacuum state.
  ComplexMatrix normalized() const;

  double hermiticity_residual() const;
  /// Eigenvalues of the Hermitian part, ascending.
  Eigen::VectorXd eigenvalues() const;
  double min_eigenvalue() const;
  /// Hermitian, eigenvalues >= -1e-9 and trace <= 1 + 1e-9.
  bool is_physical() const;

 private:
  ComplexMatrix m_;
};

struct StokesVector {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  double norm() const;
  bool is_physical() const { return norm() <= 1.0 + kPhysicalTol; }
};

struct OperatorBasis {
  std::vector<ComplexMatrix> elements;
  bool orthonormal = false;

  /// {I, sx, sy, sz}/sqrt(2).
  static OperatorBasis normalized_pauli();
  /// {I, sx, sy, sz}, the fixed chi basis.
  static OperatorBasis pauli();

  /// Checks tr(M_j^dag M_k) = delta_jk.
  bool check_orthonormal(double tol = kAlgebraTol) const;
};

/// The single-qubit input basis {rho_H, rho_V, rho_D, rho_R}. It is not
/// orthogonal, so expansion goes through a precomputed dual basis.
class StatePreparationBasis {
 public:
  explicit StatePreparationBasis(std::vector<DensityMatrix> states);

  static const StatePreparationBasis& standard();

  const std::vector<DensityMatrix>& states() const { return states_; }
  std::size_t size() const { return states_.size(); }

  /// Coefficients c_k with sum_k c_k rho_k = m.
  ComplexVector expand(const ComplexMatrix& m) const;

 private:
  std::vector<DensityMatrix> states_;
  ComplexMatrix inverse_;  // inverse of [vec(rho_0) ... vec(rho_3)]
};

/// Projectors / kets for the six canonical polarizations.
ComplexVector ket_h();
ComplexVector ket_v();
ComplexVector ket_d();
ComplexVector ket_a();
ComplexVector ket_r();
ComplexVector ket_l();

StokesVector stokes_of(const DensityMatrix& rho);
/// rho = (I + s1 sz + s2 sx + s3 sy)/2. A vector longer than 1 gives an
/// operator with a negative eigenvalue, which is_physical() reports.
DensityMatrix density_from_stokes(const StokesVector& s);

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix partial_trace(const ComplexMatrix& m, Subsystem traced);
ComplexMatrix partial_transpose(const ComplexMatrix& m, Subsystem transposed);

ComplexVector expand_in_basis(const ComplexMatrix& m, const StatePreparationBasis& basis);

double state_fidelity(const DensityMatrix& r1, const DensityMatrix& r2);
double purity(const DensityMatrix& rho);

/// Hermitian square root with negative eigenvalues clipped to zero.
ComplexMatrix psd_sqrt(const ComplexMatrix& h);

}  // namespace qpt
