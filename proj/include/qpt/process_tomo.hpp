#pragma once

// Process reconstruction: standard QPT through the beta tensor, and
// ancilla-assisted QPT through the operator-Schmidt decomposition of the
// input state. Entanglement-assisted QPT is the special case of a maximally
// entangled input.

#include "qpt/channels.hpp"

#include <array>
#include <string>
#include <vector>

namespace qpt {

/// beta_{jk}^{mn}: E_m rho_j E_n^dag = sum_k beta_{jk}^{mn} rho_k.
///
/// flattened16 stores the same numbers with row index 4m + n and column index
/// 4j + k. With chi and c flattened the same way, c = flattened16^T chi.
class BetaTensor {
 public:
  BetaTensor();

  complex operator()(int j, int k, int m, int n) const { return flat_(4 * m + n, 4 * j + k); }
  const ComplexMatrix& flattened16() const { return flat_; }
  double condition_number() const { return condition_; }

  /// Solves flattened16^T chi = c for the flattened chi.
  ComplexVector solve(const ComplexVector& c) const;

 private:
  ComplexMatrix flat_;
  Eigen::PartialPivLU<ComplexMatrix> lu_;  // of flat_^T
  double condition_ = 0.0;
};

/// Shared instance for the fixed bases.
const BetaTensor& beta_tensor();

/// Unnormalized outputs E(rho_H), E(rho_V), E(rho_D), E(rho_R).
struct SqptInput {
  std::array<DensityMatrix, 4> outputs;
};

enum class ReconstructionMethod { SQPT, AAPT };
std::string to_string(ReconstructionMethod m);

struct ProcessEstimate {
  ChiMatrix chi;  // Hermitized
  ReconstructionMethod method = ReconstructionMethod::SQPT;
  double hermiticity_residual = 0.0;  // max |chi - chi^dag| / 2 before Hermitizing
  std::vector<double> input_state_schmidt_coefficients;  // AAPT only
};

/// Applies `ch` to the four preparation states.
SqptInput sqpt_input_from(const KrausChannel& ch);

ProcessEstimate sqpt(const SqptInput& input);

struct OperatorSchmidtDecomposition {
  std::vector<double> coefficients;  // descending
  std::vector<ComplexMatrix> ops_a;
  std::vector<ComplexMatrix> ops_b;

  ComplexMatrix reconstruct() const;
};

/// SVD of the coefficient matrix of m in the normalized product-Pauli basis.
OperatorSchmidtDecomposition operator_schmidt(const ComplexMatrix& m);
inline OperatorSchmidtDecomposition operator_schmidt(const DensityMatrix& sigma) {
  return operator_schmidt(sigma.matrix());
}

/// Number of coefficients above rel_tol times the largest one.
int schmidt_number(const OperatorSchmidtDecomposition& d, double rel_tol = 1e-10);

struct AaptUsability {
  bool usable = false;
  int schmidt_number = 0;
  std::vector<double> coefficients;
  double min_coefficient = 0.0;
};

AaptUsability aapt_usable(const DensityMatrix& sigma);

class UnusableAncillaState : public NumericalError {
 public:
  explicit UnusableAncillaState(std::vector<double> coefficients);
  const std::vector<double>& coefficients() const { return coefficients_; }

 private:
  std::vector<double> coefficients_;
};

/// Reconstructs E from sigma and sigma' = (E (x) I)(sigma). Positivity of the
/// result is not enforced.
ProcessEstimate aapt(const DensityMatrix& sigma, const DensityMatrix& sigma_prime);

}  // namespace qpt
