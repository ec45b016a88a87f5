#include "qpt/process_tomo.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qpt {

namespace {

ChiMatrix chi_from_flat(const ComplexVector& flat) {
  ChiMatrix chi;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) chi.entries(m, n) = flat(4 * m + n);
  return chi;
}

std::string coefficient_list(const std::vector<double>& c) {
  std::string s = "[";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(c[i]);
  }
  return s + "]";
}

}  // namespace

// ---------------------------------------------------------------------------
// beta tensor

BetaTensor::BetaTensor() : flat_(16, 16) {
  const auto& p = pauli::all();
  const auto& basis = StatePreparationBasis::standard();
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      for (int j = 0; j < 4; ++j) {
        const ComplexVector c =
            basis.expand(p[m] * basis.states()[j].matrix() * p[n].adjoint());
        for (int k = 0; k < 4; ++k) flat_(4 * m + n, 4 * j + k) = c(k);
      }
    }
  }
  const Eigen::JacobiSVD<ComplexMatrix> svd(flat_);
  const auto& sv = svd.singularValues();
  condition_ = sv(0) / sv(sv.size() - 1);
  if (!std::isfinite(condition_) || condition_ > 1e12) {
    throw NumericalError("beta tensor is singular; basis conventions are inconsistent");
  }
  lu_.compute(flat_.transpose());
}

ComplexVector BetaTensor::solve(const ComplexVector& c) const { return lu_.solve(c); }

const BetaTensor& beta_tensor() {
  static const BetaTensor beta;
  return beta;
}

std::string to_string(ReconstructionMethod m) {
  return m == ReconstructionMethod::SQPT ? "SQPT" : "AAPT";
}

// ---------------------------------------------------------------------------
// SQPT

SqptInput sqpt_input_from(const KrausChannel& ch) {
  const auto& states = StatePreparationBasis::standard().states();
  return {{apply(ch, states[0]), apply(ch, states[1]), apply(ch, states[2]),
           apply(ch, states[3])}};
}

ProcessEstimate sqpt(const SqptInput& input) {
  const auto& basis = StatePreparationBasis::standard();
  ComplexVector c(16);
  for (int j = 0; j < 4; ++j) {
    if (input.outputs[j].dim() != 2) throw std::invalid_argument("sqpt needs single-qubit outputs");
    c.segment(4 * j, 4) = basis.expand(input.outputs[j].matrix());
  }
  const ChiMatrix raw = chi_from_flat(beta_tensor().solve(c));
  ProcessEstimate est;
  est.chi = raw.hermitized();
  est.method = ReconstructionMethod::SQPT;
  est.hermiticity_residual = raw.hermiticity_residual();
  return est;
}

// ---------------------------------------------------------------------------
// Operator-Schmidt decomposition

ComplexMatrix OperatorSchmidtDecomposition::reconstruct() const {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  for (std::size_t l = 0; l < coefficients.size(); ++l) {
    m += coefficients[l] * tensor(ops_a[l], ops_b[l]);
  }
  return m;
}

OperatorSchmidtDecomposition operator_schmidt(const ComplexMatrix& m) {
  if (m.rows() != 4 || m.cols() != 4) throw std::invalid_argument("operator_schmidt needs 4x4");
  const auto basis = OperatorBasis::normalized_pauli().elements;

  ComplexMatrix coeff(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      coeff(a, b) = (tensor(basis[a], basis[b]).adjoint() * m).trace();

  const Eigen::JacobiSVD<ComplexMatrix> svd(coeff, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ComplexMatrix u = svd.matrixU();
  ComplexMatrix v = svd.matrixV();
  const Eigen::VectorXd s = svd.singularValues();

  // Fix the phase freedom: first significant entry of each left vector is real
  // and positive. The same phase on the right vector keeps u v^dag unchanged.
  for (int l = 0; l < 4; ++l) {
    for (int a = 0; a < 4; ++a) {
      if (std::abs(u(a, l)) > 1e-12) {
        const complex phase = std::conj(u(a, l)) / std::abs(u(a, l));
        u.col(l) *= phase;
        v.col(l) *= phase;
        break;
      }
    }
  }

  std::array<int, 4> order{0, 1, 2, 3};
  const double tie = 1e-12 * std::max(s(0), 1e-300);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    if (std::abs(s(x) - s(y)) > tie) return s(x) > s(y);
    for (int a = 0; a < 4; ++a) {
      const double rx = u(a, x).real();
      const double ry = u(a, y).real();
      if (std::abs(rx - ry) > 1e-12) return rx < ry;
    }
    return false;
  });

  OperatorSchmidtDecomposition d;
  for (int l : order) {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    ComplexMatrix b = ComplexMatrix::Zero(2, 2);
    for (int k = 0; k < 4; ++k) {
      a += u(k, l) * basis[k];
      b += std::conj(v(k, l)) * basis[k];
    }
    d.coefficients.push_back(s(l));
    d.ops_a.push_back(std::move(a));
    d.ops_b.push_back(std::move(b));
  }
  return d;
}

int schmidt_number(const OperatorSchmidtDecomposition& d, double rel_tol) {
  if (d.coefficients.empty()) return 0;
  const double top = *std::max_element(d.coefficients.begin(), d.coefficients.end());
  if (!(top > 0.0)) return 0;
  return static_cast<int>(std::count_if(d.coefficients.begin(), d.coefficients.end(),
                                        [&](double c) { return c > rel_tol * top; }));
}

AaptUsability aapt_usable(const DensityMatrix& sigma) {
  if (sigma.dim() != 4) throw std::invalid_argument("aapt_usable needs a two-qubit state");
  const auto d = operator_schmidt(sigma);
  AaptUsability u;
  u.schmidt_number = schmidt_number(d);
  u.usable = u.schmidt_number == 4;
  u.coefficients = d.coefficients;
  u.min_coefficient = *std::min_element(d.coefficients.begin(), d.coefficients.end());
  return u;
}

UnusableAncillaState::UnusableAncillaState(std::vector<double> coefficients)
    : NumericalError("state not usable for AAPT: operator-Schmidt coefficients " +
                     coefficient_list(coefficients)),
      coefficients_(std::move(coefficients)) {}

// ---------------------------------------------------------------------------
// AAPT

ProcessEstimate aapt(const DensityMatrix& sigma, const DensityMatrix& sigma_prime) {
  if (sigma.dim() != 4 || sigma_prime.dim() != 4) {
    throw std::invalid_argument("aapt needs two-qubit input and output states");
  }
  const auto d = operator_schmidt(sigma);
  if (schmidt_number(d) != 4) throw UnusableAncillaState(d.coefficients);

  // Action of the process on the operator basis {A_m}.
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  std::array<ComplexMatrix, 4> image;
  for (int m = 0; m < 4; ++m) {
    image[m] = partial_trace(tensor(id, d.ops_b[m].adjoint()) * sigma_prime.matrix(),
                             Subsystem::B) /
               d.coefficients[m];
  }

  // Evaluate on the preparation states by linearity and hand over to SQPT.
  const auto& states = StatePreparationBasis::standard().states();
  SqptInput input{{DensityMatrix(ComplexMatrix::Zero(2, 2)), DensityMatrix(ComplexMatrix::Zero(2, 2)),
                   DensityMatrix(ComplexMatrix::Zero(2, 2)), DensityMatrix(ComplexMatrix::Zero(2, 2))}};
  for (int j = 0; j < 4; ++j) {
    ComplexMatrix out = ComplexMatrix::Zero(2, 2);
    for (int m = 0; m < 4; ++m) {
      out += (d.ops_a[m].adjoint() * states[j].matrix()).trace() * image[m];
    }
    input.outputs[j] = DensityMatrix(std::move(out));
  }
  ProcessEstimate est = sqpt(input);
  est.method = ReconstructionMethod::AAPT;
  est.input_state_schmidt_coefficients = d.coefficients;
  return est;
}

}  // namespace qpt
