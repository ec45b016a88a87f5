#include "qpt/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace qpt {

namespace {

const complex kI{0.0, 1.0};

ComplexVector make_ket(complex h, complex v) {
  ComplexVector k(2);
  k << h, v;
  return k;
}

Eigen::SelfAdjointEigenSolver<ComplexMatrix> hermitian_eigen(const ComplexMatrix& m,
                                                             bool vectors) {
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  return Eigen::SelfAdjointEigenSolver<ComplexMatrix>(
      h, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
}

// Column-stacked vec of a square matrix, consistent with the inverse_ layout.
ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

}  // namespace

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  return (a - b).cwiseAbs().maxCoeff();
}

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  return max_abs_diff(a, b) <= tol;
}

namespace pauli {

ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }

ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix y() {
  ComplexMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}

ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

const std::array<ComplexMatrix, 4>& all() {
  static const std::array<ComplexMatrix, 4> basis{identity(), x(), y(), z()};
  return basis;
}

}  // namespace pauli

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || (m_.rows() != 2 && m_.rows() != 4)) {
    throw std::invalid_argument("density matrix must be 2x2 or 4x4, got " +
                                std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
  }
}

DensityMatrix DensityMatrix::from_ket(const ComplexVector& ket) {
  return DensityMatrix(ket * ket.adjoint());
}

ComplexMatrix DensityMatrix::normalized() const {
  const double w = weight();
  if (!(w > 0.0)) throw NumericalError("vacuum state has no normalized form");
  return m_ / w;
}

double DensityMatrix::hermiticity_residual() const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  return hermitian_eigen(m_, false).eigenvalues();
}

double DensityMatrix::min_eigenvalue() const { return eigenvalues().minCoeff(); }

bool DensityMatrix::is_physical() const {
  return hermiticity_residual() <= kPhysicalTol && min_eigenvalue() >= -kPhysicalTol &&
         weight() <= 1.0 + kPhysicalTol;
}

double StokesVector::norm() const { return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3); }

// ---------------------------------------------------------------------------
// Bases

OperatorBasis OperatorBasis::pauli() {
  const auto& p = pauli::all();
  return OperatorBasis{{p.begin(), p.end()}, false};
}

OperatorBasis OperatorBasis::normalized_pauli() {
  OperatorBasis b = pauli();
  for (auto& m : b.elements) m /= std::sqrt(2.0);
  b.orthonormal = true;
  return b;
}

bool OperatorBasis::check_orthonormal(double tol) const {
  for (std::size_t j = 0; j < elements.size(); ++j) {
    for (std::size_t k = 0; k < elements.size(); ++k) {
      const complex ip = (elements[j].adjoint() * elements[k]).trace();
      if (std::abs(ip - (j == k ? 1.0 : 0.0)) > tol) return false;
    }
  }
  return true;
}

ComplexVector ket_h() { return make_ket(1.0, 0.0); }
ComplexVector ket_v() { return make_ket(0.0, 1.0); }
ComplexVector ket_d() { return make_ket(M_SQRT1_2, M_SQRT1_2); }
ComplexVector ket_a() { return make_ket(M_SQRT1_2, -M_SQRT1_2); }
ComplexVector ket_r() { return make_ket(M_SQRT1_2, kI * M_SQRT1_2); }
ComplexVector ket_l() { return make_ket(M_SQRT1_2, -kI * M_SQRT1_2); }

StatePreparationBasis::StatePreparationBasis(std::vector<DensityMatrix> states)
    : states_(std::move(states)) {
  if (states_.empty()) throw std::invalid_argument("empty preparation basis");
  const int d = states_.front().dim();
  const auto n = static_cast<Eigen::Index>(d) * d;
  if (static_cast<Eigen::Index>(states_.size()) != n) {
    throw std::invalid_argument("preparation basis needs d^2 states");
  }
  ComplexMatrix cols(n, n);
  for (Eigen::Index k = 0; k < n; ++k) cols.col(k) = vec(states_[k].matrix());
  Eigen::FullPivLU<ComplexMatrix> lu(cols);
  if (!lu.isInvertible()) throw NumericalError("preparation basis is singular");
  inverse_ = lu.inverse();
}

const StatePreparationBasis& StatePreparationBasis::standard() {
  static const StatePreparationBasis basis({
      DensityMatrix::from_ket(ket_h()),
      DensityMatrix::from_ket(ket_v()),
      DensityMatrix::from_ket(ket_d()),
      DensityMatrix::from_ket(ket_r()),
  });
  return basis;
}

ComplexVector StatePreparationBasis::expand(const ComplexMatrix& m) const {
  if (m.size() != inverse_.cols()) {
    throw std::invalid_argument("operator dimension does not match preparation basis");
  }
  return inverse_ * vec(m);
}

ComplexVector expand_in_basis(const ComplexMatrix& m, const StatePreparationBasis& basis) {
  return basis.expand(m);
}

// ---------------------------------------------------------------------------
// Stokes

StokesVector stokes_of(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw std::invalid_argument("Stokes vector needs a single-qubit state");
  if (!(rho.weight() > 0.0)) throw NumericalError("vacuum state has no Stokes vector");
  const ComplexMatrix r = rho.normalized();
  return {(r * pauli::z()).trace().real(), (r * pauli::x()).trace().real(),
          (r * pauli::y()).trace().real()};
}

DensityMatrix density_from_stokes(const StokesVector& s) {
  ComplexMatrix m =
      0.5 * (pauli::identity() + s.s1 * pauli::z() + s.s2 * pauli::x() + s.s3 * pauli::y());
  return DensityMatrix(std::move(m));
}

// ---------------------------------------------------------------------------
// Composite systems

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, Subsystem traced) {
  if (m.rows() != 4 || m.cols() != 4) throw std::invalid_argument("partial_trace needs 4x4");
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        if (traced == Subsystem::B) {
          out(i, j) += m(i * 2 + k, j * 2 + k);
        } else {
          out(i, j) += m(k * 2 + i, k * 2 + j);
        }
      }
    }
  }
  return out;
}

ComplexMatrix partial_transpose(const ComplexMatrix& m, Subsystem transposed) {
  if (m.rows() != 4 || m.cols() != 4) {
    throw std::invalid_argument("partial_transpose needs 4x4");
  }
  ComplexMatrix out(4, 4);
  for (int ia = 0; ia < 2; ++ia)
    for (int ib = 0; ib < 2; ++ib)
      for (int ja = 0; ja < 2; ++ja)
        for (int jb = 0; jb < 2; ++jb) {
          const complex v = m(ia * 2 + ib, ja * 2 + jb);
          if (transposed == Subsystem::B) {
            out(ia * 2 + jb, ja * 2 + ib) = v;
          } else {
            out(ja * 2 + ib, ia * 2 + jb) = v;
          }
        }
  return out;
}

// ---------------------------------------------------------------------------
// Figures of merit

ComplexMatrix psd_sqrt(const ComplexMatrix& h) {
  auto es = hermitian_eigen(h, true);
  Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

// Square root with eigenvalues at rounding level (relative 1e-14) set to zero.
ComplexMatrix floored_sqrt(const ComplexMatrix& h) {
  auto es = hermitian_eigen(h, true);
  const double floor = 1e-14 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::VectorXd roots = es.eigenvalues().unaryExpr([&](double v) { return v > floor ? std::sqrt(v) : 0.0; });
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double state_fidelity(const DensityMatrix& r1, const DensityMatrix& r2) {
  if (r1.dim() != r2.dim()) throw std::invalid_argument("state_fidelity: dimension mismatch");
  const ComplexMatrix a = r1.normalized();
  const ComplexMatrix b = r2.normalized();
  for (const ComplexMatrix* m : {&a, &b}) {
    const double lo = hermitian_eigen(*m, false).eigenvalues().minCoeff();
    if (lo < -kPhysicalTol) {
      throw NumericalError("state_fidelity: input is not positive semidefinite (eigenvalue " +
                           std::to_string(lo) + ")");
    }
  }
  // Trace norm of sqrt(a) sqrt(b) via singular values, so that rounding-level
  // eigenvalues are never square-rooted.
  const ComplexMatrix m = floored_sqrt(a) * floored_sqrt(b);
  const double t = Eigen::JacobiSVD<ComplexMatrix>(m).singularValues().sum();
  return std::clamp(t * t, 0.0, 1.0);
}

double purity(const DensityMatrix& rho) {
  const ComplexMatrix r = rho.normalized();
  return (r * r).trace().real();
}

}  // namespace qpt
