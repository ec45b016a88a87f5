#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's conversion routines; everything is spelled out with explicit
// index loops or closed forms.

#include "qpt/channels.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using qpt::complex;
using qpt::ComplexMatrix;
using qpt::ComplexVector;

inline ComplexMatrix mat2(complex a, complex b, complex c, complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline std::vector<ComplexMatrix> paulis() {
  const complex i(0.0, 1.0);
  return {mat2(1, 0, 0, 1), mat2(0, 1, 1, 0), mat2(0, -i, i, 0), mat2(1, 0, 0, -1)};
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

/// tr_B or tr_A of a 4x4 operator by explicit index sums.
inline ComplexMatrix trace_b(const ComplexMatrix& m) {
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      for (int b = 0; b < 2; ++b) out(a, c) += m(2 * a + b, 2 * c + b);
  return out;
}
inline ComplexMatrix trace_a(const ComplexMatrix& m) {
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int b = 0; b < 2; ++b)
    for (int d = 0; d < 2; ++d)
      for (int a = 0; a < 2; ++a) out(b, d) += m(2 * a + b, 2 * a + d);
  return out;
}

inline ComplexMatrix apply_kraus(const std::vector<ComplexMatrix>& ks, const ComplexMatrix& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : ks) out += k * rho * k.adjoint();
  return out;
}

/// chi from the superoperator: solve sum_mn chi_mn (P_m (x) conj(P_n)) = sum_j E_j (x) conj(E_j)
/// as a 16x16 linear system in the entries of chi.
inline ComplexMatrix chi_from_superoperator(const std::vector<ComplexMatrix>& ks) {
  const auto p = paulis();
  ComplexMatrix target = ComplexMatrix::Zero(4, 4);
  for (const auto& k : ks) target += kron(k, k.conjugate());
  ComplexMatrix system(16, 16);
  ComplexVector rhs(16);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      rhs(4 * r + c) = target(r, c);
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) system(4 * r + c, 4 * m + n) = kron(p[m], p[n].conjugate())(r, c);
    }
  const ComplexVector x = system.fullPivLu().solve(rhs);
  ComplexMatrix chi(4, 4);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) chi(m, n) = x(4 * m + n);
  return chi;
}

/// Unnormalized Choi matrix sum_ij E(|i><j|) (x) |i><j|.
inline ComplexMatrix choi(const std::vector<ComplexMatrix>& ks) {
  ComplexMatrix out = ComplexMatrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      ComplexMatrix e = ComplexMatrix::Zero(2, 2);
      e(i, j) = 1.0;
      out += kron(apply_kraus(ks, e), e);
    }
  return out;
}

/// Fidelity between a pure state |psi><psi| (normalized) and a normalized PSD rho.
inline double pure_fidelity(const ComplexVector& psi, const ComplexMatrix& rho) {
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

inline ComplexMatrix random_gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g;
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = complex(g(rng), g(rng));
  return m;
}

/// Random Kraus set: a Stinespring isometry cut into `count` blocks, scaled by
/// sqrt(transmission) so that sum E^dag E = transmission * I.
inline std::vector<ComplexMatrix> random_kraus(std::mt19937_64& rng, int count,
                                               double transmission = 1.0) {
  const ComplexMatrix g = random_gaussian(rng, 2 * count, 2);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(2 * count, 2);
  std::vector<ComplexMatrix> ks;
  for (int k = 0; k < count; ++k) ks.push_back(std::sqrt(transmission) * q.block(2 * k, 0, 2, 2));
  return ks;
}

/// Random channel with polarization-dependent loss: a random TP channel
/// followed by a random diagonal attenuator.
inline std::vector<ComplexMatrix> random_lossy_kraus(std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const ComplexMatrix att = mat2(std::sqrt(u(rng)), 0, 0, std::sqrt(u(rng)));
  auto ks = random_kraus(rng, count);
  for (auto& k : ks) k = att * k;
  return ks;
}

/// Ginibre random density matrix of the given dimension, trace 1.
inline ComplexMatrix random_state(std::mt19937_64& rng, int dim, int rank = -1) {
  const ComplexMatrix g = random_gaussian(rng, dim, rank < 0 ? dim : rank);
  ComplexMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline ComplexVector random_ket(std::mt19937_64& rng, int dim) {
  ComplexVector v = random_gaussian(rng, dim, 1).col(0);
  return v / v.norm();
}

inline double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace oracle
