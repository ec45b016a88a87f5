#include "qpt/channels.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace qpt {

namespace {

constexpr double kChiClip = 1e-6;

void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got " +
                                std::to_string(v));
  }
}

}  // namespace

KrausChannel::KrausChannel(std::vector<ComplexMatrix> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw std::invalid_argument("Kraus channel needs at least one element");
  const auto d = elements_.front().rows();
  for (const auto& e : elements_) {
    if (e.rows() != d || e.cols() != d) {
      throw std::invalid_argument("Kraus elements must be square and of equal size");
    }
  }
  const ComplexMatrix f = effect();
  const double top =
      Eigen::SelfAdjointEigenSolver<ComplexMatrix>(0.5 * (f + f.adjoint()), Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  if (top > 1.0 + kPhysicalTol) {
    throw std::invalid_argument("Kraus elements are trace increasing (max eigenvalue of "
                                "sum E^dag E is " + std::to_string(top) + ")");
  }
}

ComplexMatrix KrausChannel::effect() const {
  ComplexMatrix f = ComplexMatrix::Zero(dim(), dim());
  for (const auto& e : elements_) f += e.adjoint() * e;
  return f;
}

bool KrausChannel::is_trace_preserving(double tol) const {
  return approx_equal(effect(), ComplexMatrix::Identity(dim(), dim()), tol);
}

const std::array<std::string, 4>& ChiMatrix::labels() {
  static const std::array<std::string, 4> l{"I", "X", "Y", "Z"};
  return l;
}

double ChiMatrix::hermiticity_residual() const {
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

Eigen::VectorXd ChiMatrix::eigenvalues() const {
  return Eigen::SelfAdjointEigenSolver<ComplexMatrix>(hermitized().entries,
                                                      Eigen::EigenvaluesOnly)
      .eigenvalues();
}

ChiMatrix ChiMatrix::hermitized() const { return {0.5 * (entries + entries.adjoint())}; }

NotCompletelyPositive::NotCompletelyPositive(double eigenvalue)
    : NumericalError("chi matrix is not completely positive (eigenvalue " +
                     std::to_string(eigenvalue) + ")"),
      eigenvalue_(eigenvalue) {}

DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho) {
  if (ch.dim() != rho.dim()) throw std::invalid_argument("apply: dimension mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(rho.dim(), rho.dim());
  for (const auto& e : ch.elements()) out += e * rho.matrix() * e.adjoint();
  return DensityMatrix(std::move(out));
}

DensityMatrix apply_extended(const KrausChannel& ch, const DensityMatrix& rho, Subsystem on) {
  if (rho.dim() != 4 || ch.dim() != 2) {
    throw std::invalid_argument("apply_extended: needs a qubit channel and a two-qubit state");
  }
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  ComplexMatrix out = ComplexMatrix::Zero(4, 4);
  for (const auto& e : ch.elements()) {
    const ComplexMatrix big = on == Subsystem::A ? tensor(e, id) : tensor(id, e);
    out += big * rho.matrix() * big.adjoint();
  }
  return DensityMatrix(std::move(out));
}

ComplexMatrix apply_chi(const ChiMatrix& chi, const ComplexMatrix& rho) {
  const auto& p = pauli::all();
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      if (chi.entries(m, n) == 0.0) continue;
      out += chi.entries(m, n) * p[m] * rho * p[n].adjoint();
    }
  }
  return out;
}

ChiMatrix kraus_to_chi(const KrausChannel& ch) {
  const auto& p = pauli::all();
  ChiMatrix chi;
  for (const auto& e : ch.elements()) {
    ComplexVector coeff(4);
    for (int m = 0; m < 4; ++m) coeff(m) = (p[m].adjoint() * e).trace() / 2.0;
    chi.entries += coeff * coeff.adjoint();
  }
  return chi;
}

KrausChannel chi_to_kraus(const ChiMatrix& chi) {
  const auto& p = pauli::all();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(chi.hermitized().entries);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  if (lambda.minCoeff() < -kChiClip) throw NotCompletelyPositive(lambda.minCoeff());

  std::vector<ComplexMatrix> elements;
  // Descending so the dominant operation element comes first.
  for (int k = 3; k >= 0; --k) {
    if (lambda(k) <= 0.0) continue;
    ComplexMatrix e = ComplexMatrix::Zero(2, 2);
    for (int m = 0; m < 4; ++m) e += es.eigenvectors()(m, k) * p[m];
    elements.push_back(std::sqrt(lambda(k)) * e);
  }
  if (elements.empty()) elements.push_back(ComplexMatrix::Zero(2, 2));
  return KrausChannel(std::move(elements));
}

double transmission(const KrausChannel& ch, const DensityMatrix& rho) {
  return apply(ch, rho).weight() / rho.weight();
}

KrausChannel compose(const KrausChannel& first, const KrausChannel& second) {
  if (first.dim() != second.dim()) throw std::invalid_argument("compose: dimension mismatch");
  std::vector<ComplexMatrix> out;
  out.reserve(first.elements().size() * second.elements().size());
  for (const auto& f : second.elements()) {
    for (const auto& e : first.elements()) out.push_back(f * e);
  }
  return KrausChannel(std::move(out));
}

namespace channels {

KrausChannel identity() { return KrausChannel({ComplexMatrix::Identity(2, 2)}); }

ComplexMatrix waveplate_unitary(double retardance, double axis_angle) {
  const double c = std::cos(axis_angle);
  const double s = std::sin(axis_angle);
  ComplexMatrix rot(2, 2);
  rot << c, -s, s, c;
  ComplexMatrix phase = ComplexMatrix::Zero(2, 2);
  phase(0, 0) = 1.0;
  phase(1, 1) = std::polar(1.0, retardance);
  return rot * phase * rot.adjoint();
}

KrausChannel waveplate(double retardance, double axis_angle) {
  return KrausChannel({waveplate_unitary(retardance, axis_angle)});
}

KrausChannel rotator(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  ComplexMatrix u(2, 2);
  u << c, -s, s, c;
  return KrausChannel({u});
}

KrausChannel dephaser(double p) {
  require_unit_interval(p, "dephasing strength");
  return KrausChannel({std::sqrt(1.0 - p / 2.0) * pauli::identity(),
                       std::sqrt(p / 2.0) * pauli::z()});
}

KrausChannel coherent_partial_polarizer(double t_h, double t_v) {
  require_unit_interval(t_h, "t_h");
  require_unit_interval(t_v, "t_v");
  ComplexMatrix k = ComplexMatrix::Zero(2, 2);
  k(0, 0) = std::sqrt(t_h);
  k(1, 1) = std::sqrt(t_v);
  return KrausChannel({k});
}

KrausChannel incoherent_partial_polarizer(double p) {
  require_unit_interval(p, "polarizer insertion probability");
  ComplexMatrix proj_h = ComplexMatrix::Zero(2, 2);
  proj_h(0, 0) = 1.0;
  return KrausChannel({std::sqrt(1.0 - p) * pauli::identity(), std::sqrt(p) * proj_h});
}

}  // namespace channels

}  // namespace qpt
