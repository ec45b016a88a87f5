#include "qpt/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <ostream>

namespace qpt {

namespace {

constexpr double kCpTol = 1e-6;

struct Projected {
  ComplexMatrix matrix;
  double distance = 0.0;
};

Projected normalized_psd(const ComplexMatrix& choi) {
  const double tr = choi.trace().real();
  if (!(std::abs(tr) > 1e-15)) throw NumericalError("process_fidelity: chi has zero trace");
  const ComplexMatrix h = 0.5 * (choi + choi.adjoint()) / tr;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  if (!(clipped.sum() > 0.0)) throw NumericalError("process_fidelity: no positive part");
  ComplexMatrix p = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
  p /= p.trace().real();
  return {p, (p - h).norm()};
}

SphereMapSample sample_for(const StokesVector& in,
                           const std::function<ComplexMatrix(const ComplexMatrix&)>& map) {
  SphereMapSample s;
  s.input_stokes = in;
  const ComplexMatrix out = map(density_from_stokes(in).matrix());
  s.transmission = out.trace().real();
  if (s.transmission < 1e-12) {
    s.annihilated = true;
    return s;
  }
  const DensityMatrix rho(out);
  s.output_stokes = stokes_of(rho);
  s.output_purity = purity(rho);
  return s;
}

SphereMesh build_mesh(const std::function<ComplexMatrix(const ComplexMatrix&)>& map, int n_lat,
                      int n_lon) {
  if (n_lat < 2 || n_lon < 3) throw std::invalid_argument("sphere_map needs resolution >= (2, 3)");
  SphereMesh mesh;
  mesh.n_lat = n_lat;
  mesh.n_lon = n_lon;
  for (int i = 0; i < n_lat; ++i) {
    const double theta = M_PI * i / (n_lat - 1);
    const bool pole = i == 0 || i == n_lat - 1;
    for (int j = 0; j < (pole ? 1 : n_lon); ++j) {
      const double phi = 2.0 * M_PI * j / n_lon;
      StokesVector in{std::cos(theta), std::sin(theta) * std::cos(phi),
                      std::sin(theta) * std::sin(phi)};
      if (pole) in = {i == 0 ? 1.0 : -1.0, 0.0, 0.0};
      SphereMapSample s = sample_for(in, map);
      s.lat_index = i;
      s.lon_index = j;
      s.pole = pole;
      mesh.samples.push_back(s);
    }
  }
  for (const StokesVector& m : {StokesVector{1, 0, 0}, StokesVector{0, 0, 1},
                                StokesVector{-1, 0, 0}, StokesVector{0, -1, 0}}) {
    mesh.markers.push_back(sample_for(m, map));
  }
  return mesh;
}

}  // namespace

ComplexMatrix choi_from_chi(const ChiMatrix& chi) {
  const auto& p = pauli::all();
  // (E_m (x) I)|Omega> is E_m flattened row-major.
  std::array<ComplexVector, 4> vecs;
  for (int m = 0; m < 4; ++m) {
    vecs[m] = ComplexVector(4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) vecs[m](2 * i + j) = p[m](i, j);
  }
  ComplexMatrix choi = ComplexMatrix::Zero(4, 4);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) choi += chi.entries(m, n) * vecs[m] * vecs[n].adjoint();
  return choi;
}

ProcessFidelity process_fidelity_detailed(const ChiMatrix& a, const ChiMatrix& b) {
  const Projected pa = normalized_psd(choi_from_chi(a));
  const Projected pb = normalized_psd(choi_from_chi(b));
  ProcessFidelity out;
  out.fidelity = state_fidelity(DensityMatrix(pa.matrix), DensityMatrix(pb.matrix));
  out.projection_distance_a = pa.distance;
  out.projection_distance_b = pb.distance;
  return out;
}

double process_fidelity(const ChiMatrix& a, const ChiMatrix& b) {
  return process_fidelity_detailed(a, b).fidelity;
}

SphereMesh sphere_map(const KrausChannel& ch, int n_lat, int n_lon) {
  if (ch.dim() != 2) throw std::invalid_argument("sphere_map needs a single-qubit channel");
  return build_mesh(
      [&](const ComplexMatrix& rho) { return apply(ch, DensityMatrix(rho)).matrix(); }, n_lat,
      n_lon);
}

SphereMesh sphere_map(const ChiMatrix& chi, int n_lat, int n_lon) {
  return build_mesh([&](const ComplexMatrix& rho) { return apply_chi(chi, rho); }, n_lat, n_lon);
}

void write_sphere_csv(std::ostream& os, const SphereMesh& mesh) {
  os << "lat_index,lon_index,in_s1,in_s2,in_s3,out_s1,out_s2,out_s3,transmission,purity\n";
  for (const auto& s : mesh.samples) {
    if (s.annihilated) {
      os << fmt::format("{},{},{:.17g},{:.17g},{:.17g},nan,nan,nan,{:.17g},nan\n", s.lat_index,
                        s.lon_index, s.input_stokes.s1, s.input_stokes.s2, s.input_stokes.s3,
                        s.transmission);
      continue;
    }
    os << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                      s.lat_index, s.lon_index, s.input_stokes.s1, s.input_stokes.s2,
                      s.input_stokes.s3, s.output_stokes.s1, s.output_stokes.s2,
                      s.output_stokes.s3, s.transmission, s.output_purity);
  }
}

ChiReport chi_report(const ChiMatrix& chi) {
  ChiReport r;
  r.eigenvalues = chi.eigenvalues();
  r.min_eigenvalue = r.eigenvalues.minCoeff();
  r.trace = chi.trace();
  r.hermiticity_residual = chi.hermiticity_residual();
  r.max_imaginary = chi.entries.imag().cwiseAbs().maxCoeff();
  r.completely_positive = r.min_eigenvalue >= -kCpTol;
  r.verdict = r.completely_positive ? "completely positive" : "not completely positive";
  return r;
}

}  // namespace qpt
