#include "qpt/io.hpp"

#include <cmath>

namespace qpt {

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json real_grid(const ComplexMatrix& m, bool imaginary) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(imaginary ? m(i, j).imag() : m(i, j).real());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json matrix_to_json(const ComplexMatrix& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      re.push_back(m(i, j).real());
      im.push_back(m(i, j).imag());
    }
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("re")) {
    throw std::invalid_argument("matrix JSON needs rows, cols and re");
  }
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("matrix JSON: rows and cols must be positive");
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.contains("im") ? j.at("im").get<std::vector<double>>()
                                   : std::vector<double>(re.size(), 0.0);
  const auto n = static_cast<std::size_t>(rows * cols);
  if (re.size() != n || im.size() != n) {
    throw std::invalid_argument("matrix JSON: re/im must hold rows*cols entries");
  }
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto k = static_cast<std::size_t>(r * cols + c);
      m(r, c) = complex(re[k], im[k]);
    }
  return m;
}

json state_to_json(const DensityMatrix& rho) {
  return {{"matrix", matrix_to_json(rho.matrix())}, {"weight", rho.weight()}};
}

DensityMatrix state_from_json(const json& j) {
  if (j.is_object() && j.contains("matrix")) return DensityMatrix(matrix_from_json(j.at("matrix")));
  return DensityMatrix(matrix_from_json(j));
}

json chi_to_json(const ChiMatrix& chi) {
  return {{"basis", ChiMatrix::labels()},
          {"re", real_grid(chi.entries, false)},
          {"im", real_grid(chi.entries, true)}};
}

ChiMatrix chi_from_json(const json& j) {
  const auto re = j.at("re").get<std::vector<std::vector<double>>>();
  const auto im = j.at("im").get<std::vector<std::vector<double>>>();
  if (re.size() != 4 || im.size() != 4) throw std::invalid_argument("chi JSON must be 4x4");
  ChiMatrix chi;
  for (int m = 0; m < 4; ++m) {
    if (re[m].size() != 4 || im[m].size() != 4) throw std::invalid_argument("chi JSON must be 4x4");
    for (int n = 0; n < 4; ++n) chi.entries(m, n) = complex(re[m][n], im[m][n]);
  }
  return chi;
}

json estimate_to_json(const ProcessEstimate& est) {
  json out = chi_to_json(est.chi);
  out["method"] = to_string(est.method);
  out["min_eigenvalue"] = est.chi.eigenvalues().minCoeff();
  out["hermiticity_residual"] = est.hermiticity_residual;
  out["input_state_schmidt_coefficients"] = est.input_state_schmidt_coefficients;
  return out;
}

json chi_report_to_json(const ChiReport& r) {
  return {{"eigenvalues", vector_to_json(r.eigenvalues)},
          {"min_eigenvalue", r.min_eigenvalue},
          {"trace", r.trace},
          {"hermiticity_residual", r.hermiticity_residual},
          {"max_imaginary", r.max_imaginary},
          {"completely_positive", r.completely_positive},
          {"verdict", r.verdict}};
}

json stokes_to_json(const StokesVector& s) { return json::array({s.s1, s.s2, s.s3}); }

json sphere_summary_to_json(const SphereMesh& mesh) {
  double min_t = INFINITY;
  double max_t = -INFINITY;
  double min_purity = INFINITY;
  double max_purity = -INFINITY;
  int annihilated = 0;
  for (const auto& s : mesh.samples) {
    if (s.annihilated) {
      ++annihilated;
      continue;
    }
    min_t = std::min(min_t, s.transmission);
    max_t = std::max(max_t, s.transmission);
    min_purity = std::min(min_purity, s.output_purity);
    max_purity = std::max(max_purity, s.output_purity);
  }
  json markers = json::array();
  const char* names[] = {"H", "R", "V", "A"};
  for (std::size_t i = 0; i < mesh.markers.size(); ++i) {
    const auto& m = mesh.markers[i];
    json entry = {{"label", names[i]},
                  {"input_stokes", stokes_to_json(m.input_stokes)},
                  {"transmission", m.transmission},
                  {"annihilated", m.annihilated}};
    if (!m.annihilated) {
      entry["output_stokes"] = stokes_to_json(m.output_stokes);
      entry["purity"] = m.output_purity;
    }
    markers.push_back(std::move(entry));
  }
  return {{"n_lat", mesh.n_lat},
          {"n_lon", mesh.n_lon},
          {"samples", mesh.samples.size()},
          {"annihilated_samples", annihilated},
          {"transmission_range", {min_t, max_t}},
          {"purity_range", {min_purity, max_purity}},
          {"markers", markers}};
}

json comparison_to_json(const ComparisonReport& report) {
  json out = json::array();
  for (const auto& m : report.methods) {
    out.push_back({{"method", m.method},
                   {"mean_fidelity", m.mean_fidelity},
                   {"std_fidelity", m.std_fidelity},
                   {"trials", m.trials}});
  }
  return out;
}

}  // namespace qpt
