#include "qpt/tomography.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace qpt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Barrier weights 1e-3, 1e-4, ..., 1e-13.
constexpr int kBarrierStages = 11;
constexpr double kDecrementFloor = 1e-15;  // relative to |objective|

// Pauli index (into pauli::all) and the +/- analyzers measuring it.
struct Axis {
  int pauli;
  Polarization plus;
  Polarization minus;
};
constexpr std::array<Axis, 3> kAxes{{
    {3, Polarization::H, Polarization::V},
    {1, Polarization::D, Polarization::A},
    {2, Polarization::R, Polarization::L},
}};

int qubits_for_dim(int dim) {
  if (dim == 2) return 1;
  if (dim == 4) return 2;
  throw std::invalid_argument("tomography supports dimension 2 or 4, got " +
                              std::to_string(dim));
}

// Rates n_i / N_i keyed by setting, first occurrence wins.
std::map<std::string, double> rate_table(const std::vector<CountRecord>& records) {
  std::map<std::string, double> rates;
  for (const auto& r : records) {
    if (r.reference_counts <= 0) throw std::invalid_argument("reference_counts must be positive");
    if (r.counts < 0) throw std::invalid_argument("counts must be non-negative");
    rates.emplace(r.setting.to_string(),
                  static_cast<double>(r.counts) / static_cast<double>(r.reference_counts));
  }
  return rates;
}

double lookup(const std::map<std::string, double>& rates, const MeasurementSetting& s) {
  auto it = rates.find(s.to_string());
  if (it == rates.end()) throw std::invalid_argument("missing setting " + s.to_string());
  return it->second;
}

// Products of Pauli operators, sigma_a (x) sigma_b with index a*4 + b for two qubits.
std::vector<ComplexMatrix> pauli_products(int qubits) {
  const auto& p = pauli::all();
  std::vector<ComplexMatrix> out;
  if (qubits == 1) return {p.begin(), p.end()};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out.push_back(tensor(p[a], p[b]));
  return out;
}

bool pair_complete(const std::vector<CountRecord>& records, int qubits) {
  const auto rates = rate_table(records);
  const auto needed = qubits == 1 ? settings_single() : settings_pair();
  for (const auto& s : needed) {
    if (!rates.count(s.to_string())) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Maximum likelihood machinery.
//
// The negative log-likelihood is convex in rho, so it is minimized directly
// over rho = sum_b x_b B_b (B_b orthonormal Hermitian) with a log-det barrier
// keeping rho positive definite: f(x) - tau log det rho, tau -> 0.

struct MleProblem {
  std::vector<ComplexMatrix> basis;
  std::vector<Eigen::VectorXd> a;  // n_bar_i = a_i . x
  std::vector<double> counts;
  double scale = 1.0;  // 1 / sum N_i

  ComplexMatrix matrix(const Eigen::VectorXd& x) const {
    ComplexMatrix m = ComplexMatrix::Zero(basis.front().rows(), basis.front().cols());
    for (std::size_t b = 0; b < basis.size(); ++b) m += x(static_cast<Eigen::Index>(b)) * basis[b];
    return m;
  }

  Eigen::VectorXd coordinates(const ComplexMatrix& rho) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t b = 0; b < basis.size(); ++b) {
      x(static_cast<Eigen::Index>(b)) = (basis[b] * rho).trace().real();
    }
    return x;
  }

  // Barrier objective; nullopt outside the positive-definite cone.
  std::optional<double> value(const Eigen::VectorXd& x, double tau) const {
    const Eigen::LLT<ComplexMatrix> llt(matrix(x));
    if (llt.info() != Eigen::Success) return std::nullopt;
    double logdet = 0.0;
    for (Eigen::Index k = 0; k < llt.matrixL().rows(); ++k) {
      const double l = llt.matrixL()(k, k).real();
      if (!(l > 0.0)) return std::nullopt;
      logdet += 2.0 * std::log(l);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double nbar = a[i].dot(x);
      if (counts[i] > 0.0) {
        if (!(nbar > 0.0)) return std::nullopt;
        total += nbar - counts[i] * std::log(nbar);
      } else {
        total += nbar;
      }
    }
    return total * scale - tau * logdet;
  }

  void derivatives(const Eigen::VectorXd& x, double tau, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) const {
    const auto n = x.size();
    grad = Eigen::VectorXd::Zero(n);
    hess = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double nbar = a[i].dot(x);
      double first = 1.0;
      if (counts[i] > 0.0) {
        first = 1.0 - counts[i] / nbar;
        hess += (counts[i] / (nbar * nbar)) * a[i] * a[i].transpose();
      }
      grad += first * a[i];
    }
    grad *= scale;
    hess *= scale;

    const ComplexMatrix inv = matrix(x).inverse();
    std::vector<ComplexMatrix> m;
    m.reserve(basis.size());
    for (const auto& b : basis) m.push_back(inv * b);
    for (Eigen::Index b = 0; b < n; ++b) {
      grad(b) -= tau * m[static_cast<std::size_t>(b)].trace().real();
      for (Eigen::Index c = b; c < n; ++c) {
        const double h = tau * (m[static_cast<std::size_t>(b)] * m[static_cast<std::size_t>(c)])
                                   .trace()
                                   .real();
        hess(b, c) += h;
        if (c != b) hess(c, b) += h;
      }
    }
  }

  // || rho grad f ||_F for the likelihood alone: the gradient restricted to the
  // support of rho, which is what vanishes at a (possibly rank-deficient) optimum.
  double kkt_residual(const Eigen::VectorXd& x) const {
    const ComplexMatrix rho = matrix(x);
    ComplexMatrix g = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double first = counts[i] > 0.0 ? 1.0 - counts[i] / a[i].dot(x) : 1.0;
      for (std::size_t b = 0; b < basis.size(); ++b) g += first * a[i](static_cast<Eigen::Index>(b)) * basis[b];
    }
    return (rho * g).norm() * scale;
  }
};

MleProblem make_problem(const std::vector<CountRecord>& records, int dim) {
  MleProblem prob;
  for (const auto& p : pauli_products(qubits_for_dim(dim))) {
    prob.basis.push_back(p / std::sqrt(static_cast<double>(dim)));
  }
  double total_reference = 0.0;
  for (const auto& r : records) {
    const ComplexMatrix pi = projector(r.setting);
    if (pi.rows() != dim) throw std::invalid_argument("record setting does not match dimension");
    if (r.reference_counts <= 0) throw std::invalid_argument("reference_counts must be positive");
    if (r.counts < 0) throw std::invalid_argument("counts must be non-negative");
    Eigen::VectorXd ai(static_cast<Eigen::Index>(prob.basis.size()));
    for (std::size_t b = 0; b < prob.basis.size(); ++b) {
      ai(static_cast<Eigen::Index>(b)) = static_cast<double>(r.reference_counts) *
                                         (prob.basis[b] * pi).trace().real();
    }
    prob.a.push_back(std::move(ai));
    prob.counts.push_back(static_cast<double>(r.counts));
    total_reference += static_cast<double>(r.reference_counts);
  }
  prob.scale = 1.0 / total_reference;
  return prob;
}

}  // namespace

// ---------------------------------------------------------------------------
// Settings

char to_char(Polarization p) {
  static constexpr char names[] = {'H', 'V', 'D', 'A', 'R', 'L'};
  return names[static_cast<int>(p)];
}

Polarization polarization_from_char(char c) {
  switch (c) {
    case 'H': return Polarization::H;
    case 'V': return Polarization::V;
    case 'D': return Polarization::D;
    case 'A': return Polarization::A;
    case 'R': return Polarization::R;
    case 'L': return Polarization::L;
    default: break;
  }
  throw std::invalid_argument(std::string("unknown polarization label '") + c + "'");
}

std::string MeasurementSetting::to_string() const {
  std::string s;
  for (auto p : labels_) s.push_back(to_char(p));
  return s;
}

ComplexMatrix projector(Polarization p) {
  ComplexVector k;
  switch (p) {
    case Polarization::H: k = ket_h(); break;
    case Polarization::V: k = ket_v(); break;
    case Polarization::D: k = ket_d(); break;
    case Polarization::A: k = ket_a(); break;
    case Polarization::R: k = ket_r(); break;
    case Polarization::L: k = ket_l(); break;
  }
  return k * k.adjoint();
}

ComplexMatrix projector(const MeasurementSetting& s) {
  if (s.qubits() == 1) return projector(s.labels()[0]);
  if (s.qubits() == 2) return tensor(projector(s.labels()[0]), projector(s.labels()[1]));
  throw std::invalid_argument("measurement setting must have one or two labels");
}

double exact_probability(const DensityMatrix& rho, const MeasurementSetting& s) {
  const ComplexMatrix pi = projector(s);
  if (pi.rows() != rho.dim()) throw std::invalid_argument("setting does not match state size");
  return (rho.matrix() * pi).trace().real();
}

std::vector<MeasurementSetting> settings_single() {
  using P = Polarization;
  std::vector<MeasurementSetting> out;
  for (P p : {P::H, P::V, P::D, P::A, P::R, P::L}) out.emplace_back(p);
  return out;
}

std::vector<MeasurementSetting> settings_pair() {
  std::vector<MeasurementSetting> out;
  for (const auto& a : settings_single())
    for (const auto& b : settings_single()) out.emplace_back(a.labels()[0], b.labels()[0]);
  return out;
}

std::vector<MeasurementSetting> settings_pair_16() {
  using P = Polarization;
  std::vector<MeasurementSetting> out;
  for (P a : {P::H, P::V, P::D, P::R})
    for (P b : {P::H, P::V, P::D, P::R}) out.emplace_back(a, b);
  return out;
}

// ---------------------------------------------------------------------------
// Count simulation

std::vector<CountRecord> simulate_counts(const DensityMatrix& rho,
                                         const std::vector<MeasurementSetting>& settings,
                                         const NoiseConfig& noise) {
  if (noise.counts_per_setting < 1) throw std::invalid_argument("counts_per_setting must be >= 1");
  std::mt19937_64 gen(noise.seed);
  std::vector<CountRecord> out;
  out.reserve(settings.size());
  for (const auto& s : settings) {
    const double mean =
        static_cast<double>(noise.counts_per_setting) * exact_probability(rho, s);
    std::int64_t n = 0;
    if (mean > 0.0) n = std::poisson_distribution<std::int64_t>(mean)(gen);
    out.push_back({s, n, noise.counts_per_setting});
  }
  return out;
}

std::vector<CountRecord> exact_counts(const DensityMatrix& rho,
                                      const std::vector<MeasurementSetting>& settings,
                                      std::int64_t counts_per_setting) {
  std::vector<CountRecord> out;
  out.reserve(settings.size());
  for (const auto& s : settings) {
    const double mean =
        static_cast<double>(counts_per_setting) * std::max(0.0, exact_probability(rho, s));
    out.push_back({s, std::llround(mean), counts_per_setting});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear reconstruction

LinearEstimate linear_reconstruct(const std::vector<CountRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no count records");
  const int qubits = records.front().setting.qubits();
  const auto rates = rate_table(records);
  const auto& p = pauli::all();

  ComplexMatrix m;
  if (qubits == 1) {
    double flux = 0.0;
    m = p[0];
    for (const auto& ax : kAxes) {
      const double plus = lookup(rates, MeasurementSetting(ax.plus));
      const double minus = lookup(rates, MeasurementSetting(ax.minus));
      const double total = plus + minus;
      flux += total;
      if (total > 0.0) m += ((plus - minus) / total) * p[ax.pauli];
    }
    m *= (flux / 3.0) / 2.0;
  } else if (qubits == 2) {
    Eigen::Matrix4d stokes = Eigen::Matrix4d::Zero();
    stokes(0, 0) = 1.0;
    double flux = 0.0;
    for (const auto& a : kAxes) {
      for (const auto& b : kAxes) {
        const double pp = lookup(rates, MeasurementSetting(a.plus, b.plus));
        const double pm = lookup(rates, MeasurementSetting(a.plus, b.minus));
        const double mp = lookup(rates, MeasurementSetting(a.minus, b.plus));
        const double mm = lookup(rates, MeasurementSetting(a.minus, b.minus));
        const double total = pp + pm + mp + mm;
        flux += total;
        if (total <= 0.0) continue;
        stokes(a.pauli, b.pauli) = (pp - pm - mp + mm) / total;
        stokes(a.pauli, 0) += (pp + pm - mp - mm) / total / 3.0;
        stokes(0, b.pauli) += (pp - pm + mp - mm) / total / 3.0;
      }
    }
    m = ComplexMatrix::Zero(4, 4);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        if (stokes(a, b) != 0.0) m += stokes(a, b) * tensor(p[a], p[b]);
    m *= (flux / 9.0) / 4.0;
  } else {
    throw std::invalid_argument("records must describe one or two qubits");
  }
  DensityMatrix rho(std::move(m));
  const bool physical = rho.min_eigenvalue() >= -kPhysicalTol;
  return {std::move(rho), physical};
}

DensityMatrix least_squares_reconstruct(const std::vector<CountRecord>& records, int dim) {
  const int qubits = qubits_for_dim(dim);
  const auto ops = pauli_products(qubits);
  const auto n_ops = static_cast<Eigen::Index>(ops.size());
  Eigen::MatrixXd design(static_cast<Eigen::Index>(records.size()), n_ops);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.reference_counts <= 0) throw std::invalid_argument("reference_counts must be positive");
    const ComplexMatrix pi = projector(r.setting);
    if (pi.rows() != dim) throw std::invalid_argument("record setting does not match dimension");
    for (Eigen::Index a = 0; a < n_ops; ++a) {
      design(static_cast<Eigen::Index>(i), a) = (ops[a] * pi).trace().real() / dim;
    }
    rhs(static_cast<Eigen::Index>(i)) =
        static_cast<double>(r.counts) / static_cast<double>(r.reference_counts);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < n_ops) {
    throw std::invalid_argument("missing settings: records are not tomographically complete");
  }
  const Eigen::VectorXd coeff = qr.solve(rhs);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index a = 0; a < n_ops; ++a) m += coeff(a) * ops[a] / static_cast<double>(dim);
  return DensityMatrix(std::move(m));
}

DensityMatrix project_physical(const DensityMatrix& rho) {
  const ComplexMatrix h = 0.5 * (rho.matrix() + rho.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  const double target = h.trace().real();
  const double kept = clipped.sum();
  ComplexMatrix out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
  if (kept > 0.0) out *= target / kept;
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

// ---------------------------------------------------------------------------
// Maximum likelihood

MleNonConvergence::MleNonConvergence(int iterations)
    : NumericalError("maximum-likelihood reconstruction did not converge after " +
                     std::to_string(iterations) + " iterations"),
      iterations_(iterations) {}

double poisson_objective(const DensityMatrix& rho, const std::vector<CountRecord>& records) {
  double total = 0.0;
  double reference = 0.0;
  for (const auto& r : records) {
    const double nbar =
        static_cast<double>(r.reference_counts) * exact_probability(rho, r.setting);
    const auto n = static_cast<double>(r.counts);
    if (n > 0.0) {
      if (!(nbar > 0.0)) return kInf;
      total += nbar - n * std::log(nbar);
    } else {
      total += nbar;
    }
    reference += static_cast<double>(r.reference_counts);
  }
  return total / reference;
}

MleResult mle_reconstruct_detailed(const std::vector<CountRecord>& records, int dim,
                                   const MleOptions& options) {
  qubits_for_dim(dim);
  if (records.empty()) throw std::invalid_argument("no count records");
  double total_counts = 0.0;
  double total_reference = 0.0;
  for (const auto& r : records) {
    if (r.reference_counts <= 0) throw std::invalid_argument("reference_counts must be positive");
    if (r.counts < 0) throw std::invalid_argument("counts must be non-negative");
    total_counts += static_cast<double>(r.counts);
    total_reference += static_cast<double>(r.reference_counts);
  }
  if (!(total_counts > 0.0)) {
    throw NumericalError("all count records are zero; nothing to reconstruct");
  }
  const MleProblem prob = make_problem(records, dim);

  const DensityMatrix start = project_physical(
      pair_complete(records, qubits_for_dim(dim)) ? linear_reconstruct(records).rho
                                                  : least_squares_reconstruct(records, dim));
  MleResult result{start, 0, poisson_objective(start, records), 0.0};

  // Interior starting point: mix in a little of the maximally mixed state.
  // A start with (numerically) no weight, e.g. a traceless linear estimate,
  // is replaced by the maximally mixed state at the click-rate weight.
  const ComplexMatrix identity = ComplexMatrix::Identity(dim, dim);
  const double data_weight = dim * total_counts / total_reference;
  double w = start.weight();
  ComplexMatrix seed = start.matrix();
  if (!(w > 1e-6 * data_weight)) {
    w = data_weight;
    seed = w * identity / dim;
  }
  Eigen::VectorXd x = prob.coordinates((1.0 - 1e-3) * seed + 1e-3 * w * identity / dim);

  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  int iterations = 0;
  for (int stage = 0; stage < kBarrierStages; ++stage) {
    const double tau = std::pow(10.0, -3 - stage);
    std::optional<double> value = prob.value(x, tau);
    if (!value) throw NumericalError("maximum-likelihood iterate left the positive-definite cone");
    while (true) {
      prob.derivatives(x, tau, grad, hess);
      const Eigen::VectorXd step = hess.ldlt().solve(-grad);
      const double last_step = step.norm();
      // Converged once the step is below tolerance or the predicted decrease
      // is below the rounding floor of the objective.
      const double decrement = -grad.dot(step);
      if (last_step < options.step_tolerance || decrement < kDecrementFloor * std::max(1.0, std::abs(*value))) break;
      if (++iterations > options.max_iterations) throw MleNonConvergence(options.max_iterations);

      const double slope = -decrement;
      double alpha = 1.0;
      std::optional<double> trial;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        trial = prob.value(x + alpha * step, tau);
        if (trial && *trial <= *value + 1e-4 * alpha * slope) break;
        trial.reset();
      }
      if (!trial) {
        // Below the rounding floor of the objective nothing can be gained.
        if (decrement < 1e-14) break;
        throw MleNonConvergence(iterations);
      }
      x += alpha * step;
      value = trial;
    }
  }
  const double kkt = prob.kkt_residual(x);
  if (kkt >= options.gradient_tolerance) {
    throw MleNonConvergence(iterations);
  }
  result.iterations = iterations;

  const ComplexMatrix m = prob.matrix(x);
  const DensityMatrix estimate(0.5 * (m + m.adjoint()));
  const double final_objective = poisson_objective(estimate, records);
  // The barrier solution sits within ~dim * tau of the optimum; never hand
  // back something worse than the physical starting point.
  if (final_objective <= result.start_objective) {
    result.rho = estimate;
    result.final_objective = final_objective;
  } else {
    result.final_objective = result.start_objective;
  }
  return result;
}

DensityMatrix mle_reconstruct(const std::vector<CountRecord>& records, int dim) {
  return mle_reconstruct_detailed(records, dim).rho;
}

// ---------------------------------------------------------------------------
// CSV

void write_counts_csv(std::ostream& os, const std::vector<CountRecord>& records) {
  os << "setting_1,setting_2,counts,reference_counts\n";
  for (const auto& r : records) {
    const auto& l = r.setting.labels();
    os << to_char(l.at(0)) << ',';
    if (l.size() > 1) os << to_char(l[1]);
    os << ',' << r.counts << ',' << r.reference_counts << '\n';
  }
}

std::vector<CountRecord> read_counts_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty counts CSV");
  if (line.rfind("setting_1,setting_2,counts,reference_counts", 0) != 0) {
    throw std::invalid_argument("counts CSV header must be "
                                "'setting_1,setting_2,counts,reference_counts'");
  }
  std::vector<CountRecord> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() == 3 && line.back() == ',') fields.emplace_back();
    if (fields.size() != 4 || fields[0].size() != 1 || fields[1].size() > 1) {
      throw std::invalid_argument("malformed counts CSV line " + std::to_string(line_no));
    }
    CountRecord r;
    const Polarization a = polarization_from_char(fields[0][0]);
    r.setting = fields[1].empty() ? MeasurementSetting(a)
                                  : MeasurementSetting(a, polarization_from_char(fields[1][0]));
    try {
      r.counts = std::stoll(fields[2]);
      r.reference_counts = std::stoll(fields[3]);
    } catch (const std::exception&) {
      throw std::invalid_argument("non-numeric counts on CSV line " + std::to_string(line_no));
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace qpt
