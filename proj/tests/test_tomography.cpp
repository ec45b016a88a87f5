#include "oracles.hpp"
#include "qpt/tomography.hpp"

#include <doctest.h>

#include <sstream>

using namespace qpt;

namespace {

DensityMatrix pure(const ComplexVector& k) { return DensityMatrix::from_ket(k); }

DensityMatrix bell() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = 1.0 / std::sqrt(2.0);
  v(3) = -1.0 / std::sqrt(2.0);
  return pure(v);
}

// Single-qubit records with prescribed probabilities for H, D, R (and their
// complements), regardless of whether they describe a physical state.
std::vector<CountRecord> stokes_records(double s1, double s2, double s3, std::int64_t n) {
  const auto settings = settings_single();
  const double p[6] = {(1 + s1) / 2, (1 - s1) / 2, (1 + s2) / 2, (1 - s2) / 2, (1 + s3) / 2, (1 - s3) / 2};
  std::vector<CountRecord> out;
  for (int i = 0; i < 6; ++i) out.push_back({settings[i], std::llround(n * p[i]), n});
  return out;
}

}  // namespace

TEST_CASE("projectors") {
  CHECK(approx_equal(projector(Polarization::H), oracle::mat2(1, 0, 0, 0)));
  CHECK(approx_equal(projector(Polarization::D), oracle::mat2(0.5, 0.5, 0.5, 0.5)));
  const complex i(0.0, 1.0);
  CHECK(approx_equal(projector(Polarization::R), oracle::mat2(0.5, -0.5 * i, 0.5 * i, 0.5)));
  for (auto [a, b] : {std::pair{Polarization::H, Polarization::V}, {Polarization::D, Polarization::A},
                      {Polarization::R, Polarization::L}}) {
    CHECK(approx_equal(projector(a) + projector(b), ComplexMatrix::Identity(2, 2)));
  }
  CHECK(approx_equal(projector(MeasurementSetting(Polarization::H, Polarization::V)),
                     oracle::kron(projector(Polarization::H), projector(Polarization::V))));
  CHECK_THROWS_AS(polarization_from_char('Q'), std::invalid_argument);
}

TEST_CASE("exact probabilities") {
  CHECK(exact_probability(pure(ket_h()), MeasurementSetting(Polarization::H)) == doctest::Approx(1.0));
  CHECK(exact_probability(pure(ket_h()), MeasurementSetting(Polarization::D)) == doctest::Approx(0.5));
  const MeasurementSetting hh(Polarization::H, Polarization::H);
  CHECK(exact_probability(bell(), hh) == doctest::Approx(0.5));
  CHECK(exact_probability(bell(), hh) ==
        doctest::Approx((bell().matrix() * oracle::kron(projector(Polarization::H), projector(Polarization::H)))
                            .trace()
                            .real()));
  CHECK(exact_probability(DensityMatrix(0.4 * pure(ket_h()).matrix()), MeasurementSetting(Polarization::H)) ==
        doctest::Approx(0.4));
}

TEST_CASE("setting lists") {
  const auto single = settings_single();
  REQUIRE(single.size() == 6);
  CHECK(single[0].to_string() == "H");
  CHECK(single[5].to_string() == "L");
  CHECK(settings_pair().size() == 36);
  const auto s16 = settings_pair_16();
  REQUIRE(s16.size() == 16);
  CHECK(s16[0] == MeasurementSetting(Polarization::H, Polarization::H));
  CHECK(s16[1] == MeasurementSetting(Polarization::H, Polarization::V));
  CHECK(s16[2] == MeasurementSetting(Polarization::H, Polarization::D));
  CHECK(s16[3] == MeasurementSetting(Polarization::H, Polarization::R));
  CHECK(s16[4] == MeasurementSetting(Polarization::V, Polarization::H));
}

TEST_CASE("poisson simulation") {
  const std::vector<MeasurementSetting> h{MeasurementSetting(Polarization::H)};
  double sum = 0.0;
  int within = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto r = simulate_counts(pure(ket_h()), h, {13000, seed});
    CHECK(r[0].reference_counts == 13000);
    sum += r[0].counts;
    within += std::abs(r[0].counts - 13000) < 5 * std::sqrt(13000.0);
  }
  CHECK(within == 1000);
  CHECK(std::abs(sum / 1000 - 13000) < 3 * std::sqrt(13000.0 / 1000));

  const auto zero = simulate_counts(pure(ket_h()), {MeasurementSetting(Polarization::V)}, {13000, 5});
  CHECK(zero[0].counts == 0);

  const auto settings = settings_pair();
  const auto a = simulate_counts(bell(), settings, {13000, 7});
  const auto b = simulate_counts(bell(), settings, {13000, 7});
  const auto c = simulate_counts(bell(), settings, {13000, 8});
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].counts == b[i].counts;
    differ = differ || a[i].counts != c[i].counts;
  }
  CHECK(same);
  CHECK(differ);
  CHECK_THROWS_AS(simulate_counts(bell(), settings, {0, 1}), std::invalid_argument);
}

TEST_CASE("poisson sample means") {
  for (double p : {0.1, 0.5, 0.9}) {
    const DensityMatrix rho = density_from_stokes({2 * p - 1, 0, 0});
    const std::int64_t n = 1000;
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      sum += simulate_counts(rho, {MeasurementSetting(Polarization::H)}, {n, seed + 100})[0].counts;
    }
    const double mean = sum / 10000;
    CHECK(std::abs(mean - n * p) < 3 * std::sqrt(n * p / 10000));
  }
}

TEST_CASE("linear reconstruction") {
  const auto r = linear_reconstruct(exact_counts(pure(ket_r()), settings_single(), 1000000000));
  CHECK(oracle::max_diff(r.rho.matrix(), pure(ket_r()).matrix()) < 1e-9);
  CHECK(r.physical);
  const auto b = linear_reconstruct(exact_counts(bell(), settings_pair(), 1000000000));
  CHECK(oracle::max_diff(b.rho.matrix(), bell().matrix()) < 1e-9);

  const auto over = linear_reconstruct(stokes_records(1.0, 0.3, 0.0, 13000));
  CHECK_FALSE(over.physical);
  CHECK(over.rho.min_eigenvalue() < 0.0);

  auto missing = exact_counts(bell(), settings_pair(), 1000);
  missing.pop_back();
  CHECK_THROWS_AS(linear_reconstruct(missing), std::invalid_argument);
}

TEST_CASE("linear round trip on random states") {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 100; ++t) {
    const int dim = t % 2 ? 4 : 2;
    const ComplexMatrix rho = oracle::random_state(rng, dim);
    const auto settings = dim == 2 ? settings_single() : settings_pair();
    // Real-valued probabilities, without integer rounding.
    std::vector<CountRecord> records;
    const std::int64_t n = 1'000'000'000'000;
    for (const auto& s : settings) {
      const ComplexMatrix pi = dim == 2 ? projector(s.labels()[0])
                                        : oracle::kron(projector(s.labels()[0]), projector(s.labels()[1]));
      records.push_back({s, std::llround(n * (rho * pi).trace().real()), n});
    }
    CHECK(oracle::max_diff(linear_reconstruct(records).rho.matrix(), rho) < 1e-10);
    CHECK(oracle::max_diff(least_squares_reconstruct(records, dim).matrix(), rho) < 1e-10);
  }
  // The 16-setting list is also complete.
  const ComplexMatrix rho = oracle::random_state(rng, 4);
  const auto records = exact_counts(DensityMatrix(rho), settings_pair_16(), 1'000'000'000'000);
  CHECK(oracle::max_diff(least_squares_reconstruct(records, 4).matrix(), rho) < 1e-10);
}

TEST_CASE("linear weight tracks loss") {
  const DensityMatrix lossy(0.45 * pure(ket_d()).matrix());
  const auto r = linear_reconstruct(exact_counts(lossy, settings_single(), 1000000000));
  CHECK(r.rho.weight() == doctest::Approx(0.45));
}

TEST_CASE("mle at infinite statistics") {
  const auto res = mle_reconstruct_detailed(exact_counts(pure(ket_h()), settings_single(), 1000000000), 2);
  CHECK(oracle::max_diff(res.rho.normalized(), pure(ket_h()).matrix()) < 1e-7);
  CHECK(res.rho.weight() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.final_objective <= res.start_objective);

  const auto b = mle_reconstruct(exact_counts(bell(), settings_pair(), 1000000000), 4);
  CHECK(oracle::max_diff(b.normalized(), bell().matrix()) < 1e-6);
}

TEST_CASE("mle on records outside the sphere") {
  const double s = 1.05 / std::sqrt(2.0);
  const auto records = stokes_records(s, 0.0, s, 13000);
  const DensityMatrix rho = mle_reconstruct(records, 2);
  CHECK(rho.min_eigenvalue() > -1e-12);
  // Nearest physical state: the pure state along the measured direction.
  ComplexVector dir(2);
  const double theta = std::atan2(std::sqrt(2.0) / 2, std::sqrt(2.0) / 2);
  dir << std::cos(theta / 2), complex(0, 1) * std::sin(theta / 2);
  CHECK(oracle::pure_fidelity(dir, rho.normalized()) > 0.999);
  CHECK(stokes_of(rho).norm() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(stokes_of(rho).norm() <= 1.0 + 1e-9);
}

TEST_CASE("mle from a traceless linear estimate") {
  // Clicks in RR only: the least-squares estimate over the 16 pair settings has
  // zero trace, so the start carries no weight.
  std::vector<CountRecord> records;
  for (const auto& s : settings_pair_16()) records.push_back({s, s.to_string() == "RR" ? 1166 : 0, 4304});
  const auto r = mle_reconstruct_detailed(records, 4);
  CHECK(r.rho.min_eigenvalue() > -1e-12);
  CHECK(r.final_objective <= r.start_objective);
  // At least as likely as |RR><RR| at its own best weight n / (N <RR|sum Pi|RR>).
  const ComplexVector rr = oracle::kron(ket_r(), ket_r());
  double m = 0.0;
  for (const auto& s : settings_pair_16()) m += (rr.adjoint() * projector(s) * rr)(0, 0).real();
  const DensityMatrix best(ComplexMatrix(1166.0 / (4304.0 * m) * rr * rr.adjoint()));
  CHECK(r.final_objective <= poisson_objective(best, records) + 1e-9);
}

TEST_CASE("mle mean fidelity under shot noise") {
  const ComplexVector d = ket_d();
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto records = simulate_counts(pure(d), settings_single(), {13000, seed});
    sum += oracle::pure_fidelity(d, mle_reconstruct(records, 2).normalized());
  }
  CHECK(sum / 100 >= 0.999);
}

TEST_CASE("mle is physical and never worse than its start") {
  std::mt19937_64 rng(59);
  std::uniform_int_distribution<int> small(0, 30);
  for (int t = 0; t < 200; ++t) {
    const int dim = t % 2 ? 4 : 2;
    const auto settings = dim == 2 ? settings_single() : settings_pair();
    std::vector<CountRecord> records;
    for (const auto& s : settings) {
      const int c = t % 4 < 2 ? small(rng) : small(rng) * 400;
      records.push_back({s, c, 13000});
    }
    if (records[0].counts == 0) records[0].counts = 1;
    const auto res = mle_reconstruct_detailed(records, dim);
    CHECK(DensityMatrix(res.rho.normalized()).min_eigenvalue() >= -1e-12);
    CHECK(res.final_objective <= res.start_objective + 1e-15);
    CHECK(poisson_objective(res.rho, records) == doctest::Approx(res.final_objective));
  }
}

TEST_CASE("mle input validation") {
  auto records = exact_counts(pure(ket_h()), settings_single(), 1000);
  for (auto& r : records) r.counts = 0;
  CHECK_THROWS_AS(mle_reconstruct(records, 2), NumericalError);
  records[0].counts = -1;
  CHECK_THROWS_AS(mle_reconstruct(records, 2), std::invalid_argument);
  records[0].counts = 5;
  records[1].reference_counts = 0;
  CHECK_THROWS_AS(mle_reconstruct(records, 2), std::invalid_argument);
  CHECK_THROWS_AS(mle_reconstruct({}, 2), std::invalid_argument);
  const MleNonConvergence e(42);
  CHECK(e.iterations() == 42);
}

TEST_CASE("poisson objective") {
  const auto records = stokes_records(1.0, 0.0, 0.0, 100);
  CHECK(std::isinf(poisson_objective(pure(ket_v()), records)));
  // Direct evaluation of the formula.
  const DensityMatrix rho = density_from_stokes({0.2, 0.1, -0.3});
  double want = 0.0, total = 0.0;
  for (const auto& r : records) {
    const double nbar = r.reference_counts * exact_probability(rho, r.setting);
    want += nbar - (r.counts ? r.counts * std::log(nbar) : 0.0);
    total += r.reference_counts;
  }
  CHECK(poisson_objective(rho, records) == doctest::Approx(want / total));
}

TEST_CASE("projection onto physical states") {
  const DensityMatrix p = project_physical(density_from_stokes({1.2, 0, 0}));
  CHECK(oracle::max_diff(p.matrix(), pure(ket_h()).matrix()) < 1e-12);
  const DensityMatrix inside = density_from_stokes({0.1, 0.2, 0.3});
  CHECK(approx_equal(project_physical(inside).matrix(), inside.matrix()));
}

TEST_CASE("counts csv round trip") {
  const auto records = simulate_counts(bell(), settings_pair_16(), {500, 3});
  std::stringstream ss;
  write_counts_csv(ss, records);
  CHECK(ss.str().rfind("setting_1,setting_2,counts,reference_counts\n", 0) == 0);
  const auto back = read_counts_csv(ss);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].setting == records[i].setting);
    CHECK(back[i].counts == records[i].counts);
    CHECK(back[i].reference_counts == records[i].reference_counts);
  }
  std::stringstream single;
  write_counts_csv(single, exact_counts(pure(ket_h()), settings_single(), 10));
  const auto one = read_counts_csv(single);
  CHECK(one[0].setting.qubits() == 1);

  std::stringstream bad("nope\n");
  CHECK_THROWS_AS(read_counts_csv(bad), std::invalid_argument);
  std::stringstream bad_line("setting_1,setting_2,counts,reference_counts\nH,,x,1\n");
  CHECK_THROWS_AS(read_counts_csv(bad_line), std::invalid_argument);
}
