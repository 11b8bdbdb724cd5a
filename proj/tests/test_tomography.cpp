#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "entlab/errors.hpp"
#include "entlab/tomography.hpp"

using namespace entlab;

namespace {

// Expected counts with no shot noise.
TomographyDataset noiseless(const Mat4& rho, double exposure) {
  TomographyDataset d;
  d.settings = tomography_settings();
  for (auto [a, b] : d.settings) {
    const Vec4 k = product_ket(MeasBasisState(a).ket(), MeasBasisState(b).ket());
    d.counts.push_back(exposure * (k.adjoint() * rho * k)(0, 0).real());
    d.exposures.push_back(exposure);
  }
  return d;
}

TomographyDataset sampled(const Mat4& rho, double exposure, rng::Engine& e) {
  const auto t = simulate_projective_counts(TwoQubitState(rho), tomography_settings(), exposure, e);
  return TomographyDataset::from_table(t, exposure);
}

Mat4 random_density(rng::Engine& e, int rank = 4) {
  std::normal_distribution<double> n;
  Eigen::Matrix<Complex, 4, Eigen::Dynamic> g(4, rank);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = {n(e), n(e)};
  Mat4 m = g * g.adjoint();
  return m / m.trace().real();
}

// Trace-constrained least squares over the 16 real coordinates of a
// Hermitian matrix in the elementary basis, solved through its KKT system.
Mat4 elementary_oracle(const TomographyDataset& d) {
  std::vector<Mat4> basis;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      Mat4 re = Mat4::Zero();
      re(i, j) = re(j, i) = 1.0;
      basis.push_back(re);
      if (j == i) continue;
      Mat4 im = Mat4::Zero();
      im(i, j) = Complex(0.0, -1.0);
      im(j, i) = Complex(0.0, 1.0);
      basis.push_back(im);
    }
  const int n = static_cast<int>(d.settings.size());
  Eigen::MatrixXd a(n, 16);
  Eigen::VectorXd f(n);
  for (int k = 0; k < n; ++k) {
    auto [sa, sb] = d.settings[static_cast<std::size_t>(k)];
    const Vec4 v = product_ket(MeasBasisState(sa).ket(), MeasBasisState(sb).ket());
    for (int m = 0; m < 16; ++m) a(k, m) = (v.adjoint() * basis[static_cast<std::size_t>(m)] * v)(0, 0).real();
    f(k) = d.counts[static_cast<std::size_t>(k)] / d.exposures[static_cast<std::size_t>(k)];
  }
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(17, 17);
  Eigen::VectorXd rhs(17);
  kkt.topLeftCorner(16, 16) = 2.0 * a.transpose() * a;
  for (int m = 0; m < 16; ++m) kkt(16, m) = kkt(m, 16) = basis[static_cast<std::size_t>(m)].trace().real();
  rhs.head(16) = 2.0 * a.transpose() * f;
  rhs(16) = 1.0;
  const Eigen::VectorXd x = kkt.fullPivLu().solve(rhs);
  Mat4 rho = Mat4::Zero();
  for (int m = 0; m < 16; ++m) rho += x(m) * basis[static_cast<std::size_t>(m)];
  return rho;
}

double max_diff(const Mat4& a, const Mat4& b) { return (a - b).cwiseAbs().maxCoeff(); }

const Mat4 kBell = TwoQubitState::from_pure(psi_gamma(1.0)).matrix();

}  // namespace

TEST_CASE("linear inversion recovers noiseless states exactly") {
  const Complex g0 = std::polar(0.74, 0.3);
  for (const Mat4& rho : {Mat4(Mat4::Identity() / 4.0), kBell,
                          TwoQubitState::from_pure(psi_gamma(g0)).matrix()}) {
    const auto d = noiseless(rho, 1e4);
    const auto li = linear_inversion(d);
    CHECK(max_diff(li.matrix, rho) < 1e-12);
    CHECK(max_diff(li.matrix, elementary_oracle(d)) < 1e-12);
    CHECK(std::isfinite(li.gram_condition));
  }
}

TEST_CASE("linear inversion matches the elementary-basis solve on noisy data") {
  auto e = rng::make_engine(5, rng::Purpose::test);
  for (int t = 0; t < 10; ++t) {
    const auto d = sampled(random_density(e), 2e3, e);
    CHECK(max_diff(linear_inversion(d).matrix, elementary_oracle(d)) < 1e-10);
  }
}

TEST_CASE("predicted probabilities") {
  const Complex g0 = std::polar(0.74, 0.3);
  const TwoQubitState s = TwoQubitState::from_pure(psi_gamma(g0));
  const auto p = predicted_probabilities(s, {{BasisLabel::zero, BasisLabel::zero},
                                             {BasisLabel::plus, BasisLabel::plus},
                                             {BasisLabel::zero, BasisLabel::one}});
  const double n = 1.0 + std::norm(g0);
  CHECK(p[0] == doctest::Approx(1.0 / n));
  CHECK(p[1] == doctest::Approx(std::norm(1.0 + g0) / (4.0 * n)));
  CHECK(p[2] == doctest::Approx(0.0));
}

TEST_CASE("MLE on Bell data") {
  auto e = rng::make_engine(6, rng::Purpose::test);
  const auto d = sampled(kBell, 1e6, e);
  const auto r = mle_reconstruct(d);
  CHECK(r.converged);
  CHECK(trace_distance(r.rho.matrix(), kBell) < 5e-3);
  const Eigen::SelfAdjointEigenSolver<Mat4> es(r.rho.matrix());
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  CHECK(std::abs(r.rho.matrix().trace().real() - 1.0) < 1e-12);
}

TEST_CASE("MLE on maximally mixed data") {
  const auto r = mle_reconstruct(noiseless(Mat4::Identity() / 4.0, 1e5));
  CHECK(max_diff(r.rho.matrix(), Mat4::Identity() / 4.0) < 1e-6);
}

TEST_CASE("MLE agrees with linear inversion on full-rank noiseless data") {
  auto e = rng::make_engine(7, rng::Purpose::test);
  for (int t = 0; t < 5; ++t) {
    const Mat4 rho = 0.7 * random_density(e) + 0.3 * Mat4::Identity() / 4.0;
    const auto d = noiseless(rho, 1e5);
    const auto r = mle_reconstruct(d, 1e-14);
    CHECK(max_diff(r.rho.matrix(), linear_inversion(d).matrix) < 1e-6);
  }
}

TEST_CASE("likelihood never decreases") {
  auto e = rng::make_engine(8, rng::Purpose::test);
  for (int t = 0; t < 5; ++t) {
    const auto d = sampled(random_density(e, 2), 5e3, e);
    const auto r = mle_reconstruct(d);
    REQUIRE(r.likelihood_trace.size() >= 2);
    for (std::size_t i = 1; i < r.likelihood_trace.size(); ++i)
      CHECK(r.likelihood_trace[i] >= r.likelihood_trace[i - 1]);
    CHECK(r.log_likelihood == doctest::Approx(log_likelihood(d, r.rho.matrix())));
    CHECK(r.log_likelihood >= log_likelihood(d, project_to_density(linear_inversion(d).matrix)) - 1e-9);
  }
}

TEST_CASE("reconstruction error shrinks with exposure") {
  auto e = rng::make_engine(9, rng::Purpose::test);
  const Mat4 rho = 0.9 * kBell + 0.1 * Mat4::Identity() / 4.0;
  double low = 0.0, high = 0.0;
  for (int t = 0; t < 20; ++t) {
    low += trace_distance(mle_reconstruct(sampled(rho, 1e4, e)).rho.matrix(), rho);
    high += trace_distance(mle_reconstruct(sampled(rho, 1e5, e)).rho.matrix(), rho);
  }
  CHECK(low / high >= 2.0);
}

TEST_CASE("swapping the qubits swaps the estimate") {
  auto e = rng::make_engine(10, rng::Purpose::test);
  const Mat4 sw = swap_operator();
  for (int t = 0; t < 3; ++t) {
    const auto d = sampled(0.8 * random_density(e) + 0.2 * Mat4::Identity() / 4.0, 1e4, e);
    const auto a = mle_reconstruct(d, 1e-18);
    const auto b = mle_reconstruct(d.swapped(), 1e-18);
    CHECK(max_diff(sw * a.rho.matrix() * sw, b.rho.matrix()) < 1e-8);
    CHECK(max_diff(sw * linear_inversion(d).matrix * sw, linear_inversion(d.swapped()).matrix) < 1e-12);
  }
}

TEST_CASE("dataset from a coincidence table") {
  CoincidenceTable t;
  t.rows.push_back({BasisLabel::zero, BasisLabel::zero, 100, 1000, 2000, 10.0});
  t.rows.push_back({BasisLabel::one, BasisLabel::plus, 0, 1000, 2000, 10.0});
  const auto d = TomographyDataset::from_table(t, 3.0);
  CHECK(d.exposures == std::vector<double>{30.0, 30.0});
  CHECK(d.counts == std::vector<double>{100.0, 0.0});

  ExperimentConfig c;
  const auto s = TomographyDataset::from_table(t, c, true);
  const double trials = c.repetition_rate * 10.0;
  CHECK(s.counts[0] == doctest::Approx(100.0 - 1000.0 * 2000.0 / trials));
  CHECK(s.counts[1] == 0.0);
  CHECK(s.exposures[0] == doctest::Approx(calibrated_exposure(c, 10.0, true)));
  const auto raw = TomographyDataset::from_table(t, c, false);
  CHECK(raw.counts[0] == 100.0);
  CHECK(raw.exposures[0] == doctest::Approx(calibrated_exposure(c, 10.0, false)));
  CHECK_THROWS_AS(TomographyDataset::from_table(t, 0.0), InvalidArgument);
}

TEST_CASE("degenerate datasets are rejected") {
  auto d = noiseless(kBell, 1e3);
  SUBCASE("rank deficient") {
    d.settings.resize(8);
    d.counts.resize(8);
    d.exposures.resize(8);
    CHECK_THROWS_AS(linear_inversion(d), NumericalError);
    CHECK_THROWS(mle_reconstruct(d));
  }
  SUBCASE("all zero") {
    std::fill(d.counts.begin(), d.counts.end(), 0.0);
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
    CHECK_THROWS_AS(mle_reconstruct(d), InvalidArgument);
  }
  SUBCASE("size mismatch") {
    d.counts.pop_back();
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
  }
}
