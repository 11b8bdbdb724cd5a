#include "entlab/entanglement_metrics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <thread>

#include "entlab/errors.hpp"
#include "entlab/rng.hpp"

namespace entlab {

namespace {

constexpr double kPi = std::numbers::pi;

double table_total(const std::array<std::array<double, 2>, 2>& t) {
  return t[0][0] + t[0][1] + t[1][0] + t[1][1];
}

double pure_fit_objective(const Mat4& rho, Complex g) {
  const double num = rho(0, 0).real() + 2.0 * (g * rho(0, 3)).real() + std::norm(g) * rho(3, 3).real();
  return num / (1.0 + std::norm(g));
}

}  // namespace

WitnessInput WitnessInput::from_table(const CoincidenceTable& table) {
  WitnessInput w;
  std::array<std::array<bool, 2>, 2> seen_c{}, seen_d{};
  for (const auto& r : table.rows) {
    auto idx = [](BasisLabel l, BasisLabel first, BasisLabel second) -> int {
      return l == first ? 0 : l == second ? 1 : -1;
    };
    const int ic = idx(r.setting_as, BasisLabel::plus, BasisLabel::minus);
    const int jc = idx(r.setting_s, BasisLabel::plus, BasisLabel::minus);
    const int id = idx(r.setting_as, BasisLabel::u, BasisLabel::d);
    const int jd = idx(r.setting_s, BasisLabel::u, BasisLabel::d);
    if (ic >= 0 && jc >= 0) {
      w.c[ic][jc] += static_cast<double>(r.coincidences);
      seen_c[ic][jc] = true;
    } else if (id >= 0 && jd >= 0) {
      w.d[id][jd] += static_cast<double>(r.coincidences);
      seen_d[id][jd] = true;
    }
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (!seen_c[i][j] || !seen_d[i][j])
        throw InvalidArgument("WitnessInput: table lacks a plus/minus or u/d combination");
  w.validate();
  return w;
}

void WitnessInput::validate() const {
  for (const auto* t : {&c, &d})
    for (const auto& row : *t)
      for (double v : row)
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("WitnessInput: bad count");
  if (table_total(c) <= 0.0 || table_total(d) <= 0.0)
    throw InvalidArgument("WitnessInput: empty table");
}

Estimate fidelity_lower_bound(const WitnessInput& input) {
  input.validate();
  const double nc = table_total(input.c);
  const double nd = table_total(input.d);
  const double p = (input.c[0][0] + input.c[1][1]) / nc;
  const double q = (input.d[0][1] + input.d[1][0]) / nd;
  return {p + q - 1.0, std::sqrt(p * (1.0 - p) / nc + q * (1.0 - q) / nd)};
}

double concurrence(const TwoQubitState& state) {
  const Mat4& rho = state.matrix();
  Mat2 sy;
  sy << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  const Mat4 yy = kron(sy, sy);
  Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (rho + rho.adjoint()));
  // Rounding-level eigenvalues would otherwise leak in at the square-root scale.
  Eigen::Vector4d ev = es.eigenvalues();
  for (int i = 0; i < 4; ++i) ev(i) = ev(i) < 1e-14 ? 0.0 : std::sqrt(ev(i));
  const Mat4 root = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  // λ_i are the singular values of √ρ · √ρ̃ with √ρ̃ = (σy⊗σy) √ρ* (σy⊗σy).
  const Mat4 a = root * (yy * root.conjugate() * yy);
  const Eigen::JacobiSVD<Mat4> svd(a);
  std::array<double, 4> lam;
  for (int i = 0; i < 4; ++i) lam[i] = svd.singularValues()(i);
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return std::clamp(lam[0] - lam[1] - lam[2] - lam[3], 0.0, 1.0);
}

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double entanglement_of_formation(const TwoQubitState& state) {
  const double c = concurrence(state);
  if (c == 0.0) return 0.0;
  return binary_entropy(0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c))));
}

PureFit best_pure_fit(const TwoQubitState& state, double gamma_max) {
  if (!(gamma_max >= 2.0)) throw InvalidArgument("best_pure_fit: gamma_max must be >= 2");
  const Mat4& rho = state.matrix();
  const int n_mod = static_cast<int>(std::round(gamma_max / 0.01));
  constexpr int kPhases = 200;

  PureFit best{Complex(0.0, 0.0), pure_fit_objective(rho, 0.0), false};
  for (int i = 1; i <= n_mod; ++i) {
    const double r = std::min(gamma_max, 0.01 * i);
    for (int j = 0; j < kPhases; ++j) {
      const Complex g = std::polar(r, kPi / 100.0 * j);
      const double f = pure_fit_objective(rho, g);
      if (f > best.fidelity) best = {g, f, false};
    }
  }

  // Compass search in the complex plane, step halved down to 1e-5.
  constexpr std::array<Complex, 4> dirs = {Complex(1, 0), Complex(-1, 0), Complex(0, 1), Complex(0, -1)};
  for (double step = 0.01; step > 1e-5;) {
    bool moved = false;
    for (Complex dir : dirs) {
      Complex g = best.gamma + step * dir;
      if (std::abs(g) > gamma_max) g *= gamma_max / std::abs(g);
      const double f = pure_fit_objective(rho, g);
      if (f > best.fidelity) {
        best = {g, f, false};
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }

  const double at_inf = std::clamp(rho(3, 3).real(), 0.0, 1.0);
  if (at_inf > best.fidelity + 1e-12) {
    best.fidelity = at_inf;
    best.at_infinity = true;
  }
  best.fidelity = std::clamp(best.fidelity, 0.0, 1.0);
  return best;
}

unsigned worker_threads() {
  if (const char* env = std::getenv("OAM_ENTLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BootstrapResult bootstrap_errors(const std::vector<double>& counts, int n_resamples,
                                 const MetricPipeline& pipeline, std::uint64_t seed) {
  if (n_resamples < 100) throw InvalidArgument("bootstrap_errors: need at least 100 resamples");
  for (double c : counts)
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("bootstrap_errors: bad count");

  std::vector<std::optional<std::vector<double>>> results(static_cast<std::size_t>(n_resamples));
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < results.size(); i += stride) {
      auto engine = rng::make_engine(seed, rng::Purpose::bootstrap, i);
      std::vector<double> drawn(counts.size());
      for (std::size_t k = 0; k < counts.size(); ++k)
        drawn[k] = static_cast<double>(rng::poisson(engine, counts[k]));
      try {
        results[i] = pipeline(drawn);
      } catch (const std::exception&) {
        results[i].reset();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(worker_threads(), results.size());
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  BootstrapResult out;
  out.resamples = n_resamples;
  std::size_t width = 0;
  std::vector<const std::vector<double>*> ok;
  for (const auto& r : results) {
    if (!r) {
      ++out.failures;
      continue;
    }
    if (ok.empty()) width = r->size();
    if (r->size() != width) throw InvalidArgument("bootstrap_errors: pipeline output width changed");
    ok.push_back(&*r);
  }
  out.mean.assign(width, 0.0);
  out.error.assign(width, 0.0);
  if (ok.size() < 2) return out;
  for (const auto* r : ok)
    for (std::size_t m = 0; m < width; ++m) out.mean[m] += (*r)[m];
  for (double& m : out.mean) m /= static_cast<double>(ok.size());
  for (const auto* r : ok)
    for (std::size_t m = 0; m < width; ++m) {
      const double dev = (*r)[m] - out.mean[m];
      out.error[m] += dev * dev;
    }
  for (double& e : out.error) e = std::sqrt(e / static_cast<double>(ok.size() - 1));
  return out;
}

void MetricReport::validate() const {
  constexpr double slack = 1e-9;
  if (fidelity_lower_bound > 1.0 + slack) throw DomainError("MetricReport: fidelity bound above 1");
  if (eof < -slack || eof > 1.0 + slack) throw DomainError("MetricReport: EOF outside [0, 1]");
  if (purity < 0.25 - slack || purity > 1.0 + slack)
    throw DomainError("MetricReport: purity outside [0.25, 1]");
}

MetricReport full_report(const TomographyDataset& dataset, const WitnessInput& witness,
                         const RunConfig& config) {
  const auto rec = mle_reconstruct(dataset, config.tomography.tolerance,
                                   config.tomography.max_iterations);
  return full_report(rec, dataset, witness, config);
}

MetricReport full_report(const ReconstructionResult& reconstruction,
                         const TomographyDataset& dataset, const WitnessInput& witness,
                         const RunConfig& config) {
  witness.validate();
  MetricReport report;
  const Estimate bound = fidelity_lower_bound(witness);
  report.fidelity_lower_bound = bound.value;
  report.eof = entanglement_of_formation(reconstruction.rho);
  report.purity = purity(reconstruction.rho);
  const PureFit fit = best_pure_fit(reconstruction.rho);
  report.gamma_best = fit.gamma;
  report.fidelity_at_gamma_best = fit.fidelity;
  report.eof_of_pure_fit = fit.at_infinity ? 0.0
                                           : entanglement_of_formation(
                                                 TwoQubitState::from_pure(psi_gamma(fit.gamma)));

  // Resample tomography and witness counts together: 16 + 8 entries.
  std::vector<double> counts = dataset.counts;
  for (const auto* t : {&witness.c, &witness.d})
    for (const auto& row : *t)
      for (double v : row) counts.push_back(v);
  const std::size_t n_tomo = dataset.counts.size();
  const double tol = std::max(config.tomography.tolerance, 1e-9);
  MetricPipeline pipeline = [&](const std::vector<double>& drawn) {
    TomographyDataset d = dataset;
    std::copy(drawn.begin(), drawn.begin() + static_cast<long>(n_tomo), d.counts.begin());
    const auto rec = mle_reconstruct(d, tol, config.tomography.max_iterations);
    WitnessInput w;
    std::size_t k = n_tomo;
    for (auto* t : {&w.c, &w.d})
      for (auto& row : *t)
        for (double& v : row) v = drawn[k++];
    return std::vector<double>{fidelity_lower_bound(w).value, entanglement_of_formation(rec.rho),
                               purity(rec.rho)};
  };
  const BootstrapResult boot =
      bootstrap_errors(counts, config.bootstrap_resamples, pipeline, config.experiment.rng_seed);
  if (boot.error.size() == 3) {
    report.fidelity_lower_bound_stderr = boot.error[0];
    report.eof_stderr = boot.error[1];
    report.purity_stderr = boot.error[2];
  }
  report.bootstrap_resamples = boot.resamples;
  report.bootstrap_failures = boot.failures;
  report.validate();
  return report;
}

}  // namespace entlab
