#include "entlab/tomography.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "entlab/errors.hpp"

namespace entlab {

namespace {

constexpr double kProbabilityFloor = 1e-12;
constexpr double kRankCutoff = 1e-12;
constexpr int kStableIterations = 3;

std::array<Mat2, 4> paulis() {
  const Complex i{0.0, 1.0};
  std::array<Mat2, 4> s;
  s[0] = Mat2::Identity();
  s[1] << 0.0, 1.0, 1.0, 0.0;
  s[2] << 0.0, -i, i, 0.0;
  s[3] << 1.0, 0.0, 0.0, -1.0;
  return s;
}

Mat4 projector(const SettingPair& s) {
  const Vec4 v = product_ket(MeasBasisState(s.first).ket(), MeasBasisState(s.second).ket());
  return v * v.adjoint();
}

// Probability of every setting for the current ρ, floored.
std::vector<double> probabilities(const std::vector<Mat4>& proj, const Mat4& rho) {
  std::vector<double> p(proj.size());
  for (std::size_t k = 0; k < proj.size(); ++k)
    p[k] = std::max((proj[k] * rho).trace().real(), kProbabilityFloor);
  return p;
}

double likelihood(const TomographyDataset& d, const std::vector<double>& p) {
  double l = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double mean = d.exposures[k] * p[k];
    if (d.counts[k] > 0.0) l += d.counts[k] * std::log(mean);
    l -= mean;
  }
  return l;
}

// Lower-triangular T ↔ 16 reals: diagonal first, then (re, im) below it.
using Params = Eigen::Matrix<double, 16, 1>;
using Hessian = Eigen::Matrix<double, 16, 16>;

Mat4 unpack(const Params& x) {
  Mat4 t = Mat4::Zero();
  int k = 4;
  for (int i = 0; i < 4; ++i) t(i, i) = x(i);
  for (int i = 1; i < 4; ++i)
    for (int j = 0; j < i; ++j, k += 2) t(i, j) = Complex(x(k), x(k + 1));
  return t;
}

Params pack(const Mat4& t) {
  Params x;
  int k = 4;
  for (int i = 0; i < 4; ++i) x(i) = t(i, i).real();
  for (int i = 1; i < 4; ++i)
    for (int j = 0; j < i; ++j, k += 2) {
      x(k) = t(i, j).real();
      x(k + 1) = t(i, j).imag();
    }
  return x;
}

Mat4 rho_of(const Params& x) {
  const Mat4 t = unpack(x);
  const Mat4 m = t.adjoint() * t;
  return m / m.trace().real();
}

struct Evaluation {
  double value = 0.0;
  Params gradient;
  std::vector<double> p;
};

// L(p) − L(ref) without cancellation against the large absolute value.
double likelihood_gain(const TomographyDataset& d, const std::vector<double>& p,
                       const std::vector<double>& ref) {
  double g = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double dp = p[k] - ref[k];
    if (d.counts[k] > 0.0) g += d.counts[k] * std::log1p(dp / ref[k]);
    g -= d.exposures[k] * dp;
  }
  return g;
}

Evaluation evaluate(const TomographyDataset& d, const std::vector<Mat4>& proj, const Params& x) {
  const Mat4 t = unpack(x);
  const Mat4 m = t.adjoint() * t;
  const double tau = m.trace().real();
  const Mat4 rho = m / tau;
  Evaluation e;
  e.p = probabilities(proj, rho);
  const auto& p = e.p;
  e.value = likelihood(d, p);
  Mat4 r = Mat4::Zero();
  for (std::size_t k = 0; k < p.size(); ++k) r += (d.counts[k] / p[k] - d.exposures[k]) * proj[k];
  const Mat4 g = (r - (r * rho).trace().real() * Mat4::Identity()) / tau;
  e.gradient = pack(2.0 * t * g);
  return e;
}

// Lower-triangular T with T†T = ρ, from the Cholesky factor of the
// index-reversed matrix.
Mat4 lower_factor(const Mat4& rho) {
  Mat4 j = Mat4::Zero();
  for (int i = 0; i < 4; ++i) j(i, 3 - i) = 1.0;
  Eigen::LLT<Mat4> llt(j * rho * j);
  if (llt.info() != Eigen::Success) throw NumericalError("mle_reconstruct: initial state not positive");
  const Mat4 l = llt.matrixL();
  return j * l.adjoint() * j;
}

}  // namespace

TomographyDataset TomographyDataset::from_table(const CoincidenceTable& table, double exposure_rate) {
  if (!(exposure_rate > 0.0)) throw InvalidArgument("TomographyDataset: exposure rate must be > 0");
  TomographyDataset d;
  for (const auto& r : table.rows) {
    d.settings.emplace_back(r.setting_as, r.setting_s);
    d.counts.push_back(static_cast<double>(r.coincidences));
    d.exposures.push_back(exposure_rate * r.duration_s);
  }
  d.validate();
  return d;
}

TomographyDataset TomographyDataset::from_table(const CoincidenceTable& table,
                                                const ExperimentConfig& config,
                                                bool subtract_accidentals) {
  TomographyDataset d;
  const double rate = calibrated_exposure(config, 1.0, subtract_accidentals);
  for (const auto& r : table.rows) {
    double n = static_cast<double>(r.coincidences);
    if (subtract_accidentals && r.duration_s > 0.0) {
      const double trials = config.repetition_rate * r.duration_s;
      n = std::max(0.0, n - static_cast<double>(r.singles_as) * static_cast<double>(r.singles_s) / trials);
    }
    d.settings.emplace_back(r.setting_as, r.setting_s);
    d.counts.push_back(n);
    d.exposures.push_back(rate * r.duration_s);
  }
  d.validate();
  return d;
}

void TomographyDataset::validate() const {
  if (settings.empty()) throw InvalidArgument("TomographyDataset: no settings");
  if (counts.size() != settings.size() || exposures.size() != settings.size())
    throw InvalidArgument("TomographyDataset: size mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (!(counts[k] >= 0.0) || !std::isfinite(counts[k]))
      throw InvalidArgument("TomographyDataset: counts must be finite and >= 0");
    if (!(exposures[k] > 0.0) || !std::isfinite(exposures[k]))
      throw InvalidArgument("TomographyDataset: exposures must be finite and > 0");
    total += counts[k];
  }
  if (total == 0.0) throw InvalidArgument("TomographyDataset: all counts are zero");
}

TomographyDataset TomographyDataset::swapped() const {
  TomographyDataset out = *this;
  for (auto& s : out.settings) std::swap(s.first, s.second);
  return out;
}

LinearInversion linear_inversion(const TomographyDataset& dataset) {
  dataset.validate();
  const auto s = paulis();
  const Eigen::Index n = static_cast<Eigen::Index>(dataset.settings.size());
  Eigen::MatrixXd a(n, 16);
  Eigen::VectorXd f(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& [la, lb] = dataset.settings[static_cast<std::size_t>(k)];
    const Vec2 ka = MeasBasisState(la).ket();
    const Vec2 kb = MeasBasisState(lb).ket();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        a(k, 4 * i + j) = 0.25 * ((ka.adjoint() * s[i] * ka)(0, 0) * (kb.adjoint() * s[j] * kb)(0, 0)).real();
    f(k) = dataset.counts[static_cast<std::size_t>(k)] / dataset.exposures[static_cast<std::size_t>(k)];
  }
  LinearInversion out;
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > kRankCutoff * hi))
    throw NumericalError("linear_inversion: settings are not informationally complete");
  out.gram_condition = hi / lo;

  const Eigen::VectorXd rhs = f - a.col(0);
  const Eigen::MatrixXd rest = a.rightCols(15);
  const Eigen::VectorXd r = rest.colPivHouseholderQr().solve(rhs);
  Mat4 rho = kron(s[0], s[0]) / 4.0;
  for (int idx = 1; idx < 16; ++idx) rho += r(idx - 1) * kron(s[idx / 4], s[idx % 4]) / 4.0;
  out.matrix = 0.5 * (rho + rho.adjoint());
  return out;
}

double log_likelihood(const TomographyDataset& dataset, const Mat4& rho) {
  std::vector<Mat4> proj;
  for (const auto& s : dataset.settings) proj.push_back(projector(s));
  return likelihood(dataset, probabilities(proj, rho));
}

ReconstructionResult mle_reconstruct(const TomographyDataset& dataset, double tolerance,
                                     int max_iterations) {
  if (!(tolerance > 0.0)) throw InvalidArgument("mle_reconstruct: tolerance must be > 0");
  if (max_iterations <= 0) throw InvalidArgument("mle_reconstruct: max_iterations must be > 0");
  const LinearInversion lin = linear_inversion(dataset);

  std::vector<Mat4> proj;
  for (const auto& s : dataset.settings) proj.push_back(projector(s));

  constexpr double kStartMixing = 1e-3;
  const Mat4 start =
      (1.0 - kStartMixing) * project_to_density(lin.matrix) + kStartMixing * Mat4::Identity() / 4.0;
  Params x = pack(lower_factor(start));

  Evaluation cur = evaluate(dataset, proj, x);
  std::vector<double> trace{cur.value};
  Hessian h = Hessian::Identity();
  bool fresh = true;
  int stable = 0;
  int iter = 0;
  bool converged = false;

  while (iter < max_iterations) {
    ++iter;
    if (cur.gradient.squaredNorm() == 0.0) {
      converged = true;
      break;
    }
    Params dir = h * cur.gradient;
    double slope = cur.gradient.dot(dir);
    if (!(slope > 0.0)) {
      h.setIdentity();
      fresh = true;
      dir = cur.gradient;
      slope = cur.gradient.squaredNorm();
    }

    double step = 1.0;
    Params next;
    Evaluation cand;
    double gain = 0.0;
    bool accepted = false;
    for (int k = 0; k < 80; ++k, step *= 0.5) {
      next = x + step * dir;
      if (next.squaredNorm() == 0.0) continue;
      next /= next.norm();
      cand = evaluate(dataset, proj, next);
      gain = likelihood_gain(dataset, cand.p, cur.p);
      if (std::isfinite(gain) && gain >= 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!fresh) {
        h.setIdentity();
        fresh = true;
        continue;
      }
      // No representable ascent step remains.
      converged = true;
      break;
    }

    const Params s = next - x;
    const Params y = cur.gradient - cand.gradient;  // gradient change of −L
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) h *= sy / y.squaredNorm();
      const double rho_k = 1.0 / sy;
      const Hessian v = Hessian::Identity() - rho_k * s * y.transpose();
      h = v * h * v.transpose() + rho_k * s * s.transpose();
      fresh = false;
    }

    const double change = std::abs(gain) / std::max(1.0, std::abs(cur.value));
    x = next;
    cur = cand;
    trace.push_back(trace.back() + gain);
    stable = change < tolerance ? stable + 1 : 0;
    if (stable >= kStableIterations) {
      converged = true;
      break;
    }
  }

  Mat4 rho = rho_of(x);
  rho = 0.5 * (rho + rho.adjoint());
  return ReconstructionResult{TwoQubitState(rho), cur.value, iter, converged, lin.gram_condition,
                              std::move(trace)};
}

std::vector<double> predicted_probabilities(const TwoQubitState& rho,
                                            const std::vector<SettingPair>& settings) {
  std::vector<double> out;
  out.reserve(settings.size());
  for (const auto& [a, b] : settings) out.push_back(born_probability(rho, a, b));
  return out;
}

}  // namespace entlab
