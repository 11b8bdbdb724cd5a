#include "entlab/lg_modes.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "entlab/errors.hpp"
#include "entlab/quadrature.hpp"

namespace entlab {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

void require_same_grid(const TransverseField& a, const TransverseField& b) {
  if (!a.grid || !b.grid) throw InvalidArgument("overlap: field without grid");
  if (a.grid != b.grid && !(*a.grid == *b.grid))
    throw InvalidArgument("overlap: fields live on different grids");
  if (a.amplitudes.size() != b.amplitudes.size())
    throw InvalidArgument("overlap: amplitude count mismatch");
}

void normalize(TransverseField& field) {
  const double n2 = field.squared_norm();
  if (!(n2 > 0.0)) throw DomainError("field has zero norm on the grid");
  const double s = 1.0 / std::sqrt(n2);
  for (auto& a : field.amplitudes) a *= s;
}

}  // namespace

void LGMode::validate() const {
  if (radial_index < 0) throw InvalidArgument("LGMode: radial_index must be >= 0");
  if (!(waist > 0.0) || !std::isfinite(waist)) throw InvalidArgument("LGMode: waist must be > 0");
}

PolarGrid::PolarGrid(double radius_max, std::size_t n_radial, std::size_t n_angular,
                     double center_x, double center_y)
    : radius_max_(radius_max), n_angular_(n_angular), center_x_(center_x), center_y_(center_y) {
  if (!(radius_max > 0.0)) throw InvalidArgument("PolarGrid: radius_max must be > 0");
  if (n_radial < kMinNodes || n_angular < kMinNodes)
    throw InvalidArgument("PolarGrid: need at least 64 radial x 64 angular nodes");
  const QuadratureRule rule = gauss_legendre(n_radial, 0.0, radius_max);
  radii_ = rule.nodes;
  const double dphi = 2.0 * kPi / static_cast<double>(n_angular);
  area_weights_.resize(n_radial);
  for (std::size_t i = 0; i < n_radial; ++i) area_weights_[i] = rule.weights[i] * radii_[i] * dphi;
  cos_.resize(n_angular);
  sin_.resize(n_angular);
  for (std::size_t j = 0; j < n_angular; ++j) {
    cos_[j] = std::cos(angle(j));
    sin_[j] = std::sin(angle(j));
  }
}

std::shared_ptr<const PolarGrid> PolarGrid::covering(double max_waist, std::size_t n_radial,
                                                     std::size_t n_angular, double center_x,
                                                     double center_y) {
  const double reach = 6.0 * max_waist + std::hypot(center_x, center_y);
  return std::make_shared<const PolarGrid>(reach, n_radial, n_angular, center_x, center_y);
}

double PolarGrid::x(std::size_t i, std::size_t j) const { return center_x_ + radii_[i] * cos_[j]; }
double PolarGrid::y(std::size_t i, std::size_t j) const { return center_y_ + radii_[i] * sin_[j]; }
double PolarGrid::angle(std::size_t j) const {
  return 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n_angular_);
}

double PolarGrid::axis_coverage() const { return radius_max_ - std::hypot(center_x_, center_y_); }

bool PolarGrid::operator==(const PolarGrid& other) const {
  return radius_max_ == other.radius_max_ && n_angular_ == other.n_angular_ &&
         center_x_ == other.center_x_ && center_y_ == other.center_y_ &&
         radii_.size() == other.radii_.size();
}

double TransverseField::squared_norm() const {
  double s = 0.0;
  const std::size_t na = grid->n_angular();
  for (std::size_t i = 0; i < grid->n_radial(); ++i) {
    double ring = 0.0;
    for (std::size_t j = 0; j < na; ++j) ring += std::norm(amplitudes[i * na + j]);
    s += grid->weight(i) * ring;
  }
  return s;
}

TransverseField evaluate_mode(const LGMode& mode, const GridPtr& grid) {
  mode.validate();
  if (!grid) throw InvalidArgument("evaluate_mode: null grid");
  const double w = mode.waist;
  if (grid->axis_coverage() < 6.0 * w * (1.0 - 1e-12))
    throw DomainError("evaluate_mode: grid covers less than 6 waists around the beam axis");
  if (grid->mean_radial_spacing() > w / 8.0)
    throw DomainError("evaluate_mode: radial node spacing exceeds waist/8");

  const int p = mode.radial_index;
  const int am = std::abs(mode.azimuthal_index);
  const double norm = std::sqrt(2.0 * factorial(p) / (kPi * factorial(p + am))) / w;

  TransverseField field{grid, std::vector<Complex>(grid->size())};
  const std::size_t na = grid->n_angular();
  for (std::size_t i = 0; i < grid->n_radial(); ++i) {
    for (std::size_t j = 0; j < na; ++j) {
      const double x = grid->x(i, j);
      const double y = grid->y(i, j);
      const double r2 = (x * x + y * y) / (w * w);
      const double rho = std::sqrt(2.0 * r2);
      const double radial = norm * std::pow(rho, am) *
                            std::assoc_laguerre(static_cast<unsigned>(p),
                                                static_cast<unsigned>(am), 2.0 * r2) *
                            std::exp(-r2);
      const double phi = std::atan2(y, x);
      field.amplitudes[i * na + j] = std::polar(radial, mode.azimuthal_index * phi);
    }
  }
  normalize(field);
  return field;
}

Complex overlap(const TransverseField& a, const TransverseField& b) {
  require_same_grid(a, b);
  const auto& g = *a.grid;
  const std::size_t na = g.n_angular();
  Complex total{0.0, 0.0};
  for (std::size_t i = 0; i < g.n_radial(); ++i) {
    Complex ring{0.0, 0.0};
    for (std::size_t j = 0; j < na; ++j)
      ring += std::conj(a.amplitudes[i * na + j]) * b.amplitudes[i * na + j];
    total += g.weight(i) * ring;
  }
  return total;
}

void AnalyzerSetting::validate() const {
  if (hologram_charge < -1 || hologram_charge > 1)
    throw InvalidArgument("AnalyzerSetting: hologram_charge must be -1, 0 or +1");
  if (!(displacement >= 0.0) || !std::isfinite(displacement))
    throw InvalidArgument("AnalyzerSetting: displacement must be >= 0");
  if (!(fiber_waist > 0.0)) throw InvalidArgument("AnalyzerSetting: fiber_waist must be > 0");
  if (!(analysis_waist > 0.0)) throw InvalidArgument("AnalyzerSetting: analysis_waist must be > 0");
  if (diffraction_order != 1 && diffraction_order != -1)
    throw InvalidArgument("AnalyzerSetting: diffraction_order must be +1 or -1");
  if (!std::isfinite(orientation)) throw InvalidArgument("AnalyzerSetting: orientation not finite");
}

namespace {

// Dislocation position. With the dislocation on the +x axis the selected
// superposition has arg(β/α) = π; rotating it by θ0 shifts that phase by −θ0.
std::pair<double, double> dislocation_point(const AnalyzerSetting& s) {
  const double offset = s.displacement * s.analysis_waist;
  const double theta0 = kPi - s.orientation;
  return {offset * std::cos(theta0), offset * std::sin(theta0)};
}

}  // namespace

GridPtr analyzer_grid(const AnalyzerSetting& setting, const QuadratureSpec& quad) {
  setting.validate();
  const auto [x0, y0] = dislocation_point(setting);
  return PolarGrid::covering(std::max(setting.fiber_waist, setting.analysis_waist), quad.n_radial,
                             quad.n_angular, x0, y0);
}

TransverseField analyzer_field(const AnalyzerSetting& setting, const GridPtr& grid) {
  setting.validate();
  const auto [x0, y0] = dislocation_point(setting);
  const double wf = setting.fiber_waist;
  const double g0 = std::sqrt(2.0 / kPi) / wf;
  const int winding = setting.diffraction_order * setting.hologram_charge;

  TransverseField field{grid, std::vector<Complex>(grid->size())};
  const std::size_t na = grid->n_angular();
  for (std::size_t i = 0; i < grid->n_radial(); ++i) {
    for (std::size_t j = 0; j < na; ++j) {
      const double x = grid->x(i, j);
      const double y = grid->y(i, j);
      const double gauss = g0 * std::exp(-(x * x + y * y) / (wf * wf));
      const double phase = winding == 0 ? 0.0 : winding * std::atan2(y - y0, x - x0);
      field.amplitudes[i * na + j] = std::polar(gauss, phase);
    }
  }
  normalize(field);
  return field;
}

AnalyzerState analyzer_state_unchecked(const AnalyzerSetting& setting, const QuadratureSpec& quad) {
  const GridPtr grid = analyzer_grid(setting, quad);
  const TransverseField selected = analyzer_field(setting, grid);
  const TransverseField lg00 = evaluate_mode({0, 0, setting.analysis_waist}, grid);
  const TransverseField lg01 = evaluate_mode({0, 1, setting.analysis_waist}, grid);

  Complex alpha = overlap(lg00, selected);
  Complex beta = overlap(lg01, selected);
  const double weight = std::norm(alpha) + std::norm(beta);
  if (!(weight > 0.0)) throw DomainError("analyzer_state: no weight in the {LG00, LG01} subspace");

  // Strip the global phase; amplitudes below quadrature noise are zeroed so the
  // phase reference does not pick up round-off.
  const double floor = 1e-14;
  if (std::abs(alpha) < floor) alpha = 0.0;
  if (std::abs(beta) < floor) beta = 0.0;
  const Complex ref = std::abs(alpha) > 0.0 ? alpha : beta;
  const Complex unit_phase = std::conj(ref) / std::abs(ref);
  const double scale = 1.0 / std::sqrt(std::norm(alpha) + std::norm(beta));

  AnalyzerState out;
  out.alpha = alpha * unit_phase * scale;
  out.beta = beta * unit_phase * scale;
  out.leakage = std::max(0.0, 1.0 - weight);
  return out;
}

AnalyzerState analyzer_state(const AnalyzerSetting& setting, const QuadratureSpec& quad) {
  AnalyzerState s = analyzer_state_unchecked(setting, quad);
  if (s.leakage > kMaxLeakage)
    throw DomainError("analyzer_state: leakage " + std::to_string(s.leakage) +
                      " out of the two-dimensional subspace exceeds 0.5");
  return s;
}

double balanced_displacement(const AnalyzerSetting& base, const QuadratureSpec& quad,
                             double tolerance) {
  AnalyzerSetting s = base;
  if (s.hologram_charge * s.diffraction_order != 1)
    throw InvalidArgument("balanced_displacement: needs an analyzer selecting +1 OAM");
  auto imbalance = [&](double d) {
    s.displacement = d;
    const AnalyzerState st = analyzer_state_unchecked(s, quad);
    return std::norm(st.alpha) - std::norm(st.beta);
  };
  double lo = 0.0;
  double hi = 10.0;
  const double f_lo = imbalance(lo);
  const double f_hi = imbalance(hi);
  if (!(f_lo < 0.0 && f_hi > 0.0))
    throw DomainError("balanced_displacement: no sign change on [0, 10]");
  std::uintmax_t max_iter = 200;
  auto stop = [tolerance](double a, double b) { return std::abs(b - a) <= tolerance; };
  const auto [a, b] = boost::math::tools::toms748_solve(imbalance, lo, hi, f_lo, f_hi, stop, max_iter);
  return 0.5 * (a + b);
}

double radial_mismatch_penalty(const std::pair<AnalyzerSetting, AnalyzerSetting>& setting_pair,
                               const QuadratureSpec& quad) {
  const double ea = analyzer_state(setting_pair.first, quad).efficiency();
  const double eb = analyzer_state(setting_pair.second, quad).efficiency();
  return 1.0 - std::min(ea, eb) / std::max(ea, eb);
}

double distinction_ratio(const AnalyzerSetting& setting, const QuadratureSpec& quad) {
  const AnalyzerState s = analyzer_state(setting, quad);
  const double pa = std::norm(s.alpha);
  const double pb = std::norm(s.beta);
  constexpr double cap = 1e16;
  const double wanted = setting.hologram_charge == 0 ? pa : pb;
  const double unwanted = setting.hologram_charge == 0 ? pb : pa;
  if (unwanted * cap <= wanted) return cap;
  return wanted / unwanted;
}

std::vector<std::vector<Complex>> lg_overlap_matrix(int m_max, double waist,
                                                    const QuadratureSpec& quad) {
  if (m_max < 0) throw InvalidArgument("lg_overlap_matrix: m_max must be >= 0");
  const GridPtr grid = PolarGrid::covering(waist, quad.n_radial, quad.n_angular);
  std::vector<TransverseField> fields;
  for (int m = -m_max; m <= m_max; ++m) fields.push_back(evaluate_mode({0, m, waist}, grid));
  std::vector<std::vector<Complex>> out(fields.size(), std::vector<Complex>(fields.size()));
  for (std::size_t a = 0; a < fields.size(); ++a)
    for (std::size_t b = 0; b < fields.size(); ++b) out[a][b] = overlap(fields[a], fields[b]);
  return out;
}

}  // namespace entlab
