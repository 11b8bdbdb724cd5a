#pragma once

// Laguerre–Gaussian mode fields on a polar quadrature grid, overlap
// integrals, and the fork-hologram + single-mode-fiber analyzer model.
//
// Lengths are in micrometres. Mode functions use the convention
//   LG_pm(r, φ) = sqrt(2 p! / (π (p+|m|)!)) / w · (√2 r / w)^|m|
//                 · L_p^|m|(2 r² / w²) · exp(−r² / w²) · exp(i m φ)
// with a real, positive radial envelope.

#include <complex>
#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

namespace entlab {

using Complex = std::complex<double>;

struct LGMode {
  int radial_index = 0;     // p
  int azimuthal_index = 0;  // m, OAM in units of ħ
  double waist = 1.0;       // µm

  void validate() const;
};

// Gauss–Legendre in radius over [0, radius_max], uniform (trapezoid) in
// angle, centred on (center_x, center_y) in the transverse plane.
class PolarGrid {
 public:
  static constexpr std::size_t kMinNodes = 64;

  PolarGrid(double radius_max, std::size_t n_radial, std::size_t n_angular,
            double center_x = 0.0, double center_y = 0.0);

  // Smallest grid that extends 6·max_waist beyond the beam axis when centred
  // at (center_x, center_y).
  static std::shared_ptr<const PolarGrid> covering(double max_waist, std::size_t n_radial,
                                                   std::size_t n_angular, double center_x = 0.0,
                                                   double center_y = 0.0);

  std::size_t n_radial() const { return radii_.size(); }
  std::size_t n_angular() const { return n_angular_; }
  std::size_t size() const { return radii_.size() * n_angular_; }
  double radius_max() const { return radius_max_; }
  double center_x() const { return center_x_; }
  double center_y() const { return center_y_; }
  const std::vector<double>& radii() const { return radii_; }

  // Node (i, j): radial index i, angular index j; flat index i·n_angular + j.
  double x(std::size_t i, std::size_t j) const;
  double y(std::size_t i, std::size_t j) const;
  double angle(std::size_t j) const;
  // Area element r·dr·dφ attached to node (i, ·).
  double weight(std::size_t i) const { return area_weights_[i]; }

  // Radius from the beam axis (the transverse origin) that the grid reaches
  // in every direction.
  double axis_coverage() const;
  double mean_radial_spacing() const { return radius_max_ / static_cast<double>(radii_.size()); }

  bool operator==(const PolarGrid& other) const;

 private:
  double radius_max_;
  std::size_t n_angular_;
  double center_x_;
  double center_y_;
  std::vector<double> radii_;
  std::vector<double> area_weights_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

using GridPtr = std::shared_ptr<const PolarGrid>;

struct TransverseField {
  GridPtr grid;
  std::vector<Complex> amplitudes;  // flat, i·n_angular + j

  double squared_norm() const;
};

// Normalized LG_pm on the grid. Throws DomainError when the grid does not
// cover 6 waists around the axis or its mean radial spacing exceeds waist/8.
TransverseField evaluate_mode(const LGMode& mode, const GridPtr& grid);

// ⟨a|b⟩ by quadrature. Throws InvalidArgument on grid mismatch.
Complex overlap(const TransverseField& a, const TransverseField& b);

struct AnalyzerSetting {
  int hologram_charge = 0;     // −1, 0, +1
  double displacement = 0.0;   // dislocation offset, units of analysis_waist
  double orientation = 0.0;    // rad; relative phase arg(β/α) selected
  double fiber_waist = 140.0;  // µm, Gaussian mode accepted by the fiber
  double analysis_waist = 140.0 / 1.4142135623730951;  // µm, waist of the LG basis modes
  int diffraction_order = 1;

  void validate() const;
};

struct QuadratureSpec {
  std::size_t n_radial = 256;
  std::size_t n_angular = 256;
};

// Effective projective state α|0⟩ + β|1⟩ of the hologram + fiber, with
// |0⟩ = LG00 and |1⟩ = LG01 at the analysis waist. The global phase is fixed
// so that α is real and non-negative (β real and positive when α = 0).
struct AnalyzerState {
  Complex alpha;
  Complex beta;
  double leakage = 0.0;  // 1 − (|α|² + |β|²) before renormalization

  double efficiency() const { return 1.0 - leakage; }
};

// Leakage above this threshold means the analyzer is no longer faithfully
// two-dimensional.
inline constexpr double kMaxLeakage = 0.5;

// Field accepted by the analyzer: the fiber Gaussian back-propagated through
// the displaced fork hologram, exp(i·order·charge·φ′)·G(r), normalized.
TransverseField analyzer_field(const AnalyzerSetting& setting, const GridPtr& grid);

// Dislocation-centred grid used for the analyzer overlaps.
GridPtr analyzer_grid(const AnalyzerSetting& setting, const QuadratureSpec& quad = {});

// Throws DomainError when leakage exceeds kMaxLeakage.
AnalyzerState analyzer_state(const AnalyzerSetting& setting, const QuadratureSpec& quad = {});

// Same as analyzer_state but never throws on leakage; used by scans.
AnalyzerState analyzer_state_unchecked(const AnalyzerSetting& setting,
                                       const QuadratureSpec& quad = {});

// Displacement (units of analysis_waist) at which a charge-+1 analyzer has
// |α| = |β|. Root-bracketed on [0, 10].
double balanced_displacement(const AnalyzerSetting& base, const QuadratureSpec& quad = {},
                             double tolerance = 1e-10);

// Relative coincidence-probability error caused by the fiber selecting only
// the p = 0 radial content: 1 − min(η_a, η_b) / max(η_a, η_b), η = 1 − leakage.
double radial_mismatch_penalty(const std::pair<AnalyzerSetting, AnalyzerSetting>& setting_pair,
                               const QuadratureSpec& quad = {});

// Detection probability of LG01 over LG00 for a charge-±1, on-axis analyzer
// (or LG00 over LG01 for a blank hologram). Capped at 1e16.
double distinction_ratio(const AnalyzerSetting& setting, const QuadratureSpec& quad = {});

// Matrix of overlaps ⟨LG_0m|LG_0m′⟩ for m, m′ in [−m_max, m_max].
std::vector<std::vector<Complex>> lg_overlap_matrix(int m_max, double waist,
                                                    const QuadratureSpec& quad = {});

}  // namespace entlab
