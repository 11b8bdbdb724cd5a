#pragma once

// Forward model of the coincidence experiment: dephasing of the stored
// excitation, analyzer optics, arm efficiencies, background and multi-pair
// accidentals, Poisson counting, and the start-stop delay histogram.

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "entlab/config.hpp"
#include "entlab/lg_modes.hpp"
#include "entlab/quantum_core.hpp"
#include "entlab/rng.hpp"

namespace entlab {

using SettingPair = std::pair<BasisLabel, BasisLabel>;  // (anti-Stokes, Stokes)

struct CoincidenceRow {
  BasisLabel setting_as = BasisLabel::zero;
  BasisLabel setting_s = BasisLabel::zero;
  std::uint64_t coincidences = 0;
  std::uint64_t singles_as = 0;
  std::uint64_t singles_s = 0;
  double duration_s = 0.0;

  bool operator==(const CoincidenceRow&) const = default;
};

struct CoincidenceTable {
  std::vector<CoincidenceRow> rows;

  // coincidences ≤ min(singles) and duration ≥ 0 on every row.
  void validate() const;
  bool operator==(const CoincidenceTable&) const = default;
};

// Start-stop delays binned over 2·windows + 1 trial windows. Window k holds
// delays within half a period of peak_delay_ns + k·period_ns.
struct CoincidenceHistogram {
  double bin_width_ns = 1.6;
  double first_bin_ns = 0.0;  // lower edge of bin 0
  double period_ns = 1000.0;
  double peak_delay_ns = 100.0;
  std::vector<std::uint64_t> counts;

  double bin_center(std::size_t i) const {
    return first_bin_ns + (static_cast<double>(i) + 0.5) * bin_width_ns;
  }
  // Trial-window index of bin i.
  long window_of(std::size_t i) const;
};

struct CoincidenceProbability {
  double signal = 0.0;      // correlated pair detected in both arms
  double accidental = 0.0;  // uncorrelated detections in the same trial
  double total() const { return signal + accidental; }
};

struct G2Estimate {
  double value = 0.0;
  double error = 0.0;  // one standard error
};

// Phase damping of the atomic qubit during the storage delay:
// Kraus {√(1−λ/2)·I, √(λ/2)·σz} on the second factor, λ = 1 − exp(−δt/T2).
TwoQubitState dephased_state(const ExperimentConfig& config, const PureTwoQubit& source);

// Weight of the white-noise admixture that background-driven accidentals
// produce in raw (unsubtracted) coincidence data. Zero when both background
// rates vanish.
double accidental_noise_weight(const ExperimentConfig& config);

// Dephased state mixed with I/4 at accidental_noise_weight(config).
TwoQubitState effective_state(const ExperimentConfig& config, const PureTwoQubit& source);

// Expected pair detections over `duration` seconds summed across a complete
// product basis: trials × p·η_AS·η_S, plus the accidental floor unless
// `accidentals_subtracted`.
double calibrated_exposure(const ExperimentConfig& config, double duration,
                           bool accidentals_subtracted);

// |Ψ(γ)⟩ from the config's gamma_modulus / gamma_phase.
PureTwoQubit configured_source(const ExperimentConfig& config);

// Physical analyzers standing in for the six named basis states: blank
// hologram for |0⟩, on-axis fork for |1⟩, fork displaced to the balanced point
// with orientation 0, π, π/2, −π/2 for |+⟩, |−⟩, |u⟩, |d⟩.
class AnalyzerBank {
 public:
  AnalyzerBank(double fiber_waist, double analysis_waist, const QuadratureSpec& quad = {});

  const AnalyzerSetting& setting(BasisLabel label) const { return settings_[index(label)]; }
  const AnalyzerState& state(BasisLabel label) const { return states_[index(label)]; }
  MeasBasisState basis_state(BasisLabel label) const;
  double balanced_displacement() const { return balanced_; }

  // Radial transmission of a computational analyzer relative to the better
  // matched of the two (η_label / max(η_zero, η_one)); 1 for superpositions.
  double radial_factor(BasisLabel label) const;

 private:
  static std::size_t index(BasisLabel label) { return static_cast<std::size_t>(label); }
  std::array<AnalyzerSetting, 6> settings_;
  std::array<AnalyzerState, 6> states_;
  double balanced_ = 0.0;
};

class Experiment {
 public:
  explicit Experiment(ExperimentConfig config, const QuadratureSpec& quad = {});

  const ExperimentConfig& config() const { return config_; }
  const AnalyzerBank& analyzers() const { return bank_; }

  // Per-trial single-arm detection probabilities for a given analyzer.
  double singles_probability_as(const TwoQubitState& state, BasisLabel a) const;
  double singles_probability_s(const TwoQubitState& state, BasisLabel b) const;

  // Per-trial coincidence probability. Throws DomainError when above 1.
  CoincidenceProbability coincidence_probability(const TwoQubitState& state, BasisLabel a,
                                                 BasisLabel b) const;

  // Probability that one trial produces two or more detections in an arm pair
  // from independent excitations (the multi-pair term of the accidentals).
  double multi_pair_probability(const TwoQubitState& state, BasisLabel a, BasisLabel b) const;

  // Poisson counts for each setting pair over `duration` seconds.
  // `state` is the signal state seen by the analyzers (no accidental
  // admixture); a PureTwoQubit source is dephased first. Stream index selects
  // an independent RNG stream under the configured seed.
  CoincidenceTable simulate_counts(const TwoQubitState& state, const std::vector<SettingPair>& settings,
                                   double duration, rng::Purpose purpose,
                                   std::uint64_t stream_index = 0) const;
  CoincidenceTable simulate_counts(const PureTwoQubit& source, const std::vector<SettingPair>& settings,
                                   double duration, rng::Purpose purpose,
                                   std::uint64_t stream_index = 0) const;

  // Start-stop histogram of the LG00/LG00 analyzer pair.
  CoincidenceHistogram simulate_histogram(const TwoQubitState& state, double duration,
                                          std::uint64_t stream_index = 0) const;

  // 1 + signal/accidental for the LG00/LG00 pair.
  double expected_g2(const TwoQubitState& state) const;

  double exposure(double duration, bool accidentals_subtracted) const {
    return calibrated_exposure(config_, duration, accidentals_subtracted);
  }

 private:
  ExperimentConfig config_;
  AnalyzerBank bank_;
};

// Free-function forms that build a one-off Experiment.
CoincidenceProbability coincidence_probability(const TwoQubitState& state, BasisLabel a,
                                               BasisLabel b, const ExperimentConfig& config);
CoincidenceTable simulate_counts(const PureTwoQubit& source, const std::vector<SettingPair>& settings,
                                 const ExperimentConfig& config);

// Poisson(exposure · ⟨ab|ρ|ab⟩) per setting with unit singles scaling; the
// projector-level model used for closed-loop tomography checks.
CoincidenceTable simulate_projective_counts(const TwoQubitState& state,
                                            const std::vector<SettingPair>& settings,
                                            double exposure, rng::Engine& engine);

// Histogram with Poisson(peak_mean) events in the zero-delay window and
// Poisson(offpeak_mean) in each of 2·windows off-peak windows.
CoincidenceHistogram synthesize_histogram(double peak_mean, double offpeak_mean, int windows,
                                          double bin_width_ns, double period_ns,
                                          double peak_delay_ns, rng::Engine& engine);

// Peak-window coincidences over the mean off-peak window, Poisson error
// propagated from both. Throws DomainError with fewer than 3 off-peak windows
// or no off-peak counts.
G2Estimate g2_estimate(const CoincidenceHistogram& histogram);

// The 16 product settings {zero, one, plus, u}², informationally complete.
std::vector<SettingPair> tomography_settings();
// {plus, minus}² followed by {u, d}².
std::vector<SettingPair> witness_settings();

}  // namespace entlab
