#pragma once

// Two-qubit state reconstruction from product-basis coincidence counts:
// linear inversion and Poisson maximum likelihood over physical states.

#include <vector>

#include "entlab/config.hpp"
#include "entlab/experiment_sim.hpp"
#include "entlab/quantum_core.hpp"

namespace entlab {

struct TomographyDataset {
  std::vector<SettingPair> settings;
  std::vector<double> counts;     // coincidences, accidentals removed when requested
  std::vector<double> exposures;  // N_k: expected counts for a unit-probability projector

  // Exposure per row is `exposure_rate` × the row duration.
  static TomographyDataset from_table(const CoincidenceTable& table, double exposure_rate);

  // Exposure from the config's calibrated pair rate. With `subtract_accidentals`
  // each row loses singles_as·singles_s / trials (clamped at zero).
  static TomographyDataset from_table(const CoincidenceTable& table, const ExperimentConfig& config,
                                      bool subtract_accidentals);

  // Sizes agree, counts ≥ 0, exposures > 0, at least one count.
  void validate() const;

  // Swaps the roles of the two qubits in every setting.
  TomographyDataset swapped() const;
};

struct LinearInversion {
  Mat4 matrix;                // Hermitian, unit trace, possibly not PSD
  double gram_condition = 0;  // of the 16-column measurement map
};

// Least squares in the Pauli-product basis with the identity coefficient
// fixed by normalization. Throws NumericalError when the settings do not span
// the operator space.
LinearInversion linear_inversion(const TomographyDataset& dataset);

struct ReconstructionResult {
  TwoQubitState rho;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  double gram_condition = 0.0;
  std::vector<double> likelihood_trace;  // one entry per accepted iterate, starting point first
};

// Maximizes Σ n_k log(N_k p_k) − N_k p_k over ρ = T†T / Tr(T†T), T lower
// triangular. BFGS ascent with backtracking; stops once the relative
// likelihood change stays below `tolerance` for three iterations.
ReconstructionResult mle_reconstruct(const TomographyDataset& dataset, double tolerance = 1e-10,
                                     int max_iterations = 5000);

double log_likelihood(const TomographyDataset& dataset, const Mat4& rho);

std::vector<double> predicted_probabilities(const TwoQubitState& rho,
                                            const std::vector<SettingPair>& settings);

}  // namespace entlab
