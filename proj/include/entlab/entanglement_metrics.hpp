#pragma once

// Entanglement measures and the analysis chain applied to reconstructed
// states: p + q − 1 fidelity bound, Wootters concurrence and entanglement of
// formation, best-fitting |Ψ(γ)⟩, and Poisson bootstrap error bars.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "entlab/config.hpp"
#include "entlab/experiment_sim.hpp"
#include "entlab/quantum_core.hpp"
#include "entlab/tomography.hpp"

namespace entlab {

// Coincidences in the two superposition bases. c[i][j]: anti-Stokes i, Stokes j
// with 0 = plus, 1 = minus. d[i][j]: 0 = u, 1 = d.
struct WitnessInput {
  std::array<std::array<double, 2>, 2> c{};
  std::array<std::array<double, 2>, 2> d{};

  // Picks the eight rows out of a table; throws when any is missing.
  static WitnessInput from_table(const CoincidenceTable& table);

  // Counts ≥ 0 and each table non-empty.
  void validate() const;
};

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

// p: fraction of (plus, plus) + (minus, minus); q: fraction of (u, d) + (d, u),
// the outcomes correlated by |00⟩ + |11⟩. Value p + q − 1 with binomial error.
Estimate fidelity_lower_bound(const WitnessInput& input);

double concurrence(const TwoQubitState& state);
double entanglement_of_formation(const TwoQubitState& state);
double binary_entropy(double x);

struct PureFit {
  Complex gamma;
  double fidelity = 0.0;
  bool at_infinity = false;  // |1⟩|1⟩ beats every finite γ in the domain
};

// Maximizes ⟨Ψ(γ)|ρ|Ψ(γ)⟩ over |γ| ≤ gamma_max: polar grid (0.01 in modulus,
// π/100 in phase) then compass refinement to 1e−4. Ties keep the first grid
// point, so a flat objective returns γ = 0.
PureFit best_pure_fit(const TwoQubitState& state, double gamma_max = 4.0);

struct BootstrapResult {
  std::vector<double> mean;
  std::vector<double> error;  // sample standard deviation across resamples
  int resamples = 0;
  int failures = 0;
};

using MetricPipeline = std::function<std::vector<double>(const std::vector<double>& counts)>;

// Each count is redrawn as Poisson(observed) and the pipeline re-run. Stream
// for resample i is (seed, bootstrap, i), so results do not depend on the
// thread count. Pipelines that throw are counted as failures and skipped.
BootstrapResult bootstrap_errors(const std::vector<double>& counts, int n_resamples,
                                 const MetricPipeline& pipeline, std::uint64_t seed);

// Worker threads: OAM_ENTLAB_THREADS when set and positive, else the hardware
// concurrency.
unsigned worker_threads();

struct MetricReport {
  double fidelity_lower_bound = 0.0;
  double fidelity_lower_bound_stderr = 0.0;
  double eof = 0.0;
  double eof_stderr = 0.0;
  double purity = 0.0;
  double purity_stderr = 0.0;
  Complex gamma_best;
  double fidelity_at_gamma_best = 0.0;
  double eof_of_pure_fit = 0.0;
  int bootstrap_resamples = 0;
  int bootstrap_failures = 0;

  void validate() const;
  bool operator==(const MetricReport&) const = default;
};

// Reconstructs, then evaluates every metric with bootstrap errors.
MetricReport full_report(const TomographyDataset& dataset, const WitnessInput& witness,
                         const RunConfig& config);
// Same, reusing an existing reconstruction of `dataset`.
MetricReport full_report(const ReconstructionResult& reconstruction,
                         const TomographyDataset& dataset, const WitnessInput& witness,
                         const RunConfig& config);

}  // namespace entlab
