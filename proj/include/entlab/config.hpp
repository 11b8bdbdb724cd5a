#pragma once

// Flat key = value configuration shared by every pipeline stage. Keys mirror
// the struct field names; unknown keys and malformed values are hard errors.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>

namespace entlab {

// Defaults describe the reference apparatus: p = 6.6e-3, AS transmission 0.17,
// detector efficiency 0.62, 4.5e5 trials/s. The Stokes-arm efficiency and the
// two background rates are calibrated so that the LG00/LG00 pair of the default
// source gives 310 AS singles/s, 2.0 coincidences/s and g2(0) = 22.2.
struct ExperimentConfig {
  double excitation_probability = 6.6e-3;
  double transmission_efficiency_AS = 0.17;
  double detector_efficiency = 0.62;
  double retrieval_and_transmission_S = 0.010355;  // lumped: retrieval × transmission × detector
  double repetition_rate = 4.5e5;                  // 1/s, duty cycle already folded in
  double duty_cycle = 0.5;                         // metadata only
  double delay_dt = 100.0;                         // ns
  double dephasing_time = 5.0;                     // µs; inf disables dephasing
  double background_rate_AS = 116.8;               // counts/s
  double background_rate_S = 111.8;                // counts/s
  double acquisition_time = 100.0;                 // s per setting
  std::uint64_t rng_seed = 1;

  // Source |Ψ(γ)⟩, γ = gamma_modulus · exp(i π gamma_phase).
  double gamma_modulus = 0.74;
  double gamma_phase = 0.11;  // units of π

  // Analyzer optics.
  double fiber_waist = 140.0;                            // µm
  double analysis_waist = 140.0 / 1.4142135623730951;    // µm
  bool radial_mismatch = true;

  // Start-stop histogram.
  double trial_period = 1000.0;       // ns between trials inside a measurement period
  double histogram_bin_width = 1.6;   // ns
  int histogram_windows = 5;          // off-peak trial windows on each side
  double histogram_duration = 1000.0; // s

  double efficiency_AS() const { return transmission_efficiency_AS * detector_efficiency; }
  double efficiency_S() const { return retrieval_and_transmission_S; }

  // Probabilities in (0, 1], rates ≥ 0, acquisition_time ≥ 0.
  void validate() const;
};

struct TomographyOptions {
  double tolerance = 1e-10;
  int max_iterations = 5000;
  bool subtract_accidentals = true;
};

struct ModesOptions {
  int charge = 1;
  double orientation = 0.0;
  double max_displacement = 5.0;
  int points = 51;
  int m_max = 3;
  int n_radial = 256;
  int n_angular = 256;
};

struct RunConfig {
  ExperimentConfig experiment;
  TomographyOptions tomography;
  ModesOptions modes;
  int bootstrap_resamples = 200;
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Every key with its current value, in a stable order; parse_config of the
// result reproduces the input exactly.
std::string render_config(const RunConfig& config);

}  // namespace entlab
