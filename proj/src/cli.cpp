#include "entlab/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "entlab/entanglement_metrics.hpp"
#include "entlab/errors.hpp"
#include "entlab/experiment_sim.hpp"
#include "entlab/io.hpp"
#include "entlab/lg_modes.hpp"
#include "entlab/tomography.hpp"

namespace entlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class StageFailure : public std::runtime_error {
 public:
  StageFailure(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

template <typename F>
auto stage(int code, const char* name, F&& f) {
  try {
    return f();
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(code, std::string(name) + ": " + e.what());
  }
}

QuadratureSpec quadrature(const RunConfig& cfg) {
  return {static_cast<std::size_t>(cfg.modes.n_radial), static_cast<std::size_t>(cfg.modes.n_angular)};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ModeRecord record_of(const AnalyzerSetting& s, const AnalyzerState& st) {
  return {s.hologram_charge, s.displacement, s.orientation, st.alpha, st.beta, st.leakage};
}

// --- stages -------------------------------------------------------------------

json modes_stage(const RunConfig& cfg) {
  const auto quad = quadrature(cfg);
  const ExperimentConfig& e = cfg.experiment;
  json out;

  const AnalyzerBank bank(e.fiber_waist, e.analysis_waist, quad);
  json analyzers = json::object();
  for (BasisLabel l : {BasisLabel::zero, BasisLabel::one, BasisLabel::plus, BasisLabel::minus,
                       BasisLabel::u, BasisLabel::d})
    analyzers[std::string(to_string(l))] = to_json(record_of(bank.setting(l), bank.state(l)));
  out["analyzers"] = analyzers;
  out["balanced_displacement"] = bank.balanced_displacement();

  AnalyzerSetting base = bank.setting(BasisLabel::one);
  base.hologram_charge = cfg.modes.charge;
  base.orientation = cfg.modes.orientation;
  json sweep = json::array();
  for (int k = 0; k < cfg.modes.points; ++k) {
    AnalyzerSetting s = base;
    s.displacement = cfg.modes.max_displacement * k / (cfg.modes.points - 1);
    sweep.push_back(to_json(record_of(s, analyzer_state_unchecked(s, quad))));
  }
  out["sweep"] = sweep;

  out["distinction_ratio"] = distinction_ratio(bank.setting(BasisLabel::one), quad);
  out["radial_mismatch_penalty"] = {
      {"zero_one",
       radial_mismatch_penalty({bank.setting(BasisLabel::zero), bank.setting(BasisLabel::one)}, quad)},
      {"plus_minus",
       radial_mismatch_penalty({bank.setting(BasisLabel::plus), bank.setting(BasisLabel::minus)}, quad)},
      {"plus_u",
       radial_mismatch_penalty({bank.setting(BasisLabel::plus), bank.setting(BasisLabel::u)}, quad)}};

  json overlaps = json::array();
  for (const auto& row : lg_overlap_matrix(cfg.modes.m_max, e.analysis_waist, quad)) {
    json r = json::array();
    for (Complex c : row) r.push_back({c.real(), c.imag()});
    overlaps.push_back(r);
  }
  out["overlap_matrix"] = {{"m_max", cfg.modes.m_max}, {"waist", e.analysis_waist}, {"entries", overlaps}};
  return out;
}

struct Simulation {
  CoincidenceTable tomography;
  CoincidenceTable witness;
  CoincidenceHistogram histogram;
  double expected_g2 = 0.0;
  G2Estimate g2;
};

Simulation simulate_stage(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  if (!(e.acquisition_time > 0.0))
    throw InvalidArgument("acquisition_time is 0; there is no data to simulate");
  const Experiment exp(e, quadrature(cfg));
  const TwoQubitState state = dephased_state(e, configured_source(e));
  Simulation sim;
  sim.tomography = exp.simulate_counts(state, tomography_settings(), e.acquisition_time,
                                       rng::Purpose::tomography_counts);
  sim.witness = exp.simulate_counts(state, witness_settings(), e.acquisition_time,
                                    rng::Purpose::witness_counts);
  sim.histogram = exp.simulate_histogram(state, e.histogram_duration);
  sim.expected_g2 = exp.expected_g2(state);
  sim.g2 = g2_estimate(sim.histogram);
  std::uint64_t total = 0;
  for (const auto& r : sim.tomography.rows) total += r.coincidences;
  if (total == 0) throw InvalidArgument("simulated tomography data contain no coincidences");
  return sim;
}

TomographyDataset dataset_of(const CoincidenceTable& table, const RunConfig& cfg) {
  return TomographyDataset::from_table(table, cfg.experiment, cfg.tomography.subtract_accidentals);
}

ReconstructionResult tomo_stage(const CoincidenceTable& table, const RunConfig& cfg) {
  return mle_reconstruct(dataset_of(table, cfg), cfg.tomography.tolerance,
                         cfg.tomography.max_iterations);
}

CoincidenceTable load_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return read_table_csv(in);
}

std::string table_csv(const CoincidenceTable& t) {
  std::ostringstream out;
  write_table_csv(out, t);
  return out.str();
}

std::string histogram_csv(const CoincidenceHistogram& h) {
  std::ostringstream out;
  write_histogram_csv(out, h);
  return out.str();
}

std::string summary_text(const Simulation& sim, const ReconstructionResult& rec,
                         const MetricReport& m) {
  std::ostringstream s;
  const double mod = std::abs(m.gamma_best);
  const double phase = std::arg(m.gamma_best) / std::numbers::pi;
  s << "g2_AS,S(0)             " << fixed(sim.g2.value, 2) << " +/- " << fixed(sim.g2.error, 2)
    << "  (model " << fixed(sim.expected_g2, 2) << ")\n";
  s << "fidelity lower bound   " << fixed(m.fidelity_lower_bound, 3) << " +/- "
    << fixed(m.fidelity_lower_bound_stderr, 3)
    << (m.fidelity_lower_bound > 0.5 ? "  entangled (> 0.5)\n" : "  not certified (<= 0.5)\n");
  s << "EOF                    " << fixed(m.eof, 3) << " +/- " << fixed(m.eof_stderr, 3) << "\n";
  s << "purity                 " << fixed(m.purity, 3) << " +/- " << fixed(m.purity_stderr, 3)
    << "\n";
  s << "gamma_best             " << fixed(mod, 3) << " exp(i " << fixed(phase, 3) << " pi)\n";
  s << "fidelity at gamma_best " << fixed(m.fidelity_at_gamma_best, 3) << "\n";
  s << "EOF of pure fit        " << fixed(m.eof_of_pure_fit, 3) << "\n";
  s << "MLE iterations         " << rec.iterations << (rec.converged ? " (converged)" : " (not converged)")
    << "\n";
  s << "bootstrap              " << m.bootstrap_resamples << " resamples, " << m.bootstrap_failures
    << " failed\n";
  return s.str();
}

void write_manifest(const RunManifest& manifest, const RunConfig& cfg) {
  const json j{{"command", std::string(to_string(manifest.command))},
               {"config_path", manifest.config_path.string()},
               {"output_dir", manifest.output_dir.string()},
               {"seed", cfg.experiment.rng_seed},
               {"format_version", manifest.format_version},
               {"timestamp", timestamp_utc()}};
  write_file(manifest.output_dir / files::manifest, dump(j));
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::modes: return "modes";
    case Command::simulate: return "simulate";
    case Command::tomo: return "tomo";
    case Command::metrics: return "metrics";
    case Command::report: return "report";
  }
  return "?";
}

RunConfig resolve_config(const RunManifest& manifest) {
  RunConfig cfg = manifest.config_path.empty() ? RunConfig{} : load_config(manifest.config_path);
  if (manifest.seed) cfg.experiment.rng_seed = *manifest.seed;
  if (manifest.resamples) {
    if (*manifest.resamples < 100) throw ConfigError("--resamples must be >= 100");
    cfg.bootstrap_resamples = *manifest.resamples;
  }
  if (manifest.acquisition) cfg.experiment.acquisition_time = *manifest.acquisition;
  cfg.experiment.validate();
  return cfg;
}

int run_command(const RunManifest& manifest, std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = resolve_config(manifest);
  } catch (const std::exception& e) {
    log << "entlab: config: " << e.what() << '\n';
    return exit_code::config;
  }
  if (manifest.format_version != kFormatVersion) {
    log << "entlab: unsupported format_version " << manifest.format_version << '\n';
    return exit_code::usage;
  }
  const fs::path out = manifest.output_dir;
  const fs::path in = manifest.input_dir.empty() ? out : manifest.input_dir;

  try {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw StageFailure(exit_code::usage, "cannot create " + out.string());
    write_file(out / files::config_echo, render_config(cfg));

    switch (manifest.command) {
      case Command::modes: {
        const json j = stage(exit_code::physics, "modes", [&] { return modes_stage(cfg); });
        write_file(out / files::modes, dump(j));
        break;
      }
      case Command::simulate: {
        const Simulation sim = stage(exit_code::simulate, "simulate", [&] { return simulate_stage(cfg); });
        write_file(out / files::tomography_counts, table_csv(sim.tomography));
        write_file(out / files::witness_counts, table_csv(sim.witness));
        write_file(out / files::histogram, histogram_csv(sim.histogram));
        break;
      }
      case Command::tomo: {
        const auto rec = stage(exit_code::tomo, "tomo", [&] {
          return tomo_stage(load_table(in / files::tomography_counts), cfg);
        });
        if (!rec.converged) log << "entlab: warning: MLE stopped before convergence\n";
        write_file(out / files::reconstruction, dump(to_json(rec)));
        break;
      }
      case Command::metrics: {
        const MetricReport m = stage(exit_code::metrics, "metrics", [&] {
          const auto table = load_table(in / files::tomography_counts);
          const auto witness = WitnessInput::from_table(load_table(in / files::witness_counts));
          return full_report(dataset_of(table, cfg), witness, cfg);
        });
        write_file(out / files::metrics, dump(to_json(m)));
        break;
      }
      case Command::report: {
        const Simulation sim = stage(exit_code::simulate, "simulate", [&] { return simulate_stage(cfg); });
        write_file(out / files::tomography_counts, table_csv(sim.tomography));
        write_file(out / files::witness_counts, table_csv(sim.witness));
        write_file(out / files::histogram, histogram_csv(sim.histogram));
        const auto rec = stage(exit_code::tomo, "tomo", [&] { return tomo_stage(sim.tomography, cfg); });
        write_file(out / files::reconstruction, dump(to_json(rec)));
        const MetricReport m = stage(exit_code::metrics, "metrics", [&] {
          return full_report(rec, dataset_of(sim.tomography, cfg), WitnessInput::from_table(sim.witness),
                             cfg);
        });
        write_file(out / files::metrics, dump(to_json(m)));
        const std::string summary = summary_text(sim, rec, m);
        write_file(out / files::summary, summary);
        log << summary;
        break;
      }
    }
    write_manifest(manifest, cfg);
  } catch (const StageFailure& e) {
    log << "entlab: " << e.what() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    log << "entlab: " << e.what() << '\n';
    return exit_code::usage;
  }
  return exit_code::ok;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"OAM atom-photon entanglement simulator and analysis toolkit"};
  app.require_subcommand(1);
  RunManifest manifest;
  std::string config, out = ".", input;
  const std::pair<Command, const char*> commands[] = {
      {Command::modes, "Analyzer states, displacement sweep and LG overlap tables"},
      {Command::simulate, "Simulated coincidence tables and delay histogram"},
      {Command::tomo, "Maximum-likelihood reconstruction from tomography_counts.csv"},
      {Command::metrics, "Witness, EOF, purity and pure-state fit with bootstrap errors"},
      {Command::report, "simulate, tomo and metrics in one run plus a summary"}};
  for (const auto& [cmd, help] : commands) {
    auto* sub = app.add_subcommand(std::string(to_string(cmd)), help);
    sub->add_option("--config", config, "Key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--seed", manifest.seed, "Override rng_seed");
    sub->add_option("--resamples", manifest.resamples, "Override bootstrap_resamples");
    sub->add_option("--acquisition", manifest.acquisition, "Override acquisition_time (s)");
    sub->add_option("--input", input, "Directory holding input CSVs (default: --out)");
    sub->callback([&manifest, cmd = cmd] { manifest.command = cmd; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return exit_code::ok;
    // A missing config file is a configuration error rather than a usage one.
    return std::string(e.what()).find("File does not exist") != std::string::npos ? exit_code::config
                                                                                   : exit_code::usage;
  }
  manifest.config_path = config;
  manifest.output_dir = out;
  manifest.input_dir = input;
  return run_command(manifest, std::cerr);
}

}  // namespace entlab
