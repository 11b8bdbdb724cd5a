#include "entlab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "entlab/errors.hpp"

namespace entlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define ENTLAB_DOUBLE(path, name)                                                   \
  {#name, {[](RunConfig& c, const std::string& v) { c.path.name = to_double(#name, v); }, \
           [](const RunConfig& c) { return fmt(c.path.name); }}}
#define ENTLAB_INT(path, name)                                                              \
  {#name, {[](RunConfig& c, const std::string& v) { c.path.name = to_int<int>(#name, v); }, \
           [](const RunConfig& c) { return std::to_string(c.path.name); }}}
#define ENTLAB_BOOL(path, name)                                                   \
  {#name, {[](RunConfig& c, const std::string& v) { c.path.name = to_bool(#name, v); }, \
           [](const RunConfig& c) { return std::string(c.path.name ? "true" : "false"); }}}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      ENTLAB_DOUBLE(experiment, excitation_probability),
      ENTLAB_DOUBLE(experiment, transmission_efficiency_AS),
      ENTLAB_DOUBLE(experiment, detector_efficiency),
      ENTLAB_DOUBLE(experiment, retrieval_and_transmission_S),
      ENTLAB_DOUBLE(experiment, repetition_rate),
      ENTLAB_DOUBLE(experiment, duty_cycle),
      ENTLAB_DOUBLE(experiment, delay_dt),
      ENTLAB_DOUBLE(experiment, dephasing_time),
      ENTLAB_DOUBLE(experiment, background_rate_AS),
      ENTLAB_DOUBLE(experiment, background_rate_S),
      ENTLAB_DOUBLE(experiment, acquisition_time),
      {"rng_seed",
       {[](RunConfig& c, const std::string& v) {
          c.experiment.rng_seed = to_int<std::uint64_t>("rng_seed", v);
        },
        [](const RunConfig& c) { return std::to_string(c.experiment.rng_seed); }}},
      ENTLAB_DOUBLE(experiment, gamma_modulus),
      ENTLAB_DOUBLE(experiment, gamma_phase),
      ENTLAB_DOUBLE(experiment, fiber_waist),
      ENTLAB_DOUBLE(experiment, analysis_waist),
      ENTLAB_BOOL(experiment, radial_mismatch),
      ENTLAB_DOUBLE(experiment, trial_period),
      ENTLAB_DOUBLE(experiment, histogram_bin_width),
      ENTLAB_INT(experiment, histogram_windows),
      ENTLAB_DOUBLE(experiment, histogram_duration),
      {"tomography_tolerance",
       {[](RunConfig& c, const std::string& v) {
          c.tomography.tolerance = to_double("tomography_tolerance", v);
        },
        [](const RunConfig& c) { return fmt(c.tomography.tolerance); }}},
      {"tomography_max_iterations",
       {[](RunConfig& c, const std::string& v) {
          c.tomography.max_iterations = to_int<int>("tomography_max_iterations", v);
        },
        [](const RunConfig& c) { return std::to_string(c.tomography.max_iterations); }}},
      ENTLAB_BOOL(tomography, subtract_accidentals),
      {"modes_charge",
       {[](RunConfig& c, const std::string& v) { c.modes.charge = to_int<int>("modes_charge", v); },
        [](const RunConfig& c) { return std::to_string(c.modes.charge); }}},
      {"modes_orientation",
       {[](RunConfig& c, const std::string& v) {
          c.modes.orientation = to_double("modes_orientation", v);
        },
        [](const RunConfig& c) { return fmt(c.modes.orientation); }}},
      {"modes_max_displacement",
       {[](RunConfig& c, const std::string& v) {
          c.modes.max_displacement = to_double("modes_max_displacement", v);
        },
        [](const RunConfig& c) { return fmt(c.modes.max_displacement); }}},
      {"modes_points",
       {[](RunConfig& c, const std::string& v) { c.modes.points = to_int<int>("modes_points", v); },
        [](const RunConfig& c) { return std::to_string(c.modes.points); }}},
      {"modes_m_max",
       {[](RunConfig& c, const std::string& v) { c.modes.m_max = to_int<int>("modes_m_max", v); },
        [](const RunConfig& c) { return std::to_string(c.modes.m_max); }}},
      {"quadrature_radial_nodes",
       {[](RunConfig& c, const std::string& v) {
          c.modes.n_radial = to_int<int>("quadrature_radial_nodes", v);
        },
        [](const RunConfig& c) { return std::to_string(c.modes.n_radial); }}},
      {"quadrature_angular_nodes",
       {[](RunConfig& c, const std::string& v) {
          c.modes.n_angular = to_int<int>("quadrature_angular_nodes", v);
        },
        [](const RunConfig& c) { return std::to_string(c.modes.n_angular); }}},
      {"bootstrap_resamples",
       {[](RunConfig& c, const std::string& v) {
          c.bootstrap_resamples = to_int<int>("bootstrap_resamples", v);
        },
        [](const RunConfig& c) { return std::to_string(c.bootstrap_resamples); }}},
  };
  return table;
}

#undef ENTLAB_DOUBLE
#undef ENTLAB_INT
#undef ENTLAB_BOOL

}  // namespace

void ExperimentConfig::validate() const {
  auto prob = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0))
      throw ConfigError(std::string("config: ") + name + " must lie in (0, 1]");
  };
  prob(excitation_probability, "excitation_probability");
  if (excitation_probability > 0.1)
    throw ConfigError("config: excitation_probability above 0.1 leaves the single-excitation regime");
  prob(transmission_efficiency_AS, "transmission_efficiency_AS");
  prob(detector_efficiency, "detector_efficiency");
  prob(retrieval_and_transmission_S, "retrieval_and_transmission_S");
  prob(duty_cycle, "duty_cycle");
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0)) throw ConfigError(std::string("config: ") + name + " must be >= 0");
  };
  if (!(repetition_rate > 0.0)) throw ConfigError("config: repetition_rate must be > 0");
  nonneg(delay_dt, "delay_dt");
  nonneg(dephasing_time, "dephasing_time");
  nonneg(background_rate_AS, "background_rate_AS");
  nonneg(background_rate_S, "background_rate_S");
  nonneg(acquisition_time, "acquisition_time");
  nonneg(gamma_modulus, "gamma_modulus");
  if (!std::isfinite(gamma_modulus) || !std::isfinite(gamma_phase))
    throw ConfigError("config: gamma must be finite");
  if (!(fiber_waist > 0.0) || !(analysis_waist > 0.0))
    throw ConfigError("config: waists must be > 0");
  if (!(trial_period > 0.0) || !(histogram_bin_width > 0.0))
    throw ConfigError("config: trial_period and histogram_bin_width must be > 0");
  if (histogram_windows < 3) throw ConfigError("config: histogram_windows must be >= 3");
  nonneg(histogram_duration, "histogram_duration");
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::map<std::string, const Field*> index;
  for (const auto& [k, f] : fields()) index[k] = &f;

  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end())
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (seen.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    seen[key] = lineno;
    it->second->set(cfg, value);
  }
  cfg.experiment.validate();
  if (cfg.tomography.tolerance <= 0.0) throw ConfigError("config: tomography_tolerance must be > 0");
  if (cfg.tomography.max_iterations <= 0)
    throw ConfigError("config: tomography_max_iterations must be > 0");
  if (cfg.bootstrap_resamples < 100) throw ConfigError("config: bootstrap_resamples must be >= 100");
  if (cfg.modes.points < 2) throw ConfigError("config: modes_points must be >= 2");
  return cfg;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  return parse_config(in);
}

std::string render_config(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& [k, f] : fields()) out << k << " = " << f.get(config) << '\n';
  return out.str();
}

}  // namespace entlab
