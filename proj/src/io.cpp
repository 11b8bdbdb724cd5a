#include "entlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "entlab/errors.hpp"

namespace entlab {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InvalidArgument(std::string("csv: bad ") + what + " '" + s + "'");
  return v;
}

std::uint64_t parse_count(const std::string& s, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InvalidArgument(std::string("csv: bad ") + what + " '" + s + "'");
  return v;
}

BasisLabel parse_label(const std::string& s) {
  const auto l = parse_basis_label(s);
  if (!l) throw InvalidArgument("csv: unknown basis label '" + s + "'");
  return *l;
}

double finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string("json: non-finite ") + what);
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_table_csv(std::ostream& out, const CoincidenceTable& table) {
  out << kTableHeader << '\n';
  for (const auto& r : table.rows)
    out << to_string(r.setting_as) << ',' << to_string(r.setting_s) << ',' << r.coincidences << ','
        << r.singles_as << ',' << r.singles_s << ',' << format_double(r.duration_s) << '\n';
}

CoincidenceTable read_table_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kTableHeader)
    throw InvalidArgument("csv: expected header '" + std::string(kTableHeader) + "'");
  CoincidenceTable table;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 6) throw InvalidArgument("csv: expected 6 columns in '" + line + "'");
    CoincidenceRow r;
    r.setting_as = parse_label(cells[0]);
    r.setting_s = parse_label(cells[1]);
    r.coincidences = parse_count(cells[2], "coincidences");
    r.singles_as = parse_count(cells[3], "singles_as");
    r.singles_s = parse_count(cells[4], "singles_s");
    r.duration_s = parse_double(cells[5], "duration_s");
    table.rows.push_back(r);
  }
  table.validate();
  return table;
}

void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& h) {
  out << kHistogramHeader << '\n';
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << format_double(h.bin_center(i)) << ',' << h.counts[i] << '\n';
}

CoincidenceHistogram read_histogram_csv(std::istream& in, double period_ns, double peak_delay_ns) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kHistogramHeader)
    throw InvalidArgument("csv: expected header 'bin_ns,count'");
  std::vector<double> centers;
  CoincidenceHistogram h;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 2) throw InvalidArgument("csv: expected 2 columns in '" + line + "'");
    centers.push_back(parse_double(cells[0], "bin_ns"));
    h.counts.push_back(parse_count(cells[1], "count"));
  }
  if (centers.size() < 2) throw InvalidArgument("csv: histogram needs at least two bins");
  h.bin_width_ns = (centers.back() - centers.front()) / static_cast<double>(centers.size() - 1);
  if (!(h.bin_width_ns > 0.0)) throw InvalidArgument("csv: histogram bins not increasing");
  h.first_bin_ns = centers.front() - 0.5 * h.bin_width_ns;
  h.period_ns = period_ns;
  h.peak_delay_ns = peak_delay_ns;
  return h;
}

json matrix_to_json(const Mat4& m) {
  json out = json::array();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      out.push_back({finite(m(i, j).real(), "matrix entry"), finite(m(i, j).imag(), "matrix entry")});
  return out;
}

Mat4 matrix_from_json(const json& j) {
  if (!j.is_array() || j.size() != 16) throw InvalidArgument("json: matrix needs 16 entries");
  Mat4 m;
  for (int k = 0; k < 16; ++k) {
    const json& e = j.at(static_cast<std::size_t>(k));
    if (!e.is_array() || e.size() != 2) throw InvalidArgument("json: matrix entry must be [re, im]");
    m(k / 4, k % 4) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
  }
  return m;
}

json to_json(const TwoQubitState& state) {
  return json{{"dim", 4}, {"matrix", matrix_to_json(state.matrix())}};
}

TwoQubitState state_from_json(const json& j) {
  if (j.at("dim").get<int>() != 4) throw InvalidArgument("json: only dim 4 states are supported");
  return TwoQubitState(matrix_from_json(j.at("matrix")));
}

json to_json(const ReconstructionResult& r) {
  return json{{"matrix", matrix_to_json(r.rho.matrix())},
              {"log_likelihood", finite(r.log_likelihood, "log_likelihood")},
              {"iterations", r.iterations},
              {"converged", r.converged}};
}

ReconstructionResult reconstruction_from_json(const json& j) {
  return ReconstructionResult{TwoQubitState(matrix_from_json(j.at("matrix"))),
                              j.at("log_likelihood").get<double>(), j.at("iterations").get<int>(),
                              j.at("converged").get<bool>(), 0.0, {}};
}

json to_json(const MetricReport& r) {
  return json{{"fidelity_lower_bound", r.fidelity_lower_bound},
              {"fidelity_lower_bound_stderr", r.fidelity_lower_bound_stderr},
              {"eof", r.eof},
              {"eof_stderr", r.eof_stderr},
              {"purity", r.purity},
              {"purity_stderr", r.purity_stderr},
              {"gamma_best", {{"re", r.gamma_best.real()}, {"im", r.gamma_best.imag()}}},
              {"fidelity_at_gamma_best", r.fidelity_at_gamma_best},
              {"eof_of_pure_fit", r.eof_of_pure_fit},
              {"bootstrap_resamples", r.bootstrap_resamples},
              {"bootstrap_failures", r.bootstrap_failures}};
}

MetricReport report_from_json(const json& j) {
  MetricReport r;
  r.fidelity_lower_bound = j.at("fidelity_lower_bound").get<double>();
  r.fidelity_lower_bound_stderr = j.at("fidelity_lower_bound_stderr").get<double>();
  r.eof = j.at("eof").get<double>();
  r.eof_stderr = j.at("eof_stderr").get<double>();
  r.purity = j.at("purity").get<double>();
  r.purity_stderr = j.at("purity_stderr").get<double>();
  r.gamma_best = Complex(j.at("gamma_best").at("re").get<double>(),
                         j.at("gamma_best").at("im").get<double>());
  r.fidelity_at_gamma_best = j.at("fidelity_at_gamma_best").get<double>();
  r.eof_of_pure_fit = j.at("eof_of_pure_fit").get<double>();
  r.bootstrap_resamples = j.at("bootstrap_resamples").get<int>();
  r.bootstrap_failures = j.at("bootstrap_failures").get<int>();
  return r;
}

json to_json(const ModeRecord& m) {
  return json{{"charge", m.charge},
              {"displacement", m.displacement},
              {"orientation", m.orientation},
              {"alpha_re", m.alpha.real()},
              {"alpha_im", m.alpha.imag()},
              {"beta_re", m.beta.real()},
              {"beta_im", m.beta.imag()},
              {"leakage", m.leakage}};
}

ModeRecord mode_record_from_json(const json& j) {
  ModeRecord m;
  m.charge = j.at("charge").get<int>();
  m.displacement = j.at("displacement").get<double>();
  m.orientation = j.at("orientation").get<double>();
  m.alpha = Complex(j.at("alpha_re").get<double>(), j.at("alpha_im").get<double>());
  m.beta = Complex(j.at("beta_re").get<double>(), j.at("beta_im").get<double>());
  m.leakage = j.at("leakage").get<double>();
  return m;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << contents;
  if (!out) throw InvalidArgument("write failed for " + path.string());
}

}  // namespace entlab
