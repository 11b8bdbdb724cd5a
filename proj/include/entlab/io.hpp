#pragma once

// CSV and JSON encodings of the pipeline's data products. Doubles are written
// in shortest round-trip form, so parsing an emitted file gives back the
// same values bit for bit.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "entlab/entanglement_metrics.hpp"
#include "entlab/experiment_sim.hpp"
#include "entlab/lg_modes.hpp"
#include "entlab/tomography.hpp"

namespace entlab {

inline constexpr const char* kTableHeader =
    "setting_as,setting_s,coincidences,singles_as,singles_s,duration_s";
inline constexpr const char* kHistogramHeader = "bin_ns,count";

std::string format_double(double v);

void write_table_csv(std::ostream& out, const CoincidenceTable& table);
CoincidenceTable read_table_csv(std::istream& in);

// One row per bin: bin centre and count. The period and peak delay are not
// part of the file and are supplied when reading.
void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& histogram);
CoincidenceHistogram read_histogram_csv(std::istream& in, double period_ns, double peak_delay_ns);

struct ModeRecord {
  int charge = 0;
  double displacement = 0.0;
  double orientation = 0.0;
  Complex alpha;
  Complex beta;
  double leakage = 0.0;

  bool operator==(const ModeRecord&) const = default;
};

nlohmann::json matrix_to_json(const Mat4& m);
Mat4 matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TwoQubitState& state);
TwoQubitState state_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ReconstructionResult& result);
ReconstructionResult reconstruction_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModeRecord& record);
ModeRecord mode_record_from_json(const nlohmann::json& j);

// Whole-file helpers; throw InvalidArgument on I/O failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace entlab
