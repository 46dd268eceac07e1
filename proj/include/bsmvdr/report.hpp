#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "bsmvdr/pipeline.hpp"

namespace bsmvdr {

/// First line of every detection report.
inline constexpr std::string_view kReportVersionLine = "# bsmvdr detection report v1";
inline constexpr std::string_view kReportColumns =
    "scenario,target_id,method,w_z,w_x,m_z,m_x,detected,range_error_m,velocity_error_mps";

/// Version line, column header, then one row per record. Misses print inf.
void write_detection_report(std::ostream& os, const std::vector<DetectionRecord>& records);

/// Detection report followed by one "# failed,<cell>,<message>" line per failure.
void write_sweep_report(std::ostream& os, const SweepResult& result);

/// Parses a report written by write_detection_report; comment lines are skipped.
std::vector<DetectionRecord> read_detection_report(std::istream& is);

/// stage,complex_mults rows.
void write_complexity_csv(std::ostream& os, const ComplexityReport& report);

}  // namespace bsmvdr
