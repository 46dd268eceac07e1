#include "bsmvdr/report.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace bsmvdr {

namespace {

std::string format_error(bool detected, double v) {
  if (!detected || !std::isfinite(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double parse_error(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  return std::stod(s);
}

void write_rows(std::ostream& os, const std::vector<DetectionRecord>& records) {
  for (const DetectionRecord& r : records) {
    os << r.scenario << ',' << r.target_id << ',' << to_string(r.method) << ',' << r.w_z << ',' << r.w_x
       << ',' << r.m_z << ',' << r.m_x << ',' << (r.score.detected ? 1 : 0) << ','
       << format_error(r.score.detected, r.score.range_error_m) << ','
       << format_error(r.score.detected, r.score.velocity_error_mps) << '\n';
  }
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

void write_detection_report(std::ostream& os, const std::vector<DetectionRecord>& records) {
  os << kReportVersionLine << '\n' << kReportColumns << '\n';
  write_rows(os, records);
}

void write_sweep_report(std::ostream& os, const SweepResult& result) {
  write_detection_report(os, result.records);
  for (const SweepFailure& f : result.failures) {
    os << "# failed," << sanitize(f.cell) << ',' << sanitize(f.message) << '\n';
  }
}

std::vector<DetectionRecord> read_detection_report(std::istream& is) {
  std::vector<DetectionRecord> out;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kReportColumns) throw ConfigError("report: unexpected column header '" + line + "'");
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw ConfigError("report: line " + std::to_string(line_no) + " has " +
                                          std::to_string(f.size()) + " fields, expected 10");
    DetectionRecord r;
    r.scenario = f[0];
    r.target_id = std::stoi(f[1]);
    r.method = method_from_string(f[2]);
    r.w_z = std::stoi(f[3]);
    r.w_x = std::stoi(f[4]);
    r.m_z = std::stoi(f[5]);
    r.m_x = std::stoi(f[6]);
    r.score.target_id = r.target_id;
    r.score.detected = f[7] == "1";
    r.score.range_error_m = parse_error(f[8]);
    r.score.velocity_error_mps = parse_error(f[9]);
    out.push_back(r);
  }
  return out;
}

void write_complexity_csv(std::ostream& os, const ComplexityReport& c) {
  os << "stage,complex_mults\n"
     << "channelize," << c.channelize << '\n'
     << "front_end," << c.front_end << '\n'
     << "covariance," << c.covariance << '\n'
     << "factorization," << c.factorization << '\n'
     << "solve," << c.solve << '\n'
     << "steering," << c.steering << '\n'
     << "application," << c.application << '\n'
     << "synthesis," << c.synthesis << '\n'
     << "range_doppler," << c.range_doppler << '\n'
     << "total," << c.total() << '\n';
}

}  // namespace bsmvdr
