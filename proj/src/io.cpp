#include "duffing/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace duffing {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string short_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string point_label(int p, double alpha, double mu) {
  return "p" + std::to_string(p) + "_alpha" + short_label(alpha) + "_mu" + short_label(mu);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x,y,E,modified_E,cumulative_dissipation,identity_residual,newton_iters\n";
  if (traj.samples.empty()) return;
  const double e0 = energy(traj.params, traj.samples.front().state);
  for (const auto& s : traj.samples) {
    const double e = energy(traj.params, s.state);
    const double me = modified_energy(traj.params, s.state);
    const double residual = e + s.dissipation - e0;
    out << format_double(s.t) << ',' << format_double(s.state.x) << ','
        << format_double(s.state.y) << ',' << format_double(e) << ',' << format_double(me) << ','
        << format_double(s.dissipation) << ',' << format_double(residual) << ','
        << s.newton_iters << '\n';
  }
}

namespace {

double parse_field(const std::string& line, std::size_t& pos, std::size_t line_no) {
  const char* begin = line.c_str() + pos;
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) {
    throw std::invalid_argument("trajectory csv: bad number on line " + std::to_string(line_no));
  }
  pos = static_cast<std::size_t>(end - line.c_str());
  if (pos < line.size() && line[pos] == ',') ++pos;
  return v;
}

}  // namespace

std::vector<TrajectoryCsvRow> read_trajectory_csv(std::istream& in) {
  std::vector<TrajectoryCsvRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line.rfind("t,x,y,", 0) != 0) {
        throw std::invalid_argument("trajectory csv: unexpected header");
      }
      continue;
    }
    if (line.empty()) continue;
    TrajectoryCsvRow row;
    std::size_t pos = 0;
    row.t = parse_field(line, pos, line_no);
    row.x = parse_field(line, pos, line_no);
    row.y = parse_field(line, pos, line_no);
    row.energy = parse_field(line, pos, line_no);
    row.modified_energy = parse_field(line, pos, line_no);
    row.cumulative_dissipation = parse_field(line, pos, line_no);
    row.identity_residual = parse_field(line, pos, line_no);
    row.newton_iters = static_cast<int>(parse_field(line, pos, line_no));
    rows.push_back(row);
  }
  return rows;
}

void write_ledger_csv(std::ostream& out, const EnergyLedger& ledger) {
  out << "t,E,modified_E,cumulative_dissipation,identity_residual\n";
  for (const auto& row : ledger.rows) {
    out << format_double(row.t) << ',' << format_double(row.energy) << ','
        << format_double(row.modified_energy) << ',' << format_double(row.dissipation) << ','
        << format_double(row.residual) << '\n';
  }
}

}  // namespace duffing
