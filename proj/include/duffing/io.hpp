#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "duffing/analysis.hpp"

namespace duffing {

/// Full-precision decimal formatting: 17 significant digits, enough for an
/// exact double round trip.
std::string format_double(double v);

/// Short %g-style label for file names and report lines ("0.1", "100").
std::string short_label(double v);

/// File-name label for one grid point, e.g. "p3_alpha1_mu0.1".
std::string point_label(int p, double alpha, double mu);

/// Trajectory CSV: header row, comma separators, LF line endings, columns
/// t,x,y,E,modified_E,cumulative_dissipation,identity_residual,newton_iters.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

struct TrajectoryCsvRow {
  double t;
  double x;
  double y;
  double energy;
  double modified_energy;
  double cumulative_dissipation;
  double identity_residual;
  int newton_iters;
};

/// Parses a trajectory CSV back; values reproduce the written doubles
/// exactly. Throws std::invalid_argument on malformed input.
std::vector<TrajectoryCsvRow> read_trajectory_csv(std::istream& in);

/// Ledger CSV: columns t,E,modified_E,cumulative_dissipation,identity_residual.
void write_ledger_csv(std::ostream& out, const EnergyLedger& ledger);

}  // namespace duffing
