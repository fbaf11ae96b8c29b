#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "duffing/integrator.hpp"

namespace duffing {

/// Values below this are clipped out before taking logarithms.
inline constexpr double kValueFloor = 1e-30;

/// Width (time units) of the sliding windows used for the peak envelope
/// of |x|; wider than the slowest oscillation seen at tail times.
inline constexpr double kPeakWindowWidth = 20.0;

/// Per-sample energy bookkeeping for one trajectory.
struct LedgerRow {
  double t;
  double energy;            // E^(n)
  double modified_energy;   // the augmented functional at the sample
  double dissipation;       // D^(n) = (mu/4) sum (y^(l+1)+y^(l))^2 dt
  double residual;          // E^(n) + D^(n) - E^(0)
};

struct EnergyLedger {
  double initial_energy;
  std::vector<LedgerRow> rows;
  double max_abs_residual;
};

/// Evaluates energies and the discrete-law residual for every stored
/// sample. The dissipation sum is taken from the trajectory, where it was
/// accumulated at full step resolution.
EnergyLedger build_ledger(const Trajectory& traj);

/// Least-squares power-law fit over a tail window, plus the envelope
/// constant sup value * t^(-theoretical_slope).
struct DecayFitReport {
  double t_lo;
  double t_hi;
  double slope;
  double intercept;           // of the (log t, log value) line
  double theoretical_slope;   // negative, e.g. -2 for the p=3 energy
  double envelope;            // sup over [t_lo, t_hi]
  double envelope_first_half; // sup over [t_lo, (t_lo+t_hi)/2)
  double envelope_second_half;
  std::size_t sample_count;   // samples used by the fit
  std::size_t clipped_count;  // samples dropped for value <= kValueFloor
};

/// Fits log(value) against log(t) over t in [t_lo, t_hi]. Values at or below
/// kValueFloor are clipped out and counted. Requires t_lo >= 1 and at least
/// 50 usable samples; throws std::domain_error otherwise.
DecayFitReport fit_decay(std::span<const double> t, std::span<const double> value, double t_lo,
                         double t_hi, double theoretical_slope);

/// True when the envelope does not grow by more than `slack` from the first
/// half of the window to the second (a bounded, non-trending envelope).
bool envelope_non_trending(const DecayFitReport& report, double slack = 1.05);

/// Energy decay against the rate -(p+1)/(p-1) over [max(1, T/10), T].
/// Requires mu > 0.
DecayFitReport check_energy_decay(const Trajectory& traj);

/// Decay of the peak envelope of |x| against the rate -1/(p-1); the raw
/// signal oscillates through zero, so window maxima are fitted instead.
/// Requires mu > 0.
DecayFitReport check_solution_decay(const Trajectory& traj);

/// Modified-energy envelope against the rate -2/(p-1). The bound is
/// one-sided: the meaningful assertion is a bounded, non-trending envelope,
/// not slope equality. Requires mu > 0.
DecayFitReport check_modified_energy_decay(const Trajectory& traj);

/// Empirical content of the modified-energy differential inequality.
struct InequalityReport {
  /// inf over decaying samples of (-dE/dt) (1 + E^((p-1)/2)) / E^((p+1)/2)
  /// where E is the modified energy; positive iff the inequality holds with
  /// some admissible constant on this trajectory.
  double nu_hat;
  double t_at_infimum;
  /// Fraction of usable samples whose discrete derivative is positive
  /// (sampling noise near turning points; should be ~0).
  double positive_fraction;
  std::size_t used_samples;
};

/// Estimates the admissible inequality constant from a trajectory, using
/// centered differences of the modified energy on the stored grid (one-sided
/// at the ends) and only samples above kValueFloor. Requires mu > 0.
InequalityReport check_inequality(const Trajectory& traj);

/// Same estimator on a raw (t, modified energy) series.
InequalityReport inequality_from_series(std::span<const double> t,
                                        std::span<const double> modified_energy, int p);

/// Peak envelope: for each contiguous window of `width` time units in
/// [t.front(), t.back()], the largest |x| and the time where it occurs.
void peak_envelope(std::span<const double> t, std::span<const double> x, double width,
                   std::vector<double>& env_t, std::vector<double>& env_value);

struct EnergyAtTime {
  DuffingParams params;
  std::string label;
  double t;       // time of the sample actually used
  double energy;
};

/// Energies of several trajectories at the stored sample nearest t_query,
/// sorted ascending. All trajectories must share the dt grid and cover
/// t_query; throws std::domain_error / std::invalid_argument otherwise.
std::vector<EnergyAtTime> compare_at_time(std::span<const Trajectory> trajectories,
                                          double t_query);

}  // namespace duffing
