#include "duffing/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace duffing {

namespace {

double window_envelope(std::span<const double> t, std::span<const double> value, double lo,
                       double hi, double rate) {
  double sup = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < lo || t[i] > hi || value[i] <= kValueFloor) continue;
    sup = std::max(sup, value[i] * std::pow(t[i], -rate));
  }
  return sup;
}

std::string param_label(const DuffingParams& params) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "p=%d alpha=%g mu=%g", params.p, params.alpha, params.mu);
  return buf;
}

void require_positive_mu(const Trajectory& traj, const char* what) {
  if (!(traj.params.mu > 0.0)) {
    throw std::invalid_argument(std::string(what) + " requires mu > 0");
  }
}

std::vector<double> sample_times(const Trajectory& traj) {
  std::vector<double> t;
  t.reserve(traj.samples.size());
  for (const auto& s : traj.samples) t.push_back(s.t);
  return t;
}

// Default tail window [max(1, T/10), T].
std::pair<double, double> tail_window(const Trajectory& traj) {
  const double t_hi = traj.samples.back().t;
  return {std::max(1.0, t_hi / 10.0), t_hi};
}

}  // namespace

EnergyLedger build_ledger(const Trajectory& traj) {
  if (traj.samples.empty()) throw std::invalid_argument("build_ledger: empty trajectory");
  EnergyLedger ledger;
  ledger.initial_energy = energy(traj.params, traj.samples.front().state);
  ledger.rows.reserve(traj.samples.size());
  ledger.max_abs_residual = 0.0;
  for (const auto& s : traj.samples) {
    LedgerRow row;
    row.t = s.t;
    row.energy = energy(traj.params, s.state);
    row.modified_energy = modified_energy(traj.params, s.state);
    row.dissipation = s.dissipation;
    row.residual = row.energy + row.dissipation - ledger.initial_energy;
    if (!std::isfinite(row.dissipation) || !std::isfinite(row.residual)) {
      throw NonFiniteError("build_ledger: non-finite entry at t = " + std::to_string(s.t));
    }
    ledger.max_abs_residual = std::max(ledger.max_abs_residual, std::abs(row.residual));
    ledger.rows.push_back(row);
  }
  return ledger;
}

DecayFitReport fit_decay(std::span<const double> t, std::span<const double> value, double t_lo,
                         double t_hi, double theoretical_slope) {
  if (t.size() != value.size()) throw std::invalid_argument("fit_decay: size mismatch");
  if (!(t_lo >= 1.0)) throw std::domain_error("fit_decay: window must start at t >= 1");
  if (!(t_hi > t_lo)) throw std::domain_error("fit_decay: empty window");

  std::vector<double> lt, lv;
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (value[i] <= kValueFloor) {
      ++clipped;
      continue;
    }
    lt.push_back(std::log(t[i]));
    lv.push_back(std::log(value[i]));
  }
  if (lt.empty() && clipped > 0) throw std::domain_error("fit_decay: all samples clipped");
  if (lt.size() < 50) {
    throw std::domain_error("fit_decay: need at least 50 usable samples, got " +
                            std::to_string(lt.size()));
  }

  double mean_t = 0.0, mean_v = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    mean_t += lt[i];
    mean_v += lv[i];
  }
  mean_t /= static_cast<double>(lt.size());
  mean_v /= static_cast<double>(lt.size());
  double s_tt = 0.0, s_tv = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    const double dt_ = lt[i] - mean_t;
    s_tt += dt_ * dt_;
    s_tv += dt_ * (lv[i] - mean_v);
  }
  if (!(s_tt > 0.0)) throw std::domain_error("fit_decay: degenerate time window");

  DecayFitReport report;
  report.t_lo = t_lo;
  report.t_hi = t_hi;
  report.slope = s_tv / s_tt;
  report.intercept = mean_v - report.slope * mean_t;
  report.theoretical_slope = theoretical_slope;
  report.envelope = window_envelope(t, value, t_lo, t_hi, theoretical_slope);
  const double mid = 0.5 * (t_lo + t_hi);
  report.envelope_first_half = window_envelope(t, value, t_lo, mid, theoretical_slope);
  report.envelope_second_half = window_envelope(t, value, mid, t_hi, theoretical_slope);
  report.sample_count = lt.size();
  report.clipped_count = clipped;
  return report;
}

bool envelope_non_trending(const DecayFitReport& report, double slack) {
  if (!std::isfinite(report.envelope)) return false;
  if (report.envelope_first_half <= 0.0) return false;
  return report.envelope_second_half <= slack * report.envelope_first_half;
}

DecayFitReport check_energy_decay(const Trajectory& traj) {
  require_positive_mu(traj, "check_energy_decay");
  const auto [lo, hi] = tail_window(traj);
  std::vector<double> t = sample_times(traj), e;
  e.reserve(traj.samples.size());
  for (const auto& s : traj.samples) e.push_back(energy(traj.params, s.state));
  const double rate = -static_cast<double>(traj.params.p + 1) / (traj.params.p - 1);
  return fit_decay(t, e, lo, hi, rate);
}

DecayFitReport check_solution_decay(const Trajectory& traj) {
  require_positive_mu(traj, "check_solution_decay");
  const auto [lo, hi] = tail_window(traj);
  std::vector<double> t, ax;
  t.reserve(traj.samples.size());
  ax.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    if (s.t < lo || s.t > hi) continue;
    t.push_back(s.t);
    ax.push_back(std::abs(s.state.x));
  }
  std::vector<double> env_t, env_v;
  peak_envelope(t, ax, kPeakWindowWidth, env_t, env_v);
  const double rate = -1.0 / (traj.params.p - 1);
  return fit_decay(env_t, env_v, lo, hi, rate);
}

DecayFitReport check_modified_energy_decay(const Trajectory& traj) {
  require_positive_mu(traj, "check_modified_energy_decay");
  const auto [lo, hi] = tail_window(traj);
  std::vector<double> t = sample_times(traj), me;
  me.reserve(traj.samples.size());
  for (const auto& s : traj.samples) me.push_back(modified_energy(traj.params, s.state));
  const double rate = -2.0 / (traj.params.p - 1);
  return fit_decay(t, me, lo, hi, rate);
}

InequalityReport inequality_from_series(std::span<const double> t,
                                        std::span<const double> modified_energy, int p) {
  const std::size_t n = t.size();
  if (n != modified_energy.size()) {
    throw std::invalid_argument("inequality_from_series: size mismatch");
  }
  if (n < 3) throw std::domain_error("inequality_from_series: need at least 3 samples");

  InequalityReport report;
  report.nu_hat = std::numeric_limits<double>::infinity();
  report.t_at_infimum = t.front();
  std::size_t used = 0, positive = 0;
  const double half = 0.5 * (p - 1);

  for (std::size_t i = 0; i < n; ++i) {
    const double e = modified_energy[i];
    if (e <= kValueFloor) continue;
    double deriv;
    if (i == 0) {
      deriv = (modified_energy[1] - modified_energy[0]) / (t[1] - t[0]);
    } else if (i == n - 1) {
      deriv = (modified_energy[n - 1] - modified_energy[n - 2]) / (t[n - 1] - t[n - 2]);
    } else {
      deriv = (modified_energy[i + 1] - modified_energy[i - 1]) / (t[i + 1] - t[i - 1]);
    }
    ++used;
    if (deriv > 0.0) {
      ++positive;
      continue;
    }
    const double ratio = -deriv * (1.0 + std::pow(e, half)) / std::pow(e, half + 1.0);
    if (ratio < report.nu_hat) {
      report.nu_hat = ratio;
      report.t_at_infimum = t[i];
    }
  }
  if (used == 0) {
    throw std::domain_error("inequality_from_series: all modified energies below floor");
  }
  if (positive == used) {
    throw std::domain_error("inequality_from_series: modified energy never decreases");
  }
  report.positive_fraction = static_cast<double>(positive) / static_cast<double>(used);
  report.used_samples = used;
  return report;
}

InequalityReport check_inequality(const Trajectory& traj) {
  require_positive_mu(traj, "check_inequality");
  std::vector<double> t = sample_times(traj), me;
  me.reserve(traj.samples.size());
  for (const auto& s : traj.samples) me.push_back(modified_energy(traj.params, s.state));
  return inequality_from_series(t, me, traj.params.p);
}

void peak_envelope(std::span<const double> t, std::span<const double> x, double width,
                   std::vector<double>& env_t, std::vector<double>& env_value) {
  env_t.clear();
  env_value.clear();
  if (t.empty()) return;
  if (!(width > 0.0)) throw std::invalid_argument("peak_envelope: width must be positive");
  double window_start = t.front();
  double best_t = t.front();
  double best_v = -1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= window_start + width) {
      if (best_v >= 0.0) {
        env_t.push_back(best_t);
        env_value.push_back(best_v);
      }
      // advance, skipping empty windows
      while (t[i] >= window_start + width) window_start += width;
      best_v = -1.0;
    }
    const double v = std::abs(x[i]);
    if (v > best_v) {
      best_v = v;
      best_t = t[i];
    }
  }
  if (best_v >= 0.0) {
    env_t.push_back(best_t);
    env_value.push_back(best_v);
  }
}

std::vector<EnergyAtTime> compare_at_time(std::span<const Trajectory> trajectories,
                                          double t_query) {
  if (trajectories.empty()) throw std::invalid_argument("compare_at_time: no trajectories");
  const double dt0 = trajectories.front().config.dt;
  for (const auto& traj : trajectories) {
    if (traj.config.dt != dt0) {
      throw std::invalid_argument("compare_at_time: trajectories do not share the dt grid");
    }
  }

  std::vector<EnergyAtTime> out;
  out.reserve(trajectories.size());
  for (const auto& traj : trajectories) {
    const auto& samples = traj.samples;
    const double spacing = static_cast<double>(traj.config.record_stride) * traj.config.dt;
    if (t_query < samples.front().t - 0.5 * spacing ||
        t_query > samples.back().t + 0.5 * spacing) {
      throw std::domain_error("compare_at_time: t_query outside trajectory " +
                              param_label(traj.params));
    }
    const double offset = (t_query - samples.front().t) / spacing;
    const auto idx = static_cast<std::size_t>(
        std::clamp<long long>(std::llround(offset), 0, static_cast<long long>(samples.size()) - 1));
    out.push_back({traj.params, param_label(traj.params), samples[idx].t,
                   energy(traj.params, samples[idx].state)});
  }
  std::sort(out.begin(), out.end(), [](const EnergyAtTime& a, const EnergyAtTime& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.label < b.label;
  });
  return out;
}

}  // namespace duffing
