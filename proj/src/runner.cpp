#include "duffing/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace duffing {

namespace {

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

void write_or_throw(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw ConfigError("failed writing " + path.string());
}

void probe_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw ConfigError("output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

struct GridPoint {
  int p;
  double alpha;
  double mu;
};

CheckResult ledger_check(const Trajectory& traj, const EnergyLedger& ledger) {
  const double bound = ledger_residual_bound(traj, ledger.initial_energy);
  const bool passed = ledger.max_abs_residual <= bound;
  return {check_name(Check::Ledger), passed,
          fmt("max|E+D-E0| = %.6g (bound %.6g)", ledger.max_abs_residual, bound)};
}

CheckResult fit_check(Check which, const Trajectory& traj, bool assert_slope) {
  try {
    DecayFitReport report;
    switch (which) {
      case Check::EnergyDecay: report = check_energy_decay(traj); break;
      case Check::SolutionDecay: report = check_solution_decay(traj); break;
      default: report = check_modified_energy_decay(traj); break;
    }
    const bool bounded = std::isfinite(report.envelope) && envelope_non_trending(report);
    const bool slope_ok =
        !assert_slope || std::abs(report.slope - report.theoretical_slope) <= kSlopeTolerance;
    return {check_name(which), bounded && slope_ok,
            fmt("slope = %.4f (theoretical %.4f), envelope = %.6g (halves %.6g / %.6g), "
                "%zu samples, %zu clipped",
                report.slope, report.theoretical_slope, report.envelope,
                report.envelope_first_half, report.envelope_second_half, report.sample_count,
                report.clipped_count)};
  } catch (const std::exception& e) {
    return {check_name(which), false, e.what()};
  }
}

CheckResult inequality_check(const Trajectory& traj) {
  try {
    const InequalityReport report = check_inequality(traj);
    const bool passed =
        report.nu_hat > 0.0 && report.positive_fraction <= kPositiveFractionLimit;
    return {check_name(Check::Inequality), passed,
            fmt("nu_hat = %.6g at t = %.6g, positive fraction = %.3g over %zu samples",
                report.nu_hat, report.t_at_infimum, report.positive_fraction,
                report.used_samples)};
  } catch (const std::exception& e) {
    return {check_name(Check::Inequality), false, e.what()};
  }
}

std::string report_lines(const std::vector<CheckResult>& results) {
  std::string text;
  for (const auto& r : results) {
    text += (r.passed ? "PASS " : "FAIL ") + r.name + ": " + r.detail + "\n";
  }
  return text;
}

}  // namespace

std::string check_name(Check check) {
  switch (check) {
    case Check::Ledger: return "ledger";
    case Check::EnergyDecay: return "energy-decay";
    case Check::SolutionDecay: return "solution-decay";
    case Check::Inequality: return "inequality";
    case Check::ModifiedEnergyDecay: return "modified-energy-decay";
  }
  return "?";
}

Check parse_check(const std::string& name) {
  for (Check c : {Check::Ledger, Check::EnergyDecay, Check::SolutionDecay, Check::Inequality,
                  Check::ModifiedEnergyDecay}) {
    if (name == check_name(c)) return c;
  }
  throw ConfigError("unknown check '" + name +
                    "' (expected ledger, energy-decay, solution-decay, inequality or "
                    "modified-energy-decay)");
}

std::set<Check> parse_checks(const std::string& csv) {
  std::set<Check> checks;
  if (csv == "all") {
    return {Check::Ledger, Check::EnergyDecay, Check::SolutionDecay, Check::Inequality,
            Check::ModifiedEnergyDecay};
  }
  std::stringstream stream(csv);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) checks.insert(parse_check(item));
  }
  if (checks.empty()) throw ConfigError("no checks named in '" + csv + "'");
  return checks;
}

bool check_requires_damping(Check check) { return check != Check::Ledger; }

double ledger_residual_bound(const Trajectory& traj, double initial_energy) {
  const double n_steps = std::llround(traj.config.t_end / traj.config.dt);
  return n_steps * 10.0 * traj.config.newton_tol * std::max(1.0, initial_energy);
}

std::vector<CheckResult> run_checks(const Trajectory& traj, const EnergyLedger& ledger,
                                    const std::set<Check>& checks) {
  std::vector<CheckResult> results;
  for (Check c : checks) {
    switch (c) {
      case Check::Ledger: results.push_back(ledger_check(traj, ledger)); break;
      case Check::EnergyDecay: results.push_back(fit_check(c, traj, true)); break;
      case Check::SolutionDecay: results.push_back(fit_check(c, traj, false)); break;
      case Check::Inequality: results.push_back(inequality_check(traj)); break;
      case Check::ModifiedEnergyDecay: results.push_back(fit_check(c, traj, false)); break;
    }
  }
  return results;
}

void validate_run_spec(const RunSpec& spec) {
  validate_params(spec.params.p, spec.params.mu, spec.params.alpha);
  validate_config(spec.scheme);
  if (!std::isfinite(spec.init.x) || !std::isfinite(spec.init.y)) {
    throw ConfigError("initial state must be finite");
  }
  if (spec.out_dir.empty()) throw ConfigError("output path must not be empty");
  if (spec.params.mu == 0.0) {
    for (Check c : spec.checks) {
      if (check_requires_damping(c)) {
        throw ConfigError("check '" + check_name(c) + "' requires mu > 0");
      }
    }
  }
}

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    validate_run_spec(spec);
    probe_output_dir(spec.out_dir);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigFailure;
  }

  Trajectory traj;
  try {
    traj = integrate(spec.params, spec.scheme, spec.init);
  } catch (const std::exception& e) {
    err << "integration failed: " << e.what() << "\n";
    return kExitIntegrationFailure;
  }

  try {
    const EnergyLedger ledger = build_ledger(traj);
    {
      std::ostringstream buf;
      write_trajectory_csv(buf, traj);
      write_or_throw(spec.out_dir / "trajectory.csv", buf.str());
    }
    {
      std::ostringstream buf;
      write_ledger_csv(buf, ledger);
      write_or_throw(spec.out_dir / "ledger.csv", buf.str());
    }
    const std::vector<CheckResult> results = run_checks(traj, ledger, spec.checks);
    const std::string lines = report_lines(results);
    write_or_throw(spec.out_dir / "report.txt", lines);
    out << lines;
    const bool all_passed =
        std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
    return all_passed ? kExitOk : kExitCheckFailure;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIntegrationFailure;
  }
}

void validate_sweep_spec(const SweepSpec& spec) {
  if (spec.p_values.empty() || spec.alpha_values.empty() || spec.mu_values.empty()) {
    throw ConfigError("sweep needs at least one value for each of p, alpha, mu");
  }
  for (double v : spec.alpha_values) {
    if (!std::isfinite(v)) throw ConfigError("alpha values must be finite");
  }
  for (double v : spec.mu_values) {
    if (!std::isfinite(v)) throw ConfigError("mu values must be finite");
  }
  validate_config(spec.scheme);
  if (!std::isfinite(spec.init.x) || !std::isfinite(spec.init.y)) {
    throw ConfigError("initial state must be finite");
  }
  if (spec.out_dir.empty()) throw ConfigError("output path must not be empty");
  if (spec.jobs < 0) throw ConfigError("jobs must be nonnegative");
}

SweepResult execute_sweep(const SweepSpec& spec, bool figure_mode, std::ostream& err) {
  validate_sweep_spec(spec);
  probe_output_dir(spec.out_dir);

  std::vector<GridPoint> grid;
  for (int p : spec.p_values) {
    for (double alpha : spec.alpha_values) {
      for (double mu : spec.mu_values) grid.push_back({p, alpha, mu});
    }
  }

  SweepResult result;
  result.points.resize(grid.size());
  const auto t_start = std::chrono::steady_clock::now();

  unsigned jobs = spec.jobs > 0 ? static_cast<unsigned>(spec.jobs)
                                : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(grid.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      const GridPoint& point = grid[i];
      SweepPointResult& res = result.points[i];
      res.p = point.p;
      res.alpha = point.alpha;
      res.mu = point.mu;
      try {
        const DuffingParams params = validate_params(point.p, point.mu, point.alpha);
        const auto t0 = std::chrono::steady_clock::now();
        res.trajectory = integrate(params, spec.scheme, spec.init);
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.ledger = build_ledger(res.trajectory);

        std::set<Check> checks{Check::Ledger};
        if (point.mu > 0.0) checks.insert(Check::Inequality);
        if (figure_mode && point.mu == 1.0 && point.alpha == 1.0) {
          checks.insert(Check::EnergyDecay);
          checks.insert(Check::SolutionDecay);
          checks.insert(Check::ModifiedEnergyDecay);
        }
        res.checks = run_checks(res.trajectory, res.ledger, checks);

        const std::string label = point_label(point.p, point.alpha, point.mu);
        {
          std::ostringstream buf;
          write_trajectory_csv(buf, res.trajectory);
          write_or_throw(spec.out_dir / ("traj_" + label + ".csv"), buf.str());
        }
        {
          std::ostringstream buf;
          write_ledger_csv(buf, res.ledger);
          write_or_throw(spec.out_dir / ("ledger_" + label + ".csv"), buf.str());
        }
        res.ok = true;
      } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& thread : pool) thread.join();

  for (const auto& point : result.points) {
    if (!point.ok) {
      result.any_point_failure = true;
      err << "sweep point p=" << point.p << " alpha=" << short_label(point.alpha)
          << " mu=" << short_label(point.mu) << " failed: " << point.error << "\n";
    } else {
      for (const auto& check : point.checks) {
        if (!check.passed) result.any_check_failure = true;
      }
    }
  }

  auto find_point = [&](int p, double alpha, double mu) -> const SweepPointResult* {
    for (const auto& point : result.points) {
      if (point.p == p && point.alpha == alpha && point.mu == mu) return &point;
    }
    return nullptr;
  };

  // Panel plot files: one per (p, alpha), a column of E(t) per mu.
  for (int p : spec.p_values) {
    for (double alpha : spec.alpha_values) {
      std::vector<const SweepPointResult*> curves;
      bool complete = true;
      for (double mu : spec.mu_values) {
        const SweepPointResult* point = find_point(p, alpha, mu);
        if (point == nullptr || !point->ok) {
          complete = false;
          break;
        }
        curves.push_back(point);
      }
      if (!complete) continue;

      const double rate = -static_cast<double>(p + 1) / (p - 1);
      std::ostringstream buf;
      buf << "# energy decay panel: p=" << p << " alpha=" << short_label(alpha) << "\n";
      buf << "# columns: t";
      for (double mu : spec.mu_values) buf << " E[mu=" << short_label(mu) << "]";
      if (figure_mode) buf << " ref:t^(" << short_label(rate) << ")";
      buf << "\n";
      const auto& rows = curves.front()->ledger.rows;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const double t = rows[i].t;
        if (t <= 0.0) continue;  // log-log plot data
        buf << format_double(t);
        for (const auto* curve : curves) buf << ' ' << format_double(curve->ledger.rows[i].energy);
        if (figure_mode) buf << ' ' << format_double(std::pow(t, rate));
        buf << '\n';
      }
      const auto path =
          spec.out_dir / ("panel_p" + std::to_string(p) + "_alpha" + short_label(alpha) + ".dat");
      write_or_throw(path, buf.str());
      result.panel_files.push_back(path);
    }
  }

  // Cross-point orderings of E at t = t_end.
  std::vector<double> damped_mus;
  for (double mu : spec.mu_values) {
    if (mu > 0.0) damped_mus.push_back(mu);
  }
  std::sort(damped_mus.begin(), damped_mus.end());
  std::vector<double> alphas_sorted = spec.alpha_values;
  std::sort(alphas_sorted.begin(), alphas_sorted.end());

  auto energies_at_end = [&](const std::vector<const SweepPointResult*>& points) {
    std::vector<Trajectory> trajs;
    trajs.reserve(points.size());
    for (const auto* point : points) trajs.push_back(point->trajectory);
    return compare_at_time(trajs, spec.scheme.t_end);
  };

  if (damped_mus.size() >= 2) {
    for (int p : spec.p_values) {
      for (double alpha : spec.alpha_values) {
        std::vector<const SweepPointResult*> points;
        for (double mu : damped_mus) {
          const SweepPointResult* point = find_point(p, alpha, mu);
          if (point != nullptr && point->ok) points.push_back(point);
        }
        if (points.size() < 2) continue;
        const auto sorted = energies_at_end(points);
        // ascending E must correspond to ascending mu
        bool passed = true;
        std::string detail;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
          if (i > 0 && sorted[i - 1].params.mu >= sorted[i].params.mu) passed = false;
          if (i > 0 && sorted[i - 1].energy == sorted[i].energy) passed = false;
          if (i > 0) detail += " < ";
          detail += fmt("E(mu=%s)=%.6g", short_label(sorted[i].params.mu).c_str(),
                        sorted[i].energy);
        }
        result.orderings.push_back(
            {fmt("E(t=%s) increasing in mu at p=%d alpha=%s", short_label(spec.scheme.t_end).c_str(),
                 p, short_label(alpha).c_str()),
             passed, detail});
      }
    }
  }

  if (alphas_sorted.size() >= 2) {
    for (int p : spec.p_values) {
      for (double mu : damped_mus) {
        std::vector<const SweepPointResult*> points;
        for (double alpha : alphas_sorted) {
          const SweepPointResult* point = find_point(p, alpha, mu);
          if (point != nullptr && point->ok) points.push_back(point);
        }
        if (points.size() < 2) continue;
        const auto sorted = energies_at_end(points);
        // ascending E must correspond to descending alpha
        bool passed = true;
        std::string detail;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
          if (i > 0 && sorted[i - 1].params.alpha <= sorted[i].params.alpha) passed = false;
          if (i > 0 && sorted[i - 1].energy == sorted[i].energy) passed = false;
          if (i > 0) detail += " < ";
          detail += fmt("E(alpha=%s)=%.6g", short_label(sorted[i].params.alpha).c_str(),
                        sorted[i].energy);
        }
        result.orderings.push_back(
            {fmt("E(t=%s) decreasing in alpha at p=%d mu=%s",
                 short_label(spec.scheme.t_end).c_str(), p, short_label(mu).c_str()),
             passed, detail});
      }
    }
  }

  for (const auto& ordering : result.orderings) {
    if (!ordering.passed) result.any_check_failure = true;
  }

  // Combined report, assembled single-threaded in grid order.
  std::string report;
  for (const auto& point : result.points) {
    const std::string label = point_label(point.p, point.alpha, point.mu);
    if (!point.ok) {
      report += "point " + label + ": FAILED: " + point.error + "\n";
      continue;
    }
    report += "point " + label + ": ok, E(t_end) = " +
              fmt("%.6g", point.ledger.rows.back().energy) + "\n";
    for (const auto& check : point.checks) {
      report += "  " + std::string(check.passed ? "PASS " : "FAIL ") + check.name + ": " +
                check.detail + "\n";
    }
  }
  for (const auto& ordering : result.orderings) {
    report += std::string(ordering.passed ? "PASS " : "FAIL ") + ordering.description + ": " +
              ordering.detail + "\n";
  }
  write_or_throw(spec.out_dir / "sweep_report.txt", report);

  result.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

namespace {

int sweep_exit_code(const SweepResult& result, std::ostream& out,
                    const std::filesystem::path& out_dir) {
  std::ifstream report(out_dir / "sweep_report.txt");
  out << report.rdbuf();
  if (result.any_point_failure) return kExitIntegrationFailure;
  if (result.any_check_failure) return kExitCheckFailure;
  return kExitOk;
}

}  // namespace

int cmd_sweep(const SweepSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    SweepResult result = execute_sweep(spec, false, err);
    return sweep_exit_code(result, out, spec.out_dir);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigFailure;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIntegrationFailure;
  }
}

SweepSpec figure_sweep_spec(const std::filesystem::path& out_dir, int jobs) {
  SweepSpec spec;
  spec.p_values = {3, 5, 7};
  spec.alpha_values = {1.0, 100.0};
  spec.mu_values = {0.0, 0.1, 1.0, 10.0, 100.0};
  spec.init = {2.0, 0.0};
  spec.scheme.dt = 0.01;
  spec.scheme.t_end = 5000.0;
  spec.scheme.newton_tol = 1e-12;
  spec.scheme.max_newton_iters = 50;
  spec.scheme.record_stride = default_record_stride(spec.scheme.dt, spec.scheme.t_end);
  spec.out_dir = out_dir;
  spec.jobs = jobs;
  return spec;
}

int cmd_reproduce_figure(const std::filesystem::path& out_dir, int jobs, std::ostream& out,
                         std::ostream& err) {
  const SweepSpec spec = figure_sweep_spec(out_dir, jobs);
  try {
    SweepResult result = execute_sweep(spec, true, err);
    return sweep_exit_code(result, out, spec.out_dir);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIntegrationFailure;
  }
}

}  // namespace duffing
