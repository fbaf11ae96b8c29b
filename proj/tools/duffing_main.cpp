#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "duffing/runner.hpp"

namespace {

struct CommonOptions {
  double x0 = 2.0;
  double y0 = 0.0;
  double dt = 0.01;
  double t_end = 5000.0;
  double newton_tol = 1e-12;
  int max_newton_iters = 50;
  long record_stride = 0;  // 0 = pick automatically
  std::string out;
  int jobs = 0;
};

void add_common_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--x0", opts.x0, "Initial position");
  cmd->add_option("--y0", opts.y0, "Initial velocity");
  cmd->add_option("--dt", opts.dt, "Time step");
  cmd->add_option("--t-end", opts.t_end, "Integration horizon T");
  cmd->add_option("--newton-tol", opts.newton_tol, "Newton residual tolerance");
  cmd->add_option("--max-newton-iters", opts.max_newton_iters, "Newton iteration cap per step");
  cmd->add_option("--record-stride", opts.record_stride,
                  "Store every k-th step (0 = automatic, at most ~50k samples)");
  cmd->add_option("--out", opts.out, "Output directory")->required();
  cmd->set_config("--config", "", "Flat key=value config file; command line overrides it");
}

duffing::SchemeConfig make_scheme(const CommonOptions& opts) {
  duffing::SchemeConfig scheme;
  scheme.dt = opts.dt;
  scheme.t_end = opts.t_end;
  scheme.newton_tol = opts.newton_tol;
  scheme.max_newton_iters = opts.max_newton_iters;
  scheme.record_stride = opts.record_stride > 0
                             ? opts.record_stride
                             : duffing::default_record_stride(opts.dt, opts.t_end);
  return scheme;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving integration and decay analysis for\n"
               "x'' + mu x' + alpha x^p = 0  (odd p >= 3, mu >= 0, alpha > 0)"};
  app.require_subcommand(1);

  // run
  CLI::App* run = app.add_subcommand("run", "Integrate one parameter set and run checks");
  int run_p = 3;
  double run_mu = 1.0, run_alpha = 1.0;
  std::string run_checks = "ledger";
  CommonOptions run_opts;
  run->add_option("--p", run_p, "Restoring-force exponent (odd, >= 3)");
  run->add_option("--mu", run_mu, "Damping coefficient");
  run->add_option("--alpha", run_alpha, "Restoring coefficient");
  run->add_option("--checks", run_checks,
                  "Comma-separated subset of ledger,energy-decay,solution-decay,inequality,"
                  "modified-energy-decay, or 'all'");
  add_common_options(run, run_opts);

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "Integrate a parameter grid concurrently");
  std::vector<int> sweep_p{3};
  std::vector<double> sweep_mu{1.0}, sweep_alpha{1.0};
  CommonOptions sweep_opts;
  sweep->add_option("--p", sweep_p, "p values")->delimiter(',');
  sweep->add_option("--mu", sweep_mu, "mu values")->delimiter(',');
  sweep->add_option("--alpha", sweep_alpha, "alpha values")->delimiter(',');
  sweep->add_option("--jobs", sweep_opts.jobs, "Parallel grid points (0 = all cores)");
  add_common_options(sweep, sweep_opts);

  // reproduce-figure
  CLI::App* figure = app.add_subcommand(
      "reproduce-figure", "Run the full (p, alpha, mu) grid at T=5000, dt=0.01 from (2,0) "
                          "and emit per-panel plot data with reference slopes");
  std::string figure_out;
  int figure_jobs = 0;
  figure->add_option("--out", figure_out, "Output directory")->required();
  figure->add_option("--jobs", figure_jobs, "Parallel grid points (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return duffing::kExitConfigFailure;
  }

  try {
    if (run->parsed()) {
      duffing::RunSpec spec;
      spec.params = {run_p, run_mu, run_alpha};
      spec.init = {run_opts.x0, run_opts.y0};
      spec.scheme = make_scheme(run_opts);
      spec.out_dir = run_opts.out;
      spec.checks = duffing::parse_checks(run_checks);
      return duffing::cmd_run(spec, std::cout, std::cerr);
    }
    if (sweep->parsed()) {
      duffing::SweepSpec spec;
      spec.p_values = sweep_p;
      spec.alpha_values = sweep_alpha;
      spec.mu_values = sweep_mu;
      spec.init = {sweep_opts.x0, sweep_opts.y0};
      spec.scheme = make_scheme(sweep_opts);
      spec.out_dir = sweep_opts.out;
      spec.jobs = sweep_opts.jobs;
      return duffing::cmd_sweep(spec, std::cout, std::cerr);
    }
    return duffing::cmd_reproduce_figure(figure_out, figure_jobs, std::cout, std::cerr);
  } catch (const duffing::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return duffing::kExitConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return duffing::kExitIntegrationFailure;
  }
}
