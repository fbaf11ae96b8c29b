#pragma once

#include <filesystem>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "duffing/analysis.hpp"
#include "duffing/io.hpp"

namespace duffing {

/// Bad run/sweep configuration (rejected before any integration starts).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Check { Ledger, EnergyDecay, SolutionDecay, Inequality, ModifiedEnergyDecay };

std::string check_name(Check check);
Check parse_check(const std::string& name);
/// Comma-separated check names, or "all" for every check.
std::set<Check> parse_checks(const std::string& csv);
/// Checks whose hypotheses require mu > 0.
bool check_requires_damping(Check check);

// Exit codes; these partition all CLI outcomes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitIntegrationFailure = 2;
inline constexpr int kExitConfigFailure = 3;

// Verdict thresholds, fixed once for every entry point.
inline constexpr double kSlopeTolerance = 0.3;          // |slope - theoretical| bound
inline constexpr double kEnvelopeSlack = 1.05;          // allowed envelope growth across halves
inline constexpr double kPositiveFractionLimit = 1e-3;  // share of increasing modified-energy samples

/// Discrete-law tolerance for the ledger check:
/// N * 10 * newton_tol * max(1, E(0)).
double ledger_residual_bound(const Trajectory& traj, double initial_energy);

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

/// Evaluates the requested checks on one trajectory. Analysis errors are
/// reported as failed checks, not thrown.
std::vector<CheckResult> run_checks(const Trajectory& traj, const EnergyLedger& ledger,
                                    const std::set<Check>& checks);

struct RunSpec {
  DuffingParams params{3, 1.0, 1.0};
  State init{2.0, 0.0};
  SchemeConfig scheme;
  std::filesystem::path out_dir;
  std::set<Check> checks{Check::Ledger};
};

/// Validates all invariants; checks requiring mu > 0 are rejected here when
/// mu = 0. Throws ConfigError or std::invalid_argument.
void validate_run_spec(const RunSpec& spec);

/// Integrates one parameter set, writes trajectory.csv, ledger.csv and
/// report.txt under spec.out_dir, and prints one verdict line per check.
/// Returns 0 on success, 1 on check failure, 2 on integration failure,
/// 3 on config/I-O failure.
int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err);

struct SweepSpec {
  std::vector<int> p_values;
  std::vector<double> alpha_values;
  std::vector<double> mu_values;
  State init{2.0, 0.0};
  SchemeConfig scheme;
  std::filesystem::path out_dir;
  int jobs = 0;  // 0 = hardware concurrency, capped at the grid size
};

void validate_sweep_spec(const SweepSpec& spec);

struct SweepPointResult {
  int p;
  double alpha;
  double mu;
  bool ok = false;
  std::string error;       // set when !ok
  Trajectory trajectory;   // valid when ok
  EnergyLedger ledger;
  std::vector<CheckResult> checks;
  double seconds = 0.0;    // integration wall time
};

struct OrderingResult {
  std::string description;
  bool passed;
  std::string detail;
};

struct SweepResult {
  std::vector<SweepPointResult> points;
  std::vector<OrderingResult> orderings;
  std::vector<std::filesystem::path> panel_files;
  bool any_point_failure = false;
  bool any_check_failure = false;  // includes ordering failures
  double total_seconds = 0.0;
};

/// Runs every grid point (concurrently up to the parallelism degree), writes
/// per-point trajectory/ledger CSVs and per-(p,alpha) panel plot files, and
/// evaluates the cross-point energy orderings at t = t_end. Point failures
/// are recorded and do not stop the sweep. Outputs are deterministic and
/// independent of the execution order.
///
/// figure_mode additionally emits the t^(-(p+1)/(p-1)) reference column in
/// the panel files and runs the decay-rate checks on the (alpha=1, mu=1)
/// points.
SweepResult execute_sweep(const SweepSpec& spec, bool figure_mode, std::ostream& err);

int cmd_sweep(const SweepSpec& spec, std::ostream& out, std::ostream& err);

/// The hard-coded experiment grid: p in {3,5,7}, alpha in {1,100},
/// mu in {0,0.1,1,10,100}, (x0,y0) = (2,0), dt = 0.01, T = 5000.
SweepSpec figure_sweep_spec(const std::filesystem::path& out_dir, int jobs);

/// Runs the full grid and emits the six panel plot files with reference
/// slopes, equivalent to cmd_sweep on figure_sweep_spec plus the reference
/// column.
int cmd_reproduce_figure(const std::filesystem::path& out_dir, int jobs, std::ostream& out,
                         std::ostream& err);

}  // namespace duffing
