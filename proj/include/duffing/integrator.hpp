#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "duffing/model.hpp"

namespace duffing {

/// Time-stepping configuration for the implicit scheme.
///
/// newton_tol bounds the velocity-scaled step residual (see sp_step). In
/// double precision its achievable floor grows like eps*|x|/dt, so for
/// dt well below 1e-3 the default must be loosened accordingly.
struct SchemeConfig {
  double dt = 0.01;          // time step
  double t_end = 1.0;        // horizon; N = round(t_end/dt) steps
  double newton_tol = 1e-12;
  int max_newton_iters = 50;
  long record_stride = 1;    // store every k-th step
};

/// Throws std::invalid_argument if any field violates its constraint.
void validate_config(const SchemeConfig& config);

/// Smallest stride keeping at most ~50k stored samples; used by the CLI
/// as its default (full-resolution dissipation is accumulated regardless).
long default_record_stride(double dt, double t_end);

/// Result of one implicit step.
struct StepOutcome {
  State next;
  int iterations = 0;
  /// Residual of the solved step equation scaled to velocity units
  /// (|R| * dt/2); at most newton_tol on success.
  double final_residual = 0.0;
  /// Set if the residual derivative was found nonpositive near the
  /// accepted root; the root nearest the predictor is used then.
  bool multi_root_warning = false;
};

struct TrajectorySample {
  double t;
  State state;
  /// Newton iterations spent on the step that produced this sample.
  int newton_iters;
  /// (mu/4) sum_{l<n} (y^(l+1)+y^(l))^2 dt accumulated over every step up
  /// to this sample, at full step resolution regardless of record_stride.
  double dissipation;
};

struct Trajectory {
  DuffingParams params;
  SchemeConfig config;
  std::vector<TrajectorySample> samples;
  long multi_root_steps = 0;
};

/// Newton plus bisection fallback failed to meet the tolerance.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double last_iterate, double last_residual)
      : std::runtime_error(what), last_iterate(last_iterate), last_residual(last_residual) {}
  double last_iterate;
  double last_residual;  // velocity-scaled, like StepOutcome::final_residual
};

/// Scalar residual of the implicit step after eliminating y^(n+1) via
/// y^(n+1) = 2(x - x_prev)/dt - y_prev:
///   R(x) = 2(x - x_prev)/dt^2 - 2 y_prev/dt
///        + discrete_gradient(x, x_prev) + (mu/dt)(x - x_prev).
/// R is a degree-p polynomial in x with leading coefficient alpha/(p+1)
/// and is strictly increasing, so it has exactly one real root.
double sp_residual(const DuffingParams& params, double dt, const State& prev, double x_next);

/// Analytic derivative of sp_residual with respect to x_next:
///   2/dt^2 + mu/dt + (alpha/(p+1)) sum_{l=0}^{p-1} (p-l) x_next^(p-1-l) x_prev^l.
double sp_residual_derivative(const DuffingParams& params, double dt, const State& prev,
                              double x_next);

/// One step of the implicit scheme
///   (x^(n+1)-x^(n))/dt = (y^(n+1)+y^(n))/2,
///   (y^(n+1)-y^(n))/dt = -dg(x^(n+1),x^(n)) - (mu/2)(y^(n+1)+y^(n)),
/// solved by Newton from the predictor x^(n) + dt y^(n), with bisection on
/// a sign-change bracket as fallback. Convergence requires both
/// |R| dt/2 <= newton_tol and |delta x| <= newton_tol max(1,|x|).
StepOutcome sp_step(const DuffingParams& params, const SchemeConfig& config, const State& prev);

/// Runs round(t_end/dt) steps from init, recording every record_stride-th
/// state. Step failures are rethrown annotated with step index and time.
Trajectory integrate(const DuffingParams& params, const SchemeConfig& config, const State& init);

/// Classical explicit fourth-order Runge-Kutta step on the first-order
/// system; used as a cross-validation oracle, never in the scheme itself.
State rk4_step(const DuffingParams& params, double dt, const State& prev);

/// n_steps RK4 steps of size dt.
State rk4_integrate(const DuffingParams& params, double dt, long n_steps, const State& init);

}  // namespace duffing
