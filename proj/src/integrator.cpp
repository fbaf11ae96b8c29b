#include "duffing/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace duffing {

namespace {

void require_finite_state(const State& s, const char* where) {
  if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
    throw NonFiniteError(std::string(where) + ": state is not finite");
  }
}

constexpr int kMaxBisectionIters = 200;
constexpr int kMaxBracketExpansions = 128;

}  // namespace

void validate_config(const SchemeConfig& config) {
  if (!std::isfinite(config.dt) || config.dt <= 0.0) {
    throw std::invalid_argument("dt must be positive and finite");
  }
  if (!std::isfinite(config.t_end) || config.t_end <= 0.0) {
    throw std::invalid_argument("t_end must be positive and finite");
  }
  if (config.t_end < config.dt) throw std::invalid_argument("t_end must be at least dt");
  if (!std::isfinite(config.newton_tol) || config.newton_tol <= 0.0) {
    throw std::invalid_argument("newton_tol must be positive and finite");
  }
  if (config.max_newton_iters < 1) throw std::invalid_argument("max_newton_iters must be >= 1");
  if (config.record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
}

long default_record_stride(double dt, double t_end) {
  const long n_steps = std::llround(t_end / dt);
  return std::max<long>(1, (n_steps + 49999) / 50000);
}

double sp_residual(const DuffingParams& params, double dt, const State& prev, double x_next) {
  if (!(dt > 0.0)) throw std::invalid_argument("sp_residual: dt must be positive");
  require_finite_state(prev, "sp_residual");
  if (!std::isfinite(x_next)) throw NonFiniteError("sp_residual: x_next is not finite");
  const double dx = x_next - prev.x;
  const double r = 2.0 * dx / (dt * dt) - 2.0 * prev.y / dt +
                   discrete_gradient(params, x_next, prev.x) + params.mu / dt * dx;
  if (!std::isfinite(r)) throw NonFiniteError("sp_residual overflowed");
  return r;
}

double sp_residual_derivative(const DuffingParams& params, double dt, const State& prev,
                              double x_next) {
  if (!(dt > 0.0)) throw std::invalid_argument("sp_residual_derivative: dt must be positive");
  require_finite_state(prev, "sp_residual_derivative");
  if (!std::isfinite(x_next)) {
    throw NonFiniteError("sp_residual_derivative: x_next is not finite");
  }
  // Horner accumulation of sum_{l=0}^{p-1} (p-l) x^(p-1-l) b^l, l ascending.
  const int p = params.p;
  double acc = static_cast<double>(p);
  double b_pow = 1.0;
  for (int l = 1; l < p; ++l) {
    b_pow *= prev.x;
    acc = acc * x_next + (p - l) * b_pow;
  }
  const double d = 2.0 / (dt * dt) + params.mu / dt + params.alpha / (p + 1) * acc;
  if (!std::isfinite(d)) throw NonFiniteError("sp_residual_derivative overflowed");
  return d;
}

StepOutcome sp_step(const DuffingParams& params, const SchemeConfig& config, const State& prev) {
  require_finite_state(prev, "sp_step");
  const double dt = config.dt;
  const double tol = config.newton_tol;
  const double vel_scale = 0.5 * dt;  // converts R to velocity units

  const double predictor = prev.x + dt * prev.y;
  double x = predictor;
  double r = sp_residual(params, dt, prev, x);
  int iters = 0;
  bool converged = false;
  bool multi_root = false;

  while (iters < config.max_newton_iters) {
    const double dr = sp_residual_derivative(params, dt, prev, x);
    if (!(dr > 0.0)) {
      multi_root = true;  // residual not increasing here; leave it to bisection
      break;
    }
    const double dx = -r / dr;
    const double x_new = x + dx;
    if (!std::isfinite(x_new)) break;
    const double r_new = sp_residual(params, dt, prev, x_new);
    ++iters;
    x = x_new;
    r = r_new;
    if (std::abs(r) * vel_scale <= tol && std::abs(dx) <= tol * std::max(1.0, std::abs(x))) {
      converged = true;
      break;
    }
  }

  if (!converged) {
    // Bracket the root by outward expansion from the predictor. R is an
    // odd-degree polynomial with positive leading coefficient, so a sign
    // change always exists.
    double h = std::max(dt, dt * std::abs(prev.y));
    double lo = predictor - h;
    double hi = predictor + h;
    double r_lo = sp_residual(params, dt, prev, lo);
    double r_hi = sp_residual(params, dt, prev, hi);
    int expansions = 0;
    while (std::signbit(r_lo) == std::signbit(r_hi) && expansions < kMaxBracketExpansions) {
      h *= 2.0;
      lo = predictor - h;
      hi = predictor + h;
      if (!std::isfinite(lo) || !std::isfinite(hi)) break;
      r_lo = sp_residual(params, dt, prev, lo);
      r_hi = sp_residual(params, dt, prev, hi);
      ++expansions;
    }
    if (std::signbit(r_lo) == std::signbit(r_hi)) {
      throw NonConvergenceError("sp_step: could not bracket a root", x,
                                std::abs(r) * vel_scale);
    }
    if (sp_residual_derivative(params, dt, prev, lo) <= 0.0 ||
        sp_residual_derivative(params, dt, prev, hi) <= 0.0) {
      multi_root = true;
    }
    for (int i = 0; i < kMaxBisectionIters && !converged; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;  // bracket is down to adjacent doubles
      const double r_mid = sp_residual(params, dt, prev, mid);
      x = mid;
      r = r_mid;
      if (std::abs(r_mid) * vel_scale <= tol &&
          0.5 * (hi - lo) <= tol * std::max(1.0, std::abs(mid))) {
        converged = true;
        break;
      }
      if (std::signbit(r_mid) == std::signbit(r_lo)) {
        lo = mid;
        r_lo = r_mid;
      } else {
        hi = mid;
        r_hi = r_mid;
      }
    }
    if (!converged) {
      throw NonConvergenceError(
          "sp_step: Newton and bisection exhausted without meeting tolerance " +
              std::to_string(tol),
          x, std::abs(r) * vel_scale);
    }
  } else if (sp_residual_derivative(params, dt, prev, x) <= 0.0) {
    multi_root = true;
  }

  const double y_next = 2.0 * (x - prev.x) / dt - prev.y;
  if (!std::isfinite(y_next)) throw NonFiniteError("sp_step: velocity update overflowed");
  return StepOutcome{State{x, y_next}, iters, std::abs(r) * vel_scale, multi_root};
}

Trajectory integrate(const DuffingParams& params, const SchemeConfig& config, const State& init) {
  validate_config(config);
  require_finite_state(init, "integrate");

  const long n_steps = std::llround(config.t_end / config.dt);
  Trajectory traj{params, config, {}, 0};
  traj.samples.reserve(static_cast<std::size_t>(n_steps / config.record_stride) + 1);
  traj.samples.push_back({0.0, init, 0, 0.0});

  State s = init;
  double diss = 0.0;
  double diss_comp = 0.0;  // Neumaier compensation for the dissipation sum
  for (long n = 0; n < n_steps; ++n) {
    StepOutcome out;
    try {
      out = sp_step(params, config, s);
    } catch (const NonConvergenceError& e) {
      throw NonConvergenceError("step " + std::to_string(n + 1) +
                                    " (t = " + std::to_string((n + 1) * config.dt) +
                                    "): " + e.what(),
                                e.last_iterate, e.last_residual);
    } catch (const NonFiniteError& e) {
      throw NonFiniteError("step " + std::to_string(n + 1) +
                           " (t = " + std::to_string((n + 1) * config.dt) + "): " + e.what());
    }
    const double y_sum = out.next.y + s.y;
    const double term = 0.25 * params.mu * y_sum * y_sum * config.dt;
    const double sum = diss + term;
    if (std::abs(diss) >= std::abs(term)) {
      diss_comp += (diss - sum) + term;
    } else {
      diss_comp += (term - sum) + diss;
    }
    diss = sum;
    if (out.multi_root_warning) ++traj.multi_root_steps;
    s = out.next;
    if ((n + 1) % config.record_stride == 0) {
      // t as a single multiplication so it cannot drift over long runs
      traj.samples.push_back({(n + 1) * config.dt, s, out.iterations, diss + diss_comp});
    }
  }
  return traj;
}

State rk4_step(const DuffingParams& params, double dt, const State& prev) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  const auto [k1x, k1y] = vector_field(params, prev);
  const auto [k2x, k2y] = vector_field(params, {prev.x + 0.5 * dt * k1x, prev.y + 0.5 * dt * k1y});
  const auto [k3x, k3y] = vector_field(params, {prev.x + 0.5 * dt * k2x, prev.y + 0.5 * dt * k2y});
  const auto [k4x, k4y] = vector_field(params, {prev.x + dt * k3x, prev.y + dt * k3y});
  const State next{prev.x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
                   prev.y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)};
  if (!std::isfinite(next.x) || !std::isfinite(next.y)) {
    throw NonFiniteError("rk4_step overflowed");
  }
  return next;
}

State rk4_integrate(const DuffingParams& params, double dt, long n_steps, const State& init) {
  State s = init;
  for (long n = 0; n < n_steps; ++n) s = rk4_step(params, dt, s);
  return s;
}

}  // namespace duffing
