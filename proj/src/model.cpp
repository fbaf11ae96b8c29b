#include "duffing/model.hpp"

#include <cmath>

namespace duffing {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NonFiniteError(std::string(what) + " must be finite, got " + std::to_string(v));
  }
}

void require_finite(const State& s, const char* where) {
  if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
    throw NonFiniteError(std::string(where) + ": state (" + std::to_string(s.x) + ", " +
                         std::to_string(s.y) + ") is not finite");
  }
}

}  // namespace

DuffingParams validate_params(int p, double mu, double alpha) {
  if (!std::isfinite(mu)) throw std::invalid_argument("mu must be finite");
  if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
  if (p < 3) throw std::invalid_argument("p must be at least 3, got " + std::to_string(p));
  if (p % 2 == 0) throw std::invalid_argument("p must be odd, got " + std::to_string(p));
  if (mu < 0.0) throw std::invalid_argument("mu must be nonnegative, got " + std::to_string(mu));
  if (alpha <= 0.0) {
    throw std::invalid_argument("alpha must be positive, got " + std::to_string(alpha));
  }
  return DuffingParams{p, mu, alpha};
}

double potential(const DuffingParams& params, double x) {
  require_finite(x, "potential: x");
  const double v = params.alpha / (params.p + 1) * detail::int_pow(x, params.p + 1);
  if (!std::isfinite(v)) throw NonFiniteError("potential overflowed");
  return v;
}

std::pair<double, double> vector_field(const DuffingParams& params, const State& s) {
  require_finite(s, "vector_field");
  const double dy = -params.alpha * detail::int_pow(s.x, params.p) - params.mu * s.y;
  if (!std::isfinite(dy)) throw NonFiniteError("vector_field overflowed");
  return {s.y, dy};
}

double energy(const DuffingParams& params, const State& s) {
  require_finite(s, "energy");
  const double e = 0.5 * s.y * s.y + potential(params, s.x);
  if (!std::isfinite(e)) throw NonFiniteError("energy overflowed");
  return e;
}

double modified_energy(const DuffingParams& params, const State& s) {
  require_finite(s, "modified_energy");
  const double e = 0.5 * s.y * s.y + 0.5 * params.mu * s.x * s.y +
                   0.25 * params.mu * params.mu * s.x * s.x + potential(params, s.x);
  if (!std::isfinite(e)) throw NonFiniteError("modified_energy overflowed");
  return e;
}

double dissipation_functional(const DuffingParams& params, const State& s) {
  require_finite(s, "dissipation_functional");
  const double h = 0.5 * params.mu * s.y * s.y +
                   0.5 * params.mu * params.alpha * detail::int_pow(s.x, params.p + 1);
  if (!std::isfinite(h)) throw NonFiniteError("dissipation_functional overflowed");
  return h;
}

double discrete_gradient(const DuffingParams& params, double a, double b) {
  require_finite(a, "discrete_gradient: a");
  require_finite(b, "discrete_gradient: b");
  // Horner accumulation of sum_{l=0}^{p} a^(p-l) b^l, l ascending.
  double acc = 1.0;
  double b_pow = 1.0;
  for (int l = 1; l <= params.p; ++l) {
    b_pow *= b;
    acc = acc * a + b_pow;
  }
  const double g = params.alpha / (params.p + 1) * acc;
  if (!std::isfinite(g)) throw NonFiniteError("discrete_gradient overflowed");
  return g;
}

}  // namespace duffing
