#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace duffing {

/// Parameters of the oscillator x'' + mu x' + alpha x^p = 0.
/// Valid instances have odd p >= 3, mu >= 0 and alpha > 0; use
/// validate_params to construct one from untrusted input.
struct DuffingParams {
  int p;         // restoring-force exponent (odd, >= 3)
  double mu;     // damping coefficient, [1/time]
  double alpha;  // restoring coefficient, [1/(length^(p-1) time^2)]
};

/// One phase-space point (position, velocity).
struct State {
  double x;
  double y;
};

/// Thrown when an operation would consume or produce NaN/infinity.
/// Non-finite values abort loudly everywhere instead of propagating.
class NonFiniteError : public std::runtime_error {
 public:
  explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

/// Checks (p, mu, alpha) and returns the validated parameter set.
/// Throws std::invalid_argument with a distinct message per violation:
/// p < 3, even p, negative mu, nonpositive alpha, non-finite input.
DuffingParams validate_params(int p, double mu, double alpha);

/// Potential energy (alpha/(p+1)) x^(p+1). Nonnegative for valid params.
double potential(const DuffingParams& params, double x);

/// First-order vector field (x', y') = (y, -alpha x^p - mu y).
std::pair<double, double> vector_field(const DuffingParams& params, const State& s);

/// Mechanical energy E = y^2/2 + potential(x).
double energy(const DuffingParams& params, const State& s);

/// Modified energy  y^2/2 + (mu/2) x y + (mu^2/4) x^2 + potential(x).
/// Equals energy() when mu = 0; always >= y^2/4 + potential(x).
double modified_energy(const DuffingParams& params, const State& s);

/// Dissipation functional (mu/2) y^2 + (mu alpha/2) x^(p+1); the exact
/// decay rate of the modified energy. Identically zero when mu = 0.
double dissipation_functional(const DuffingParams& params, const State& s);

/// Two-point discrete gradient of the potential,
///   (alpha/(p+1)) * sum_{l=0}^{p} a^(p-l) b^l,
/// satisfying dg(a,b) * (a-b) = potential(a) - potential(b) and
/// dg(x,x) = alpha x^p. The sum is evaluated by Horner accumulation in a
/// fixed order (l ascending) so results are bit-reproducible.
double discrete_gradient(const DuffingParams& params, double a, double b);

namespace detail {

/// x^n by repeated multiplication; deterministic, and int_pow(0, 0) = 1.
inline double int_pow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace detail

}  // namespace duffing
