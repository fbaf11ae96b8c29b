#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "duffing/model.hpp"
#include "test_util.hpp"

using namespace duffing;
using test_util::ulp_of;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST_CASE("validate_params accepts the experiment parameter sets") {
  const DuffingParams params = validate_params(3, 1.0, 1.0);
  CHECK(params.p == 3);
  CHECK(params.mu == 1.0);
  CHECK(params.alpha == 1.0);

  const DuffingParams undamped = validate_params(3, 0.0, 1.0);
  CHECK(undamped.mu == 0.0);

  CHECK_NOTHROW(validate_params(7, 100.0, 100.0));
}

TEST_CASE("validate_params rejects each bad input with a distinct message") {
  CHECK_THROWS_WITH_AS(validate_params(4, 1.0, 1.0), "p must be odd, got 4",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(validate_params(1, 1.0, 1.0), "p must be at least 3, got 1",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(validate_params(3, -0.5, 1.0), "mu must be nonnegative, got -0.500000",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(validate_params(3, 1.0, 0.0), "alpha must be positive, got 0.000000",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(validate_params(3, 1.0, -2.0), "alpha must be positive, got -2.000000",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(validate_params(3, kNaN, 1.0), "mu must be finite", std::invalid_argument);
  CHECK_THROWS_WITH_AS(validate_params(3, 1.0, std::numeric_limits<double>::infinity()),
                       "alpha must be finite", std::invalid_argument);
}

TEST_CASE("potential evaluates (alpha/(p+1)) x^(p+1)") {
  CHECK(potential({3, 1.0, 1.0}, 2.0) == 4.0);
  CHECK(potential({3, 1.0, 1.0}, 0.0) == 0.0);
  CHECK(potential({5, 1.0, 100.0}, 2.0) == 100.0 / 6.0 * 64.0);  // 6400/6
}

TEST_CASE("potential rejects non-finite input and overflow") {
  CHECK_THROWS_AS(potential({3, 1.0, 1.0}, kNaN), NonFiniteError);
  CHECK_THROWS_AS(potential({7, 1.0, 1.0}, 1e100), NonFiniteError);
}

TEST_CASE("vector_field matches the first-order system") {
  {
    const auto [dx, dy] = vector_field({3, 1.0, 1.0}, {2.0, 0.0});
    CHECK(dx == 0.0);
    CHECK(dy == -8.0);
  }
  {
    const auto [dx, dy] = vector_field({5, 3.0, 7.0}, {0.0, 0.0});
    CHECK(dx == 0.0);
    CHECK(dy == 0.0);
  }
  {
    const auto [dx, dy] = vector_field({3, 0.1, 1.0}, {1.0, 2.0});
    CHECK(dx == 2.0);
    CHECK(dy == doctest::Approx(-1.2).epsilon(1e-15));
  }
  CHECK_THROWS_AS(vector_field({3, 1.0, 1.0}, {kNaN, 0.0}), NonFiniteError);
}

TEST_CASE("energy evaluates kinetic plus potential") {
  CHECK(energy({3, 1.0, 1.0}, {2.0, 0.0}) == 4.0);
  CHECK(energy({3, 1.0, 1.0}, {0.0, 2.0}) == 2.0);
  CHECK(energy({7, 1.0, 100.0}, {2.0, 0.0}) == 3200.0);  // 100*256/8
}

TEST_CASE("modified_energy adds the damping cross terms") {
  CHECK(modified_energy({3, 1.0, 1.0}, {2.0, 0.0}) == 5.0);
  CHECK(modified_energy({3, 2.0, 1.0}, {1.0, -1.0}) == 0.75);

  // mu = 0 collapses the cross terms exactly
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const State s{dist(rng), dist(rng)};
    const DuffingParams params{5, 0.0, 3.0};
    CHECK(modified_energy(params, s) == energy(params, s));
  }
}

TEST_CASE("dissipation_functional evaluates (mu/2) y^2 + (mu alpha/2) x^(p+1)") {
  CHECK(dissipation_functional({3, 1.0, 1.0}, {2.0, 0.0}) == 8.0);
  CHECK(dissipation_functional({3, 0.0, 1.0}, {2.0, 3.0}) == 0.0);
  CHECK(dissipation_functional({3, 2.0, 1.0}, {1.0, 3.0}) == 10.0);
}

TEST_CASE("discrete_gradient worked examples") {
  CHECK(discrete_gradient({3, 1.0, 1.0}, 2.0, 2.0) == 8.0);  // alpha x^p at a = b
  CHECK(discrete_gradient({3, 1.0, 1.0}, 1.0, 0.0) == 0.25);
  const double g = discrete_gradient({5, 1.0, 1.0}, 2.0, -1.0);
  CHECK(g == 3.5);  // (1/6)(32-16+8-4+2-1)
  // telescoping: g*(a-b) = V(a) - V(b)
  const double lhs = g * 3.0;
  const double rhs = potential({5, 1.0, 1.0}, 2.0) - potential({5, 1.0, 1.0}, -1.0);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
  CHECK(lhs == doctest::Approx(10.5).epsilon(1e-14));
}

TEST_CASE("discrete_gradient rejects non-finite input and overflow") {
  CHECK_THROWS_AS(discrete_gradient({3, 1.0, 1.0}, kNaN, 0.0), NonFiniteError);
  CHECK_THROWS_AS(discrete_gradient({7, 1.0, 1.0}, 1e200, 1e200), NonFiniteError);
}

TEST_CASE("discrete_gradient identity: dg(a,b)(a-b) = V(a) - V(b) within 32 ulps") {
  std::mt19937_64 rng(987654321);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int p : {3, 5, 7}) {
    for (double alpha : {1.0, 100.0}) {
      const DuffingParams params{p, 1.0, alpha};
      double worst = 0.0;
      for (int i = 0; i < 10000; ++i) {
        const double a = dist(rng);
        const double b = dist(rng);
        const double lhs = discrete_gradient(params, a, b) * (a - b);
        const double va = potential(params, a);
        const double vb = potential(params, b);
        const double scale = std::max({std::abs(lhs), std::abs(va), std::abs(vb)});
        const double err = std::abs(lhs - (va - vb));
        if (scale > 0.0) worst = std::max(worst, err / ulp_of(scale));
      }
      CAPTURE(p);
      CAPTURE(alpha);
      CHECK(worst <= 32.0);
    }
  }
}

TEST_CASE("discrete_gradient consistency: dg(x,x) = alpha x^p within 8 ulps") {
  std::mt19937_64 rng(13579);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int p : {3, 5, 7}) {
    for (double alpha : {1.0, 100.0}) {
      const DuffingParams params{p, 0.0, alpha};
      double worst = 0.0;
      for (int i = 0; i < 10000; ++i) {
        const double x = dist(rng);
        const double expected = alpha * detail::int_pow(x, p);
        if (expected == 0.0) continue;
        const double err = std::abs(discrete_gradient(params, x, x) - expected);
        worst = std::max(worst, err / ulp_of(expected));
      }
      CAPTURE(p);
      CAPTURE(alpha);
      CHECK(worst <= 8.0);
    }
  }
}

TEST_CASE("discrete_gradient symmetry within rounding") {
  std::mt19937_64 rng(24680);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int p : {3, 5, 7}) {
    const DuffingParams params{p, 0.0, 1.0};
    for (int i = 0; i < 10000; ++i) {
      const double a = dist(rng);
      const double b = dist(rng);
      const double diff = std::abs(discrete_gradient(params, a, b) - discrete_gradient(params, b, a));
      // scale of the largest term in the sum
      const double term_scale =
          params.alpha * detail::int_pow(std::max(std::abs(a), std::abs(b)), p);
      CHECK(diff <= 32.0 * ulp_of(std::max(term_scale, 1.0)));
    }
  }
}

TEST_CASE("energy functionals are nonnegative; modified energy dominates") {
  std::mt19937_64 rng(112233);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  std::uniform_real_distribution<double> mu_dist(0.0, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const int p = 3 + 2 * (i % 3);
    const DuffingParams params{p, mu_dist(rng), 1.0 + 99.0 * (i % 2)};
    const State s{dist(rng), dist(rng)};
    const double pot = potential(params, s.x);
    const double e = energy(params, s);
    const double me = modified_energy(params, s);
    const double h = dissipation_functional(params, s);
    CHECK(pot >= 0.0);
    CHECK(e >= 0.0);
    CHECK(h >= 0.0);
    // completed-square lower bound me >= y^2/4 + potential
    const double lower = 0.25 * s.y * s.y + pot;
    const double scale = std::max({me, lower, 1e-300});
    CHECK(me >= lower - 16.0 * ulp_of(scale));
  }
}
