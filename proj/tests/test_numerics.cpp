#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "inhomlp/errors.hpp"
#include "inhomlp/numerics.hpp"

using namespace inhomlp;

namespace {

double bisect(const std::function<double(double)> &f, double a, double b, double tol) {
  double fa = f(a);
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0)
      return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

} // namespace

TEST(Chandrupatla, Examples) {
  EXPECT_NEAR(chandrupatla_root([](double x) { return x * x - 4.0; }, 0.0, 4.0), 2.0, 1e-12);
  EXPECT_NEAR(chandrupatla_root([](double x) { return x * x * x - x - 2.0; }, 1.0, 2.0), 1.52137970680457, 1e-10);
  const auto h = [](double x) { return std::copysign(1.5 * std::sqrt(std::abs(x)), x) + (x - 1.0); };
  EXPECT_NEAR(chandrupatla_root(h, 0.0, 1.0), 0.25, 1e-12);
}

TEST(Chandrupatla, EndpointRootAndReversedBracket) {
  EXPECT_EQ(chandrupatla_root([](double x) { return x - 1.0; }, 1.0, 3.0), 1.0);
  EXPECT_NEAR(chandrupatla_root([](double x) { return x - 1.5; }, 3.0, 0.0), 1.5, 1e-13);
}

TEST(Chandrupatla, Errors) {
  EXPECT_THROW(chandrupatla_root([](double x) { return x * x + 1.0; }, -1.0, 1.0), BracketError);
  EXPECT_THROW(chandrupatla_root([](double x) { return x; }, -1.0, std::nan("")), BracketError);
  RootConfig tight;
  tight.tol_x = 1e-300;
  tight.tol_f = 0.0;
  tight.max_iter = 3;
  try {
    chandrupatla_solve([](double x) { return std::atan(x - 0.3); }, -1e6, 1e6, tight);
    FAIL() << "expected non-convergence";
  } catch (const NonConvergenceError &e) {
    EXPECT_TRUE(std::isfinite(e.best_iterate()));
    EXPECT_GE(e.best_iterate(), -1e6);
    EXPECT_LE(e.best_iterate(), 1e6);
  }
  RootConfig bad;
  bad.tol_x = 0.0;
  EXPECT_THROW(chandrupatla_solve([](double x) { return x; }, -1.0, 1.0, bad), InvalidInputError);
}

TEST(Chandrupatla, AgreesWithBisectionOnRandomMonotoneFunctions) {
  std::mt19937_64 rng(20240);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    // f(x) = s * (a (x - r) + b sinh(c (x - r)) + d ((x - r)^3)) is strictly monotone.
    const double r = -5.0 + 10.0 * u(rng);
    const double a = 1e-3 + u(rng);
    const double b = u(rng) * (t % 3 == 0 ? 0.0 : 1.0);
    const double c = 0.1 + 3.0 * u(rng);
    const double d = u(rng) * (t % 2 ? 1.0 : 0.0);
    const double s = t % 4 == 0 ? -1.0 : 1.0;
    const auto f = [=](double x) {
      const double z = x - r;
      return s * (a * z + b * std::sinh(c * z) + d * z * z * z);
    };
    const double lo = r - 0.1 - 5.0 * u(rng);
    const double hi = r + 0.1 + 5.0 * u(rng);
    RootConfig cfg = RootConfig::defaults_for(lo, hi);
    cfg.tol_f = 0.0;
    const RootResult got = chandrupatla_solve(f, lo, hi, cfg);
    const double want = bisect(f, lo, hi, 1e-15);
    EXPECT_GE(got.x, lo);
    EXPECT_LE(got.x, hi);
    EXPECT_LE(std::abs(got.x - want), cfg.tol_x + 1e-14) << "trial " << t;
  }
}

TEST(Chandrupatla, ProxResidualsConvergeQuickly) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t worst = 0;
  for (int t = 0; t < 5000; ++t) {
    const double p = 1.0 + 1e-6 + (1.0 - 1e-6) * u(rng);
    const double rho = std::pow(10.0, -3.0 + 6.0 * u(rng));
    const double q = 1e3 * u(rng) + 1e-12;
    const auto h = [=](double x) { return std::copysign(p * std::pow(std::abs(x), p - 1.0), x) + rho * (x - q); };
    const RootResult r = chandrupatla_solve(h, 0.0, q, RootConfig::defaults_for(0.0, q));
    worst = std::max(worst, r.iterations);
    EXPECT_GE(r.x, 0.0);
    EXPECT_LE(r.x, q);
  }
  EXPECT_LE(worst, 60u);
}
