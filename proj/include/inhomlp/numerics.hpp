#pragma once

#include <cstddef>
#include <functional>

namespace inhomlp {

/// Stopping rule for chandrupatla_root. Iteration stops when |f(x)| <= tol_f,
/// when the bracket is no wider than tol_x, or when no double lies strictly
/// inside the bracket.
struct RootConfig {
  double tol_x = 1e-14;
  double tol_f = 1e-12;
  std::size_t max_iter = 100;

  /// tol_x = 1e-14 max(1, |a|, |b|), tol_f = 1e-12, max_iter = 100.
  static RootConfig defaults_for(double a, double b);
};

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  std::size_t iterations = 0;
};

/// Chandrupatla's bracketing method: inverse quadratic interpolation when the
/// last three points pass his acceptance test, bisection otherwise.
///
/// Requires f(a) f(b) <= 0. The returned point is the bracket end with the
/// smaller |f| and always lies in [min(a,b), max(a,b)].
///
/// Throws BracketError without a sign change and NonConvergenceError (with the
/// best iterate) when max_iter is exhausted.
RootResult chandrupatla_solve(const std::function<double(double)> &f, double a, double b, const RootConfig &cfg);

double chandrupatla_root(const std::function<double(double)> &f, double a, double b, const RootConfig &cfg);
double chandrupatla_root(const std::function<double(double)> &f, double a, double b);

} // namespace inhomlp
