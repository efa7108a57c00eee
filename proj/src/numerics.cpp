#include "inhomlp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "inhomlp/errors.hpp"

namespace inhomlp {

RootConfig RootConfig::defaults_for(double a, double b) {
  RootConfig cfg;
  cfg.tol_x = 1e-14 * std::max({1.0, std::abs(a), std::abs(b)});
  return cfg;
}

namespace {

bool same_sign(double x, double y) { return std::signbit(x) == std::signbit(y); }

bool no_interior_double(double a, double b) { return std::nextafter(a, b) == b || a == b; }

void validate(double a, double b, const RootConfig &cfg) {
  if (!(cfg.tol_x > 0.0) || !(cfg.tol_f >= 0.0) || cfg.max_iter == 0)
    throw InvalidInputError("root config requires tol_x > 0, tol_f >= 0 and max_iter >= 1");
  if (!std::isfinite(a) || !std::isfinite(b))
    throw BracketError("bracket endpoints must be finite");
}

} // namespace

RootResult chandrupatla_solve(const std::function<double(double)> &f, double a, double b, const RootConfig &cfg) {
  validate(a, b, cfg);
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0)
    return {a, fa, 0};
  if (fb == 0.0)
    return {b, fb, 0};
  if (!(fa * fb < 0.0))
    throw BracketError("f(a) and f(b) must have opposite signs: f(" + std::to_string(a) + ") = " + std::to_string(fa) +
                       ", f(" + std::to_string(b) + ") = " + std::to_string(fb));

  // a: newest point, b: opposite end of the bracket, c: discarded point.
  double c = a;
  double fc = fa;
  double t = 0.5;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t iter = 1; iter <= cfg.max_iter; ++iter) {
    double xt = a + t * (b - a);
    if (xt == a || xt == b)
      xt = a + 0.5 * (b - a);
    const double ft = f(xt);

    if (same_sign(ft, fa)) {
      c = a;
      fc = fa;
    } else {
      c = b;
      fc = fb;
      b = a;
      fb = fa;
    }
    a = xt;
    fa = ft;

    const bool a_better = std::abs(fa) < std::abs(fb);
    const double xm = a_better ? a : b;
    const double fm = a_better ? fa : fb;
    const double width = std::abs(b - a);
    if (fm == 0.0 || std::abs(fm) <= cfg.tol_f || width <= cfg.tol_x || no_interior_double(a, b))
      return {xm, fm, iter};

    // Keep the next point at least step_tol away from both bracket ends.
    const double step_tol = std::max(0.5 * cfg.tol_x, 2.0 * eps * std::abs(xm));
    const double tlim = step_tol / width;
    if (tlim >= 0.5) {
      t = 0.5;
      continue;
    }

    const double xi = (a - b) / (c - b);
    const double phi = (fa - fb) / (fc - fb);
    if (phi * phi < xi && (1.0 - phi) * (1.0 - phi) < 1.0 - xi) {
      t = fa / (fb - fa) * fc / (fb - fc) + (c - a) / (b - a) * fa / (fc - fa) * fb / (fc - fb);
    } else {
      t = 0.5;
    }
    t = std::clamp(t, tlim, 1.0 - tlim);
  }

  const double best = std::abs(fa) < std::abs(fb) ? a : b;
  throw NonConvergenceError("chandrupatla_root: no convergence after " + std::to_string(cfg.max_iter) +
                                " iterations (best iterate " + std::to_string(best) + ")",
                            best);
}

double chandrupatla_root(const std::function<double(double)> &f, double a, double b, const RootConfig &cfg) {
  return chandrupatla_solve(f, a, b, cfg).x;
}

double chandrupatla_root(const std::function<double(double)> &f, double a, double b) {
  return chandrupatla_solve(f, a, b, RootConfig::defaults_for(a, b)).x;
}

} // namespace inhomlp
