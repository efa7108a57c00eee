#include "inhomlp/admm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "inhomlp/array_io.hpp"
#include "inhomlp/errors.hpp"
#include "inhomlp/numerics.hpp"

namespace inhomlp {

using Index = Eigen::Index;

ExponentField::ExponentField(Vector per_component) : p_(std::move(per_component)) {
  for (Index i = 0; i < p_.size(); ++i)
    if (!(p_[i] >= 1.0 && p_[i] <= 2.0))
      throw InvalidInputError("exponent p[" + std::to_string(i) + "] = " + std::to_string(p_[i]) +
                              " outside [1, 2]");
}

ExponentField ExponentField::homogeneous(std::size_t n, double p) {
  return ExponentField(Vector::Constant(static_cast<Index>(n), p));
}

void SolverConfig::validate() const {
  if (!(rho > 0.0) || !(lambda > 0.0) || max_iter == 0 || !(tol_primal > 0.0) || !(tol_dual > 0.0))
    throw InvalidInputError("solver config requires rho, lambda, max_iter, tol_primal, tol_dual > 0");
  if (!(rho_per_lambda >= 0.0) || !std::isfinite(rho_per_lambda))
    throw InvalidInputError("solver config requires a finite rho_per_lambda >= 0");
}

double shrink(double kappa, double q) {
  const double mag = std::abs(q) - kappa;
  return mag > 0.0 ? std::copysign(mag, q) : 0.0;
}

double prox_residual(double p, double rho, double q, double x) {
  const double grad = x == 0.0 ? 0.0 : std::copysign(p * std::pow(std::abs(x), p - 1.0), x);
  return grad + rho * (x - q);
}

double prox_scalar(double p, double rho, double q) {
  if (!(p >= 1.0 && p <= 2.0) || !(rho > 0.0) || !(q >= 0.0))
    throw InvalidInputError("prox_scalar: need p in [1, 2], rho > 0, q >= 0");
  if (p == 1.0)
    return shrink(1.0 / rho, q);
  if (q == 0.0)
    return 0.0;
  if (p == 2.0)
    return rho * q / (2.0 + rho);
  // h is increasing with h(0) < 0 < h(q). From p x^{p-1} = rho (q - x) and
  // 0 <= x <= q the root satisfies
  //   x <= (rho q / p)^{1/(p-1)},  x >= q - p q^{p-1} / rho,
  //   x >= (rho (q - x_hi) / p)^{1/(p-1)},
  // which keeps the bracket narrow when p is close to 1.
  const auto h = [&](double x) { return prox_residual(p, rho, q, x); };
  const double inv = 1.0 / (p - 1.0);
  double hi = std::min(q, std::pow(rho * q / p, inv));
  double lo = std::max(0.0, q - p * std::pow(q, p - 1.0) / rho);
  if (hi < q)
    lo = std::max(lo, std::pow(rho * (q - hi) / p, inv));
  if (!(lo <= hi) || h(lo) > 0.0)
    lo = 0.0;
  if (h(hi) < 0.0)
    hi = q;
  if (hi == 0.0)
    return 0.0;
  if (lo == hi)
    return lo;
  // Geometric bisection down to a factor-of-two bracket. Roots far below q
  // (p near 1, small q) would otherwise take a linear halving per bit.
  if (lo == 0.0) {
    const double tiny = std::numeric_limits<double>::denorm_min();
    if (h(tiny) >= 0.0)
      return std::abs(h(tiny)) < std::abs(h(0.0)) ? tiny : 0.0;
    lo = tiny;
  }
  while (hi > 2.0 * lo) {
    const double mid = std::sqrt(lo) * std::sqrt(hi);
    if (!(mid > lo && mid < hi))
      break;
    const double hm = h(mid);
    if (hm == 0.0)
      return mid;
    (hm < 0.0 ? lo : hi) = mid;
  }
  RootConfig cfg;
  cfg.tol_x = std::numeric_limits<double>::denorm_min();
  cfg.tol_f = 0.0;
  cfg.max_iter = 1200;
  return chandrupatla_root(h, lo, hi, cfg);
}

void v_update(const Shape &shape, const Vector &target, const Vector &p, double rho_over_lambda, Vector &out) {
  const auto n = static_cast<Index>(shape.size());
  if (static_cast<std::size_t>(target.size()) != shape.gradient_size())
    throw DimensionError("v_update: target length does not match shape " + shape.to_string());
  if (p.size() != n)
    throw DimensionError("v_update: exponent field length does not match shape " + shape.to_string());
  if (!(rho_over_lambda > 0.0))
    throw InvalidInputError("v_update: rho / lambda must be positive");
  out.resize(target.size());
  if (!shape.is_2d()) {
    for (Index i = 0; i < n; ++i) {
      const double x = target[i];
      out[i] = std::copysign(prox_scalar(p[i], rho_over_lambda, std::abs(x)), x);
    }
    return;
  }
  for (Index i = 0; i < n; ++i) {
    const double a = target[i];
    const double b = target[n + i];
    const double norm = std::sqrt(a * a + b * b);
    if (norm == 0.0) {
      out[i] = 0.0;
      out[n + i] = 0.0;
      continue;
    }
    const double scale = prox_scalar(p[i], rho_over_lambda, norm) / norm;
    out[i] = scale * a;
    out[n + i] = scale * b;
  }
}

GradientField v_update(const GradientField &target, const ExponentField &p, double rho_over_lambda) {
  Vector out;
  v_update(target.shape(), target.values(), p.values(), rho_over_lambda, out);
  return GradientField(target.shape(), std::move(out));
}

namespace {

constexpr double kSingularRatio = 1e-12;

[[noreturn]] void throw_singular(const std::string &detail) {
  throw SingularSystemError("normal matrix A^T A + rho F^T F is singular (" + detail +
                            "): F annihilates constants, so the measurement must see them; use a mask that "
                            "includes the DC component k = 0");
}

} // namespace

NormalSolver::NormalSolver(const MeasurementOperator &op, double rho, Strategy strategy)
    : shape_(op.signal_shape()), rho_(rho), strategy_(strategy) {
  if (!(rho > 0.0))
    throw InvalidInputError("rho must be positive");
  std::optional<SeparableNormal> separable;
  if (strategy != Strategy::Dense)
    separable = op.separable_normal();
  if (strategy == Strategy::Separable && !separable)
    throw InvalidInputError("operator normal matrix is not separable along an axis");

  if (separable) {
    strategy_ = Strategy::Separable;
    const Matrix ly = rho * difference_normal_1d(shape_.rows());
    const Matrix lx = rho * difference_normal_1d(shape_.cols());
    const Matrix left = separable->axis == Axis::Y ? Matrix(separable->block + ly) : ly;
    const Matrix right = separable->axis == Axis::X ? Matrix(separable->block + lx) : lx;
    Eigen::SelfAdjointEigenSolver<Matrix> ea(left);
    Eigen::SelfAdjointEigenSolver<Matrix> eb(right);
    if (ea.info() != Eigen::Success || eb.info() != Eigen::Success)
      throw SingularSystemError("eigendecomposition of the normal system failed");
    qa_ = ea.eigenvectors();
    qb_ = eb.eigenvectors();
    RowMatrix eig = ea.eigenvalues().replicate(1, eb.eigenvalues().size()) +
                    eb.eigenvalues().transpose().replicate(ea.eigenvalues().size(), 1);
    const double hi = eig.maxCoeff();
    const double lo = eig.minCoeff();
    if (!(hi > 0.0) || lo < kSingularRatio * hi)
      throw_singular("smallest eigenvalue " + std::to_string(lo) + ", largest " + std::to_string(hi));
    inv_eig_ = eig.cwiseInverse();
    return;
  }

  if (shape_.size() > max_dense_size)
    throw InvalidInputError("normal matrix for shape " + shape_.to_string() +
                            " is too large for dense factorization and the operator is not separable");
  strategy_ = Strategy::Dense;
  Matrix normal = op.dense_normal();
  // rho F^T F, applied column by column so 1D and 2D share one path.
  Vector e = Vector::Zero(static_cast<Index>(shape_.size()));
  Vector grad, back;
  for (Index j = 0; j < e.size(); ++j) {
    e[j] = 1.0;
    gradient_apply(shape_, e, grad);
    gradient_adjoint(shape_, grad, back);
    normal.col(j) += rho * back;
    e[j] = 0.0;
  }
  Eigen::LLT<Matrix> llt(normal);
  if (llt.info() != Eigen::Success)
    throw_singular("Cholesky factorization broke down");
  chol_ = llt.matrixL();
  const Vector pivots = chol_.diagonal().cwiseAbs2();
  if (pivots.minCoeff() < kSingularRatio * pivots.maxCoeff())
    throw_singular("smallest pivot " + std::to_string(pivots.minCoeff()) + ", largest " +
                   std::to_string(pivots.maxCoeff()));
}

Vector NormalSolver::solve(const Vector &rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != shape_.size())
    throw DimensionError("normal solve: right-hand side length does not match shape " + shape_.to_string());
  if (strategy_ == Strategy::Dense) {
    Vector x = chol_.triangularView<Eigen::Lower>().solve(rhs);
    chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
  }
  const auto ny = static_cast<Index>(shape_.rows());
  const auto nx = static_cast<Index>(shape_.cols());
  Eigen::Map<const RowMatrix> r(rhs.data(), ny, nx);
  RowMatrix coeff = qa_.transpose() * r * qb_;
  coeff.array() *= inv_eig_.array();
  RowMatrix u = qa_ * coeff * qb_.transpose();
  return Eigen::Map<const Vector>(u.data(), u.size());
}

Vector u_update(const NormalSolver &solver, const MeasurementOperator &op, const Vector &y, const GradientField &x) {
  if (!(x.shape() == op.signal_shape()))
    throw DimensionError("u_update: gradient field shape does not match operator");
  Vector back;
  gradient_adjoint(x.shape(), x.values(), back);
  return solver.solve(op.adjoint(y) + solver.rho() * back);
}

Vector u_update(const MeasurementOperator &op, const Vector &y, double rho, const GradientField &x) {
  return u_update(NormalSolver(op, rho), op, y, x);
}

namespace {

double penalty(const Shape &shape, const Vector &grad, const Vector &p) {
  const auto n = static_cast<Index>(shape.size());
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double mag = shape.is_2d() ? std::sqrt(grad[i] * grad[i] + grad[n + i] * grad[n + i]) : std::abs(grad[i]);
    if (mag != 0.0)
      acc += p[i] == 1.0 ? mag : (p[i] == 2.0 ? mag * mag : std::pow(mag, p[i]));
  }
  return acc;
}

} // namespace

double objective_value(const MeasurementOperator &op, const Vector &y, const Vector &u, const ExponentField &p,
                       double lambda) {
  const Shape &shape = op.signal_shape();
  if (p.size() != shape.size())
    throw DimensionError("objective: exponent field length does not match shape");
  Vector grad;
  gradient_apply(shape, u, grad);
  return (op.forward(u) - y).squaredNorm() + lambda * penalty(shape, grad, p.values());
}

NormalSolver admm_normal_solver(const MeasurementOperator &op, double rho) { return NormalSolver(op, 0.5 * rho); }

ReconstructionResult admm_solve(const MeasurementOperator &op, const Vector &y, const ExponentField &p,
                                const SolverConfig &cfg, const std::optional<ADMMState> &init) {
  cfg.validate();
  return admm_solve(admm_normal_solver(op, cfg.penalty()), op, y, p, cfg, init);
}

ReconstructionResult admm_solve(const NormalSolver &solver, const MeasurementOperator &op, const Vector &y,
                                const ExponentField &p, const SolverConfig &cfg,
                                const std::optional<ADMMState> &init) {
  cfg.validate();
  const Shape &shape = op.signal_shape();
  if (!(solver.shape() == shape))
    throw DimensionError("admm_solve: solver was built for a different shape");
  if (solver.rho() != 0.5 * cfg.penalty())
    throw InvalidInputError("admm_solve: solver was not built by admm_normal_solver for this rho");
  if (static_cast<std::size_t>(y.size()) != op.output_size())
    throw DimensionError("admm_solve: measurement length " + std::to_string(y.size()) + " does not match m = " +
                         std::to_string(op.output_size()));
  if (p.size() != shape.size())
    throw DimensionError("admm_solve: exponent field length does not match shape");

  const auto n = static_cast<Index>(shape.size());
  const auto m = static_cast<Index>(shape.gradient_size());
  ADMMState st;
  if (init) {
    st = *init;
    if (st.u.size() != n || st.v.size() != m || st.w.size() != m)
      throw DimensionError("admm_solve: initial state has wrong dimensions");
    st.k = 0;
  } else {
    st.u = Vector::Zero(n);
    st.v = Vector::Zero(m);
    st.w = Vector::Zero(m);
  }

  const Vector aty = op.adjoint(y);
  const double rho = cfg.penalty();
  const double half_rho = 0.5 * rho;
  const double rho_over_lambda = rho / cfg.lambda;
  const double sqrt_m = std::sqrt(static_cast<double>(m));

  ReconstructionResult result{Signal::zeros(shape), 0, false, {}, {}, {}, {}};
  Vector back, fu, target, v_new;
  bool converged = false;
  std::size_t k = 0;
  while (k < cfg.max_iter) {
    ++k;
    gradient_adjoint(shape, st.v - st.w, back);
    st.u = solver.solve(aty + half_rho * back);
    gradient_apply(shape, st.u, fu);
    target = fu + st.w;
    v_update(shape, target, p.values(), rho_over_lambda, v_new);
    st.w += fu - v_new;
    st.primal_res = (fu - v_new).norm();
    st.dual_res = rho * (v_new - st.v).norm();
    st.v.swap(v_new);

    result.primal_history.push_back(st.primal_res);
    result.dual_history.push_back(st.dual_res);
    if (cfg.record_objective)
      result.objective_history.push_back((op.forward(st.u) - y).squaredNorm() +
                                         cfg.lambda * penalty(shape, fu, p.values()));
    if (st.primal_res <= cfg.tol_primal * sqrt_m && st.dual_res <= cfg.tol_dual * sqrt_m) {
      converged = true;
      break;
    }
  }
  st.k = k;
  result.u_hat = Signal(shape, st.u);
  result.iterations = k;
  result.converged = converged;
  result.state = std::move(st);
  return result;
}

void write_diagnostics_csv(const std::filesystem::path &path, const ReconstructionResult &result) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open " + path.string() + " for writing");
  out << "iteration,primal_residual,dual_residual,objective\n";
  for (std::size_t i = 0; i < result.primal_history.size(); ++i) {
    out << (i + 1) << ',' << format_double(result.primal_history[i]) << ',' << format_double(result.dual_history[i])
        << ',';
    if (i < result.objective_history.size())
      out << format_double(result.objective_history[i]);
    out << '\n';
  }
  if (!out)
    throw IoError("failed writing " + path.string());
}

} // namespace inhomlp
