#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "inhomlp/operators.hpp"
#include "inhomlp/signal.hpp"

namespace inhomlp {

/// Per-component exponents p_i in [1, 2].
class ExponentField {
public:
  explicit ExponentField(Vector per_component);
  static ExponentField homogeneous(std::size_t n, double p);

  const Vector &values() const noexcept { return p_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(p_.size()); }
  double operator[](std::size_t i) const { return p_[static_cast<Eigen::Index>(i)]; }

private:
  Vector p_;
};

struct SolverConfig {
  double rho = 1.0;
  double lambda = 1.0;
  std::size_t max_iter = 2000;
  double tol_primal = 1e-6;
  double tol_dual = 1e-6;
  bool record_objective = true;
  /// When positive, each solve uses the penalty max(rho, rho_per_lambda * lambda).
  /// The minimizer does not depend on the penalty; only the iteration count does.
  double rho_per_lambda = 0.0;

  double penalty() const noexcept { return rho_per_lambda > 0.0 ? std::max(rho, rho_per_lambda * lambda) : rho; }
  void validate() const;
};

/// Iterates of the scaled-dual ADMM. v and w live in gradient space.
struct ADMMState {
  Vector u;
  Vector v;
  Vector w;
  std::size_t k = 0;
  double primal_res = 0.0;
  double dual_res = 0.0;
};

struct ReconstructionResult {
  Signal u_hat;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> primal_history;
  std::vector<double> dual_history;
  std::vector<double> objective_history;
  ADMMState state;
};

/// sgn(q) max(|q| - kappa, 0).
double shrink(double kappa, double q);

/// argmin_x |x|^p + (rho / 2)(x - q)^2 for q >= 0.
///
/// p = 1 is soft thresholding, p = 2 the closed form rho q / (2 + rho); any
/// other p is the zero of h(x) = p x^{p-1} + rho (x - q) on [0, q], located
/// with chandrupatla_root down to adjacent doubles.
double prox_scalar(double p, double rho, double q);

/// h(x) = sgn(x) p |x|^{p-1} + rho (x - q).
double prox_residual(double p, double rho, double q, double x);

/// Blockwise prox of sum_i |v_i|^{p_i}: each pixel block is shrunk along its
/// own direction by prox_scalar applied to its Euclidean norm.
GradientField v_update(const GradientField &target, const ExponentField &p, double rho_over_lambda);
void v_update(const Shape &shape, const Vector &target, const Vector &p, double rho_over_lambda, Vector &out);

/// Factorization of A^T A + rho F^T F, built once and reused.
///
/// Dense: the N x N matrix is assembled and Cholesky-factored; a pivot below
/// 1e-12 of the largest marks the system singular.
///
/// Separable (2D only): when A^T A is I (x) B or B (x) I the system is
/// L_left U + U L_right = R with symmetric L_left, L_right, solved exactly in
/// the joint eigenbasis. An eigenvalue sum below 1e-12 of the largest marks
/// the system singular.
///
/// Immutable after construction; safe to share across threads.
class NormalSolver {
public:
  enum class Strategy { Auto, Dense, Separable };

  NormalSolver(const MeasurementOperator &op, double rho, Strategy strategy = Strategy::Auto);

  Vector solve(const Vector &rhs) const;

  Strategy strategy() const noexcept { return strategy_; }
  double rho() const noexcept { return rho_; }
  const Shape &shape() const noexcept { return shape_; }

  /// Largest N for which the dense path is attempted.
  static constexpr std::size_t max_dense_size = 8192;

private:
  Shape shape_;
  double rho_;
  Strategy strategy_;
  // Dense path.
  Matrix chol_;
  // Separable path: L_left = Qa diag(la) Qa^T, L_right = Qb diag(lb) Qb^T.
  Matrix qa_, qb_;
  RowMatrix inv_eig_;
};

/// Solves (A^T A + rho F^T F) u = A^T y + rho F^T x.
Vector u_update(const NormalSolver &solver, const MeasurementOperator &op, const Vector &y, const GradientField &x);
Vector u_update(const MeasurementOperator &op, const Vector &y, double rho, const GradientField &x);

/// ||A u - y||^2 + lambda sum_i |D u_i|^{p_i}.
double objective_value(const MeasurementOperator &op, const Vector &y, const Vector &u, const ExponentField &p,
                       double lambda);

/// Factorization used by admm_solve for penalty rho. The u-step minimizes
/// ||A u - y||^2 + (rho / 2) ||F u - x||^2, whose normal matrix is
/// A^T A + (rho / 2) F^T F.
NormalSolver admm_normal_solver(const MeasurementOperator &op, double rho);

/// ADMM for min ||A u - y||^2 + lambda sum_i |D u_i|^{p_i} with the splitting
/// F u = v and scaled dual w:
///   u <- argmin ||A u - y||^2 + (rho / 2) ||F u - (v - w)||^2
///      = u_update(op, y, rho / 2, v - w)
///   v <- prox_{R, rho/lambda}(F u + w)
///   w <- w + F u - v
/// Stops when ||F u - v|| <= tol_primal sqrt(M) and rho ||v - v_prev|| <=
/// tol_dual sqrt(M), or after max_iter iterations (reported, not thrown).
ReconstructionResult admm_solve(const MeasurementOperator &op, const Vector &y, const ExponentField &p,
                                const SolverConfig &cfg, const std::optional<ADMMState> &init = std::nullopt);

/// Same, reusing admm_normal_solver(op, cfg.penalty()).
ReconstructionResult admm_solve(const NormalSolver &solver, const MeasurementOperator &op, const Vector &y,
                                const ExponentField &p, const SolverConfig &cfg,
                                const std::optional<ADMMState> &init = std::nullopt);

/// iteration,primal_residual,dual_residual,objective
void write_diagnostics_csv(const std::filesystem::path &path, const ReconstructionResult &result);

} // namespace inhomlp
