#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "inhomlp/admm.hpp"
#include "inhomlp/errors.hpp"
#include "inhomlp/operators.hpp"
#include "inhomlp/synth.hpp"

using namespace inhomlp;

namespace {

Vector random_vector(std::mt19937_64 &rng, Eigen::Index n) {
  std::normal_distribution<double> d;
  Vector v(n);
  for (auto &x : v)
    x = d(rng);
  return v;
}

// (A^T A + lambda D^T D) u = A^T y, assembled densely.
Vector tikhonov_direct(const MeasurementOperator &op, const Vector &y, double lambda) {
  const Shape &s = op.signal_shape();
  const Eigen::Index n = static_cast<Eigen::Index>(s.size());
  Matrix dtd(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e[j] = 1.0;
    Vector g;
    gradient_apply(s, e, g);
    Vector back;
    gradient_adjoint(s, g, back);
    dtd.col(j) = back;
  }
  const Matrix lhs = op.dense_normal() + lambda * dtd;
  return lhs.ldlt().solve(op.adjoint(y));
}

SolverConfig tight(double lambda) {
  SolverConfig cfg;
  cfg.lambda = lambda;
  cfg.max_iter = 20000;
  cfg.tol_primal = 1e-13;
  cfg.tol_dual = 1e-13;
  return cfg;
}

} // namespace

TEST(Shrink, Examples) {
  EXPECT_EQ(shrink(1.0, 3.0), 2.0);
  EXPECT_EQ(shrink(1.0, -3.0), -2.0);
  EXPECT_EQ(shrink(1.0, 0.5), 0.0);
  EXPECT_EQ(shrink(0.0, -0.25), -0.25);
}

TEST(Prox, Examples) {
  EXPECT_NEAR(prox_scalar(1.5, 1.0, 1.0), 0.25, 1e-14);
  for (double rho : {0.1, 1.0, 7.0})
    for (double q : {0.0, 0.3, 12.0})
      EXPECT_NEAR(prox_scalar(2.0, rho, q), rho * q / (2.0 + rho), 1e-15 * (1.0 + q));
  EXPECT_EQ(prox_scalar(1.0, 2.0, 3.0), 2.5);
  EXPECT_EQ(prox_scalar(1.0, 2.0, 0.4), 0.0);
  EXPECT_EQ(prox_scalar(1.3, 2.0, 0.0), 0.0);
}

TEST(Prox, ResidualVanishesAndIsMonotoneInQ) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const double p = 1.05 + 0.9 * u(rng);
    const double rho = std::pow(10.0, -1.0 + 3.0 * u(rng));
    const double q = 10.0 * u(rng);
    const double x = prox_scalar(p, rho, q);
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, q);
    if (x > 0.0)
      EXPECT_LE(std::abs(prox_residual(p, rho, q, x)), 1e-10 * (1.0 + rho * q));
    EXPECT_LE(x, prox_scalar(p, rho, q + 0.1));
  }
}

TEST(Prox, NearEndpointExponentsAreContinuous) {
  for (double q : {0.2, 0.7, 3.0}) {
    EXPECT_NEAR(prox_scalar(1.0 + 1e-9, 2.0, q), prox_scalar(1.0, 2.0, q), 1e-6);
    EXPECT_NEAR(prox_scalar(2.0 - 1e-9, 2.0, q), prox_scalar(2.0, 2.0, q), 1e-6);
  }
}

TEST(Prox, InvalidArguments) {
  EXPECT_THROW(prox_scalar(0.5, 1.0, 1.0), InvalidInputError);
  EXPECT_THROW(prox_scalar(2.5, 1.0, 1.0), InvalidInputError);
  EXPECT_THROW(prox_scalar(1.5, 0.0, 1.0), InvalidInputError);
}

TEST(VUpdate, BlockExamples) {
  const Shape s = Shape::grid(1, 1);
  const GradientField t(s, Vector{{3.0, 4.0}});
  const GradientField v = v_update(t, ExponentField::homogeneous(1, 1.0), 1.0);
  EXPECT_NEAR(v.values()[0], 2.4, 1e-14);
  EXPECT_NEAR(v.values()[1], 3.2, 1e-14);
  const GradientField w = v_update(GradientField(s, Vector{{3.0, 0.0}}), ExponentField::homogeneous(1, 2.0), 1.0);
  EXPECT_NEAR(w.values()[0], 1.0, 1e-14);
  EXPECT_EQ(w.values()[1], 0.0);
  const GradientField z = v_update(GradientField(s, Vector{{0.0, 0.0}}), ExponentField::homogeneous(1, 1.5), 1.0);
  EXPECT_EQ(z.values(), (Vector{{0.0, 0.0}}));
}

TEST(VUpdate, OneDimensionalIsComponentwise) {
  const Shape s = Shape::line(4);
  const Vector p{{1.0, 1.5, 2.0, 1.2}};
  const Vector t{{-3.0, 2.0, -1.0, 0.1}};
  const GradientField v = v_update(GradientField(s, t), ExponentField(p), 2.0);
  for (Eigen::Index i = 0; i < 4; ++i)
    EXPECT_NEAR(v.values()[i], std::copysign(prox_scalar(p[i], 2.0, std::abs(t[i])), t[i]), 1e-15);
}

TEST(UUpdate, IdentityOperatorClosedForm) {
  // (I + rho F^T F) u = y + rho F^T x with x = 0 and y constant gives u = y.
  const Shape s = Shape::line(6);
  const MeasurementOperator op = MeasurementOperator::identity(s);
  const Vector y = Vector::Constant(6, 2.5);
  const Vector u = u_update(op, y, 3.0, GradientField::zeros(s));
  EXPECT_LE((u - y).norm(), 1e-13);
}

TEST(UUpdate, MatchesDenseNormalEquations) {
  std::mt19937_64 rng(11);
  const Shape s = Shape::line(8);
  const MeasurementOperator op = MeasurementOperator::partial_fourier(s, lowpass_selection(s, 3));
  const Vector y = random_vector(rng, static_cast<Eigen::Index>(op.output_size()));
  const GradientField x(s, random_vector(rng, 8));
  const double rho = 0.7;
  Matrix lhs = op.dense_normal() + rho * difference_normal_1d(8);
  const Vector want = lhs.llt().solve(op.adjoint(y) + rho * gradient_adjoint(x));
  EXPECT_LE((u_update(op, y, rho, x) - want).norm(), 1e-10 * want.norm());
}

TEST(UUpdate, SeparableAgreesWithDense) {
  std::mt19937_64 rng(12);
  const Shape s = Shape::grid(6, 8);
  for (const Selection &sel : {x_lowpass_selection(s, 3), x_stride_selection(s, 3)}) {
    const MeasurementOperator op = MeasurementOperator::partial_fourier(s, sel);
    const NormalSolver sep(op, 0.9, NormalSolver::Strategy::Separable);
    const NormalSolver dense(op, 0.9, NormalSolver::Strategy::Dense);
    EXPECT_EQ(sep.strategy(), NormalSolver::Strategy::Separable);
    const Vector rhs = random_vector(rng, 48);
    EXPECT_LE((sep.solve(rhs) - dense.solve(rhs)).norm(), 1e-10 * rhs.norm());
  }
}

TEST(UUpdate, SingularWithoutDc) {
  const Shape s = Shape::line(8);
  Selection sel;
  sel.push_back(Frequency{2, 0});
  EXPECT_THROW(NormalSolver(MeasurementOperator::partial_fourier(s, sel), 1.0), SingularSystemError);
}

TEST(Admm, ZeroMeasurementGivesZero) {
  const Shape s = Shape::line(16);
  const MeasurementOperator op = MeasurementOperator::partial_fourier(s, lowpass_selection(s, 5));
  const Vector y = Vector::Zero(static_cast<Eigen::Index>(op.output_size()));
  for (double p : {1.0, 1.5, 2.0}) {
    const ReconstructionResult r = admm_solve(op, y, ExponentField::homogeneous(16, p), tight(1.0));
    EXPECT_EQ(r.u_hat.values().lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_TRUE(r.converged);
  }
}

TEST(Admm, QuadraticExponentMatchesTikhonov) {
  std::mt19937_64 rng(13);
  const Shape s = Shape::line(8);
  const MeasurementOperator op = MeasurementOperator::partial_fourier(s, lowpass_selection(s, 3));
  const Vector y = random_vector(rng, static_cast<Eigen::Index>(op.output_size()));
  for (double lambda : {0.05, 1.0, 4.0}) {
    const ReconstructionResult r = admm_solve(op, y, ExponentField::homogeneous(8, 2.0), tight(lambda));
    const Vector want = tikhonov_direct(op, y, lambda);
    EXPECT_TRUE(r.converged);
    EXPECT_LE((r.u_hat.values() - want).norm(), 1e-10 * want.norm()) << lambda;
  }
}

TEST(Admm, QuadraticExponentMatchesTikhonovIn2D) {
  std::mt19937_64 rng(14);
  const Shape s = Shape::grid(8, 8);
  const MeasurementOperator op = MeasurementOperator::partial_fourier(s, x_lowpass_selection(s, 3));
  const Vector y = random_vector(rng, static_cast<Eigen::Index>(op.output_size()));
  const ReconstructionResult r = admm_solve(op, y, ExponentField::homogeneous(64, 2.0), tight(0.5));
  const Vector want = tikhonov_direct(op, y, 0.5);
  EXPECT_LE((r.u_hat.values() - want).norm(), 1e-9 * want.norm());
}

TEST(Admm, ObjectiveBelowZeroSignalAndDecreasing) {
  const Shape s = Shape::line(64);
  const Signal truth = make_signal_1d(64);
  const MeasurementOperator op = MeasurementOperator::partial_fourier(s, lowpass_selection(s, 12));
  const Vector y = forward_apply(op, truth);
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  Vector p(64);
  for (auto &x : p)
    x = u(rng);
  SolverConfig cfg;
  cfg.lambda = 0.1;
  const ReconstructionResult r = admm_solve(op, y, ExponentField(p), cfg);
  const double at_zero = objective_value(op, y, Vector::Zero(64), ExponentField(p), cfg.lambda);
  EXPECT_LT(objective_value(op, y, r.u_hat.values(), ExponentField(p), cfg.lambda), at_zero);
  ASSERT_FALSE(r.objective_history.empty());
  EXPECT_LE(r.objective_history.back(), r.objective_history.front() + 1e-12);
  EXPECT_EQ(r.primal_history.size(), r.iterations);
}

TEST(Admm, WarmStartFromConvergedStateStopsImmediately) {
  const Shape s = Shape::line(32);
  const MeasurementOperator op = MeasurementOperator::partial_fourier(s, lowpass_selection(s, 7));
  const Vector y = forward_apply(op, make_signal_1d(32));
  SolverConfig cfg;
  cfg.lambda = 0.3;
  const ReconstructionResult first = admm_solve(op, y, ExponentField::homogeneous(32, 1.0), cfg);
  ASSERT_TRUE(first.converged);
  const ReconstructionResult again = admm_solve(op, y, ExponentField::homogeneous(32, 1.0), cfg, first.state);
  EXPECT_LE(again.iterations, 2u);
  EXPECT_LE((again.u_hat.values() - first.u_hat.values()).norm(), 1e-5);
}

TEST(Admm, Validation) {
  const Shape s = Shape::line(8);
  const MeasurementOperator op = MeasurementOperator::identity(s);
  const Vector y = Vector::Zero(8);
  SolverConfig cfg;
  cfg.rho = 0.0;
  EXPECT_THROW(admm_solve(op, y, ExponentField::homogeneous(8, 1.5), cfg), InvalidInputError);
  EXPECT_THROW(admm_solve(op, Vector::Zero(7), ExponentField::homogeneous(8, 1.5), SolverConfig{}),
               DimensionError);
  EXPECT_THROW(admm_solve(op, y, ExponentField::homogeneous(7, 1.5), SolverConfig{}), DimensionError);
  EXPECT_THROW(ExponentField::homogeneous(8, 2.5), InvalidInputError);
}

TEST(Admm, LambdaScaledPenaltyReachesSameMinimizer) {
  const Shape s = Shape::line(40);
  const MeasurementOperator op = MeasurementOperator::partial_fourier(s, lowpass_selection(s, 9));
  const Vector y = forward_apply(op, make_signal_1d(40));
  for (double lambda : {0.05, 5.0}) {
    SolverConfig fixed = tight(lambda);
    SolverConfig scaled = tight(lambda);
    scaled.rho_per_lambda = 4.0;
    EXPECT_EQ(scaled.penalty(), std::max(scaled.rho, 4.0 * lambda));
    const ExponentField p = ExponentField::homogeneous(40, 1.3);
    const ReconstructionResult a = admm_solve(op, y, p, fixed);
    const ReconstructionResult b = admm_solve(op, y, p, scaled);
    EXPECT_LE((a.u_hat.values() - b.u_hat.values()).norm(), 1e-7 * (1.0 + a.u_hat.values().norm())) << lambda;
  }
  SolverConfig bad;
  bad.rho_per_lambda = -1.0;
  EXPECT_THROW(bad.validate(), InvalidInputError);
  SolverConfig other;
  other.rho_per_lambda = 2.0;
  EXPECT_THROW(admm_solve(admm_normal_solver(op, 1.0), op, y, ExponentField::homogeneous(40, 1.0), other),
               InvalidInputError);
}
