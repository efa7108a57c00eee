#include <cmath>
#include <algorithm>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "inhomlp/errors.hpp"
#include "inhomlp/operators.hpp"

using namespace inhomlp;

namespace {

Vector random_vector(std::size_t n, std::mt19937_64 &rng) {
  std::normal_distribution<double> dist;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto &x : v)
    x = dist(rng);
  return v;
}

// O(N^2) direct DFT of a row-major grid; rows along y, columns along x.
Vector direct_dft(const Shape &shape, const Vector &u, const Selection &sel) {
  const double nx = static_cast<double>(shape.cols());
  const double ny = static_cast<double>(shape.rows());
  Vector out(static_cast<Eigen::Index>(2 * sel.size()));
  for (std::size_t s = 0; s < sel.size(); ++s) {
    std::complex<double> acc = 0.0;
    for (std::size_t r = 0; r < shape.rows(); ++r)
      for (std::size_t c = 0; c < shape.cols(); ++c) {
        const double theta = 2.0 * std::numbers::pi *
                             (static_cast<double>(sel[s].kx * c) / nx + static_cast<double>(sel[s].ky * r) / ny);
        acc += u[static_cast<Eigen::Index>(r * shape.cols() + c)] * std::polar(1.0, -theta);
      }
    out[static_cast<Eigen::Index>(2 * s)] = acc.real();
    out[static_cast<Eigen::Index>(2 * s + 1)] = acc.imag();
  }
  return out;
}

Selection random_selection(const Shape &shape, std::size_t count, std::mt19937_64 &rng) {
  Selection all;
  for (std::size_t ky = 0; ky < shape.rows(); ++ky)
    for (std::size_t kx = 0; kx < shape.cols(); ++kx)
      all.push_back({kx, shape.is_2d() ? ky : 0});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(count, all.size()));
  return all;
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

} // namespace

TEST(PartialFourier, DcOfLengthFourIsTwoRows) {
  const auto op = MeasurementOperator::partial_fourier(Shape::line(4), {{0, 0}});
  EXPECT_EQ(op.output_size(), 2u);
  const Vector y = forward_apply(op, Signal(Shape::line(4), Vector::Ones(4)));
  EXPECT_DOUBLE_EQ(y[0], 4.0);
  EXPECT_DOUBLE_EQ(y[1], 0.0);
}

TEST(PartialFourier, LowpassFortyOfTwoHundredGivesEightyRows) {
  const Shape s = Shape::line(200);
  const auto op = MeasurementOperator::partial_fourier(s, lowpass_selection(s, 40));
  EXPECT_EQ(op.output_size(), 80u);
}

TEST(PartialFourier, StrideThreeOnImage) {
  const Shape s = Shape::grid(128, 128);
  const Selection sel = x_stride_selection(s, 3);
  EXPECT_EQ(sel.size(), 43u * 128u);
  EXPECT_EQ(MeasurementOperator::partial_fourier(s, sel).output_size(), 2u * 43u * 128u);
}

TEST(PartialFourier, RejectsDuplicatesAndOutOfRange) {
  const Shape s = Shape::line(8);
  EXPECT_THROW(MeasurementOperator::partial_fourier(s, {{1, 0}, {1, 0}}), InvalidSelectionError);
  EXPECT_THROW(MeasurementOperator::partial_fourier(s, {{8, 0}}), InvalidSelectionError);
  EXPECT_THROW(MeasurementOperator::partial_fourier(s, {{1, 1}}), InvalidSelectionError);
  EXPECT_THROW(MeasurementOperator::partial_fourier(Shape::grid(4, 6), {{0, 4}}), InvalidSelectionError);
}

TEST(PartialFourier, MatchesDirectDftUpTo64) {
  std::mt19937_64 rng(11);
  for (std::size_t n : {1u, 2u, 3u, 16u, 31u, 64u}) {
    const Shape s = Shape::line(n);
    const Selection sel = random_selection(s, n, rng);
    const Vector u = random_vector(n, rng);
    const Vector got = MeasurementOperator::partial_fourier(s, sel).forward(u);
    const Vector want = direct_dft(s, u, sel);
    EXPECT_LE((got - want).lpNorm<Eigen::Infinity>(), 1e-11 * std::max(1.0, want.lpNorm<Eigen::Infinity>())) << n;
  }
  for (auto [r, c] : {std::pair{4u, 6u}, {5u, 3u}, {8u, 8u}}) {
    const Shape s = Shape::grid(r, c);
    const Selection sel = random_selection(s, s.size() / 2 + 1, rng);
    const Vector u = random_vector(s.size(), rng);
    const Vector got = MeasurementOperator::partial_fourier(s, sel).forward(u);
    const Vector want = direct_dft(s, u, sel);
    EXPECT_LE((got - want).lpNorm<Eigen::Infinity>(), 1e-11 * std::max(1.0, want.lpNorm<Eigen::Infinity>()));
  }
}

TEST(PartialFourier, RowsFollowSelectionOrder) {
  const Shape s = Shape::line(16);
  std::mt19937_64 rng(3);
  const Vector u = random_vector(16, rng);
  const Vector ab = MeasurementOperator::partial_fourier(s, {{2, 0}, {5, 0}}).forward(u);
  const Vector ba = MeasurementOperator::partial_fourier(s, {{5, 0}, {2, 0}}).forward(u);
  EXPECT_DOUBLE_EQ(ab[0], ba[2]);
  EXPECT_DOUBLE_EQ(ab[1], ba[3]);
  EXPECT_DOUBLE_EQ(ab[2], ba[0]);
  EXPECT_DOUBLE_EQ(ab[3], ba[1]);
}

TEST(Operators, AdjointIdentityEveryKind) {
  std::mt19937_64 rng(5);
  std::vector<MeasurementOperator> ops;
  for (const Shape &s : {Shape::line(16), Shape::line(200), Shape::grid(6, 10), Shape::grid(16, 16)}) {
    ops.push_back(MeasurementOperator::identity(s));
    ops.push_back(MeasurementOperator::partial_fourier(s, random_selection(s, s.size() / 3 + 1, rng)));
    Matrix a(7, static_cast<Eigen::Index>(s.size()));
    for (auto &x : a.reshaped())
      x = std::normal_distribution<double>()(rng);
    ops.push_back(MeasurementOperator::dense(s, a));
  }
  for (const auto &op : ops)
    for (int trial = 0; trial < 5; ++trial) {
      const Vector u = random_vector(op.signal_shape().size(), rng);
      const Vector y = random_vector(op.output_size(), rng);
      const double lhs = op.forward(u).dot(y);
      const double rhs = u.dot(op.adjoint(y));
      EXPECT_LE(std::abs(lhs - rhs), 1e-12 * op.forward(u).norm() * y.norm());
    }
}

TEST(Operators, ForwardIsLinear) {
  std::mt19937_64 rng(6);
  const Shape s = Shape::grid(12, 9);
  const auto op = MeasurementOperator::partial_fourier(s, random_selection(s, 40, rng));
  const Vector u1 = random_vector(s.size(), rng), u2 = random_vector(s.size(), rng);
  const double a = 1.7, b = -0.3;
  const Vector lhs = op.forward(a * u1 + b * u2);
  const Vector rhs = a * op.forward(u1) + b * op.forward(u2);
  EXPECT_LE((lhs - rhs).norm(), 1e-12 * rhs.norm());
}

TEST(Operators, IdentityAndZero) {
  std::mt19937_64 rng(7);
  const Shape s = Shape::line(9);
  const auto id = MeasurementOperator::identity(s);
  const Vector u = random_vector(9, rng);
  EXPECT_EQ(forward_apply(id, Signal(s, u)), u);
  EXPECT_EQ(adjoint_apply(id, u), u);
  const auto pf = MeasurementOperator::partial_fourier(s, lowpass_selection(s, 3));
  EXPECT_EQ(adjoint_apply(pf, Vector::Zero(6)), Vector::Zero(9));
}

TEST(Operators, ShapeAndLengthMismatch) {
  const auto op = MeasurementOperator::identity(Shape::line(5));
  EXPECT_THROW(forward_apply(op, Signal::zeros(Shape::line(4))), DimensionError);
  EXPECT_THROW(adjoint_apply(op, Vector::Zero(6)), DimensionError);
  EXPECT_THROW(MeasurementOperator::dense(Shape::line(3), Matrix::Zero(2, 4)), DimensionError);
}

TEST(Operators, DenseNormalMatchesExplicitMatrix) {
  std::mt19937_64 rng(8);
  const Shape s = Shape::grid(4, 5);
  const auto op = MeasurementOperator::partial_fourier(s, random_selection(s, 9, rng));
  Matrix a(static_cast<Eigen::Index>(op.output_size()), 20);
  for (Eigen::Index j = 0; j < 20; ++j)
    a.col(j) = op.forward(Vector::Unit(20, j));
  EXPECT_LE((op.dense_normal() - a.transpose() * a).norm(), 1e-10 * (a.transpose() * a).norm());
}

TEST(Operators, SeparableNormalForAxisMasks) {
  for (const Shape &s : {Shape::grid(6, 8), Shape::grid(7, 5)}) {
    for (const Selection &sel : {x_lowpass_selection(s, 3), x_stride_selection(s, 2)}) {
      const auto op = MeasurementOperator::partial_fourier(s, sel);
      const auto sep = op.separable_normal();
      ASSERT_TRUE(sep.has_value());
      ASSERT_EQ(sep->axis, Axis::X);
      const auto nx = static_cast<Eigen::Index>(s.cols());
      Matrix kron = Matrix::Zero(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(s.size()));
      for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(s.rows()); ++r)
        kron.block(r * nx, r * nx, nx, nx) = sep->block;
      EXPECT_LE((kron - op.dense_normal()).norm(), 1e-10 * op.dense_normal().norm());
    }
  }
}

TEST(Operators, SeparableNormalAbsentForScatteredMask) {
  const Shape s = Shape::grid(6, 6);
  const auto op = MeasurementOperator::partial_fourier(s, {{0, 0}, {1, 2}, {3, 1}});
  EXPECT_FALSE(op.separable_normal().has_value());
}

TEST(Gradient, ConstantIsAnnihilatedExactly) {
  for (const Shape &s : {Shape::line(7), Shape::grid(5, 4)}) {
    const GradientField g = gradient_apply(Signal(s, Vector::Constant(static_cast<Eigen::Index>(s.size()), 3.25)));
    EXPECT_EQ(g.values(), Vector::Zero(static_cast<Eigen::Index>(s.gradient_size())));
  }
}

TEST(Gradient, ForwardDifferenceWithZeroLast) {
  const GradientField g = gradient_apply(Signal(Shape::line(3), Vector{{1.0, 2.0, 4.0}}));
  EXPECT_EQ(g.values(), (Vector{{1.0, 2.0, 0.0}}));
}

TEST(Gradient, RampAlongColumns) {
  const Shape s = Shape::grid(3, 3);
  Vector u(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      u[r * 3 + c] = c;
  const Vector g = gradient_apply(Signal(s, u)).values();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      EXPECT_EQ(g[r * 3 + c], c < 2 ? 1.0 : 0.0);
      EXPECT_EQ(g[9 + r * 3 + c], 0.0);
    }
}

TEST(Gradient, AdjointExamples) {
  EXPECT_EQ(gradient_adjoint(GradientField(Shape::line(3), Vector{{1.0, 0.0, 0.0}})), (Vector{{-1.0, 1.0, 0.0}}));
  EXPECT_EQ(gradient_adjoint(GradientField::zeros(Shape::grid(2, 3))), Vector::Zero(6));
  EXPECT_THROW(GradientField(Shape::grid(2, 3), Vector::Zero(6)), DimensionError);
}

TEST(Gradient, AdjointIdentityRandom) {
  std::mt19937_64 rng(9);
  for (const Shape &s : {Shape::line(1), Shape::line(50), Shape::grid(1, 7), Shape::grid(9, 13)})
    for (int trial = 0; trial < 10; ++trial) {
      const Vector u = random_vector(s.size(), rng);
      const Vector v = random_vector(s.gradient_size(), rng);
      Vector fu, ftv;
      gradient_apply(s, u, fu);
      gradient_adjoint(s, v, ftv);
      EXPECT_LE(std::abs(fu.dot(v) - u.dot(ftv)), 1e-12 * fu.norm() * v.norm() + 1e-300);
    }
}

TEST(Gradient, DifferenceNormalMatchesComposition) {
  const std::size_t n = 6;
  const Matrix dtd = difference_normal_1d(n);
  for (Eigen::Index j = 0; j < 6; ++j) {
    Vector fu, back;
    gradient_apply(Shape::line(n), Vector::Unit(6, j), fu);
    gradient_adjoint(Shape::line(n), fu, back);
    EXPECT_EQ(dtd.col(j), back);
  }
}

TEST(Selection, RulesAndValidation) {
  const Shape line = Shape::line(10);
  EXPECT_EQ(lowpass_selection(line, 3), (Selection{{0, 0}, {1, 0}, {2, 0}}));
  EXPECT_THROW(lowpass_selection(line, 11), InvalidSelectionError);
  const Shape g = Shape::grid(2, 4);
  EXPECT_EQ(x_lowpass_selection(g, 2), (Selection{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  EXPECT_THROW(x_stride_selection(g, 0), InvalidSelectionError);
  EXPECT_THROW(lowpass_selection(g, 2), InvalidInputError);
}

TEST(Selection, MaskFileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "inhomlp_mask_test";
  std::filesystem::create_directories(dir);
  const Shape g = Shape::grid(8, 6);
  const Selection sel = x_stride_selection(g, 4);
  write_mask_file(dir / "m.txt", g, sel);
  EXPECT_EQ(read_mask_file(dir / "m.txt", g), sel);

  std::ofstream(dir / "one.txt") << "# header\n3\n\n0\n";
  EXPECT_EQ(read_mask_file(dir / "one.txt", Shape::line(4)), (Selection{{3, 0}, {0, 0}}));
  std::ofstream(dir / "bad.txt") << "1,x\n";
  EXPECT_THROW(read_mask_file(dir / "bad.txt", g), IoError);
  std::ofstream(dir / "dup.txt") << "1\n1\n";
  EXPECT_THROW(MeasurementOperator::partial_fourier(Shape::line(4), read_mask_file(dir / "dup.txt", Shape::line(4))),
               InvalidSelectionError);
  EXPECT_THROW(read_mask_file(dir / "missing.txt", g), IoError);
  std::filesystem::remove_all(dir);
}
