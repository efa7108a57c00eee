#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace inhomlp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Shape of a signal: a line of `cols` samples, or a `rows` x `cols` grid
/// stored row-major. Rows run along y, columns along x.
class Shape {
public:
  static Shape line(std::size_t n);
  static Shape grid(std::size_t rows, std::size_t cols);

  bool is_2d() const noexcept { return two_d_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }

  /// Length of the gradient field: N in 1D, 2N in 2D.
  std::size_t gradient_size() const noexcept { return two_d_ ? 2 * size() : size(); }

  /// "200" or "128x128".
  std::string to_string() const;
  static Shape parse(const std::string &text);

  friend bool operator==(const Shape &, const Shape &) = default;

private:
  Shape(std::size_t rows, std::size_t cols, bool two_d) : rows_(rows), cols_(cols), two_d_(two_d) {}

  std::size_t rows_ = 1;
  std::size_t cols_ = 0;
  bool two_d_ = false;
};

/// Real-valued signal with an explicit shape. Entries are always finite.
class Signal {
public:
  Signal(Shape shape, Vector values);
  static Signal zeros(Shape shape);

  const Shape &shape() const noexcept { return shape_; }
  const Vector &values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

  double operator()(std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double at(std::size_t row, std::size_t col) const {
    return values_[static_cast<Eigen::Index>(row * shape_.cols() + col)];
  }

private:
  Shape shape_;
  Vector values_;
};

/// Discrete gradient of a signal. In 2D the x-differences of all pixels come
/// first, then the y-differences, so pixel i owns the pair (v[i], v[N + i]).
class GradientField {
public:
  GradientField(Shape shape, Vector values);
  static GradientField zeros(Shape shape);

  const Shape &shape() const noexcept { return shape_; }
  const Vector &values() const noexcept { return values_; }
  Vector &values() noexcept { return values_; }

  /// Euclidean norm of each pixel's gradient block (|v_i| in 1D).
  Vector magnitudes() const;

private:
  Shape shape_;
  Vector values_;
};

} // namespace inhomlp
