#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "inhomlp/signal.hpp"

namespace inhomlp {

/// A retained DFT frequency. In 1D only `kx` is used and `ky` is 0.
struct Frequency {
  std::size_t kx = 0;
  std::size_t ky = 0;
  friend bool operator==(const Frequency &, const Frequency &) = default;
};

using Selection = std::vector<Frequency>;

enum class OperatorKind { PartialFourier, Identity, Dense };

/// Axis along which a normal matrix A^T A acts as a dense block while being
/// the identity along the other axis.
enum class Axis { X, Y };

/// A^T A = I_y (x) B (axis X) or B (x) I_x (axis Y) on a row-major grid.
struct SeparableNormal {
  Axis axis;
  Matrix block;
};

/// Linear measurement map A : R^N -> R^m.
///
/// Partial-Fourier operators use the unnormalized forward DFT
///   u_hat(k) = sum_n u(n) exp(-2 pi i k.n / N)
/// (separable product in 2D) and emit (Re, Im) for each selected frequency,
/// in selection order, so m = 2 |selection|.
///
/// Instances are immutable; copies share precomputed twiddle tables.
class MeasurementOperator {
public:
  static MeasurementOperator partial_fourier(Shape shape, Selection selection);
  static MeasurementOperator identity(Shape shape);
  static MeasurementOperator dense(Shape shape, Matrix matrix);

  OperatorKind kind() const noexcept { return kind_; }
  const Shape &signal_shape() const noexcept { return shape_; }
  std::size_t output_size() const noexcept { return output_size_; }
  const Selection &selection() const;
  const Matrix &matrix() const;

  Vector forward(const Vector &u) const;
  Vector adjoint(const Vector &y) const;

  /// Explicit N x N matrix A^T A.
  Matrix dense_normal() const;

  /// Kronecker form of A^T A when it exists for a 2D shape; nullopt otherwise.
  std::optional<SeparableNormal> separable_normal() const;

  struct FourierPlan;

private:
  MeasurementOperator(OperatorKind kind, Shape shape) : kind_(kind), shape_(shape) {}

  OperatorKind kind_;
  Shape shape_;
  std::size_t output_size_ = 0;
  std::shared_ptr<const FourierPlan> plan_;
  std::shared_ptr<const Matrix> matrix_;
};

/// A u for a signal whose shape must match the operator's.
Vector forward_apply(const MeasurementOperator &op, const Signal &u);

/// A^T y, reshaped as a signal-sized vector.
Vector adjoint_apply(const MeasurementOperator &op, const Vector &y);

/// Forward differences with a zero last difference along each axis.
GradientField gradient_apply(const Signal &u);
void gradient_apply(const Shape &shape, const Vector &u, Vector &out);

/// Exact transpose of gradient_apply.
Vector gradient_adjoint(const GradientField &v);
void gradient_adjoint(const Shape &shape, const Vector &v, Vector &out);

/// n x n matrix D^T D of the 1D forward difference with replicate boundary.
Matrix difference_normal_1d(std::size_t n);

// Selection rules.

/// 1D: wavenumbers 0, 1, ..., count - 1.
Selection lowpass_selection(const Shape &shape, std::size_t count);
/// 2D: k_x in {0, ..., count - 1}, every k_y.
Selection x_lowpass_selection(const Shape &shape, std::size_t count);
/// 2D: k_x in {0, stride, 2 stride, ...}, every k_y.
Selection x_stride_selection(const Shape &shape, std::size_t stride);

/// Plain-text mask: one index (1D) or "kx,ky" pair (2D) per line.
/// Blank lines and lines starting with '#' are skipped.
Selection read_mask_file(const std::filesystem::path &path, const Shape &shape);
void write_mask_file(const std::filesystem::path &path, const Shape &shape, const Selection &selection);

} // namespace inhomlp
