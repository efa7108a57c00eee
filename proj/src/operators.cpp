#include "inhomlp/operators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "inhomlp/errors.hpp"

namespace inhomlp {

namespace {

using Index = Eigen::Index;

// cos/sin of 2 pi k n / N with the product reduced mod N first.
double twiddle_angle(std::size_t k, std::size_t n, std::size_t period) {
  return 2.0 * std::numbers::pi * static_cast<double>((k * n) % period) / static_cast<double>(period);
}

void fill_twiddles(const std::vector<std::size_t> &freqs, std::size_t length, Matrix &cos_table,
                   Matrix &sin_table) {
  cos_table.resize(static_cast<Index>(length), static_cast<Index>(freqs.size()));
  sin_table.resize(static_cast<Index>(length), static_cast<Index>(freqs.size()));
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    for (std::size_t n = 0; n < length; ++n) {
      const double a = twiddle_angle(freqs[j], n, length);
      cos_table(static_cast<Index>(n), static_cast<Index>(j)) = std::cos(a);
      sin_table(static_cast<Index>(n), static_cast<Index>(j)) = std::sin(a);
    }
  }
}

std::size_t index_of(const std::vector<std::size_t> &sorted, std::size_t value) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), value) - sorted.begin());
}

} // namespace

// Twiddle tables restricted to the distinct k_x and k_y that appear in the
// selection. Forward: W = U E_x, then W_hat = E_y^T W, both with e^{-i theta}.
struct MeasurementOperator::FourierPlan {
  Selection selection;
  std::vector<std::size_t> kxs, kys;
  std::vector<std::size_t> slot_x, slot_y; // per selection entry
  Matrix cos_x, sin_x;                      // Nx x |kxs|
  Matrix cos_y, sin_y;                      // Ny x |kys|
};

MeasurementOperator MeasurementOperator::partial_fourier(Shape shape, Selection selection) {
  const std::size_t nx = shape.cols();
  const std::size_t ny = shape.rows();
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto &f : selection) {
    if (f.kx >= nx || f.ky >= ny)
      throw InvalidSelectionError("frequency (" + std::to_string(f.kx) + "," + std::to_string(f.ky) +
                                  ") out of range for shape " + shape.to_string());
    if (!seen.emplace(f.kx, f.ky).second)
      throw InvalidSelectionError("duplicate frequency (" + std::to_string(f.kx) + "," +
                                  std::to_string(f.ky) + ")");
  }

  auto plan = std::make_shared<FourierPlan>();
  for (const auto &f : selection) {
    plan->kxs.push_back(f.kx);
    plan->kys.push_back(f.ky);
  }
  for (auto *v : {&plan->kxs, &plan->kys}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  for (const auto &f : selection) {
    plan->slot_x.push_back(index_of(plan->kxs, f.kx));
    plan->slot_y.push_back(index_of(plan->kys, f.ky));
  }
  fill_twiddles(plan->kxs, nx, plan->cos_x, plan->sin_x);
  fill_twiddles(plan->kys, ny, plan->cos_y, plan->sin_y);
  plan->selection = std::move(selection);

  MeasurementOperator op(OperatorKind::PartialFourier, shape);
  op.output_size_ = 2 * plan->selection.size();
  op.plan_ = std::move(plan);
  return op;
}

MeasurementOperator MeasurementOperator::identity(Shape shape) {
  MeasurementOperator op(OperatorKind::Identity, shape);
  op.output_size_ = shape.size();
  return op;
}

MeasurementOperator MeasurementOperator::dense(Shape shape, Matrix matrix) {
  if (static_cast<std::size_t>(matrix.cols()) != shape.size())
    throw DimensionError("dense operator has " + std::to_string(matrix.cols()) + " columns, shape needs " +
                         std::to_string(shape.size()));
  if (!matrix.allFinite())
    throw InvalidInputError("dense operator contains non-finite entries");
  MeasurementOperator op(OperatorKind::Dense, shape);
  op.output_size_ = static_cast<std::size_t>(matrix.rows());
  op.matrix_ = std::make_shared<const Matrix>(std::move(matrix));
  return op;
}

const Selection &MeasurementOperator::selection() const {
  if (kind_ != OperatorKind::PartialFourier)
    throw InvalidInputError("operator has no frequency selection");
  return plan_->selection;
}

const Matrix &MeasurementOperator::matrix() const {
  if (kind_ != OperatorKind::Dense)
    throw InvalidInputError("operator has no explicit matrix");
  return *matrix_;
}

Vector MeasurementOperator::forward(const Vector &u) const {
  if (static_cast<std::size_t>(u.size()) != shape_.size())
    throw DimensionError("forward_apply: input length " + std::to_string(u.size()) + " does not match shape " +
                         shape_.to_string());
  switch (kind_) {
  case OperatorKind::Identity:
    return u;
  case OperatorKind::Dense:
    return (*matrix_) * u;
  case OperatorKind::PartialFourier:
    break;
  }
  const auto &p = *plan_;
  const auto ny = static_cast<Index>(shape_.rows());
  const auto nx = static_cast<Index>(shape_.cols());
  Eigen::Map<const RowMatrix> grid(u.data(), ny, nx);
  const Matrix w_re = grid * p.cos_x;
  const Matrix w_im = -(grid * p.sin_x);
  const Matrix f_re = p.cos_y.transpose() * w_re + p.sin_y.transpose() * w_im;
  const Matrix f_im = p.cos_y.transpose() * w_im - p.sin_y.transpose() * w_re;
  Vector y(static_cast<Index>(output_size_));
  for (std::size_t s = 0; s < p.selection.size(); ++s) {
    const auto r = static_cast<Index>(p.slot_y[s]);
    const auto c = static_cast<Index>(p.slot_x[s]);
    y[static_cast<Index>(2 * s)] = f_re(r, c);
    y[static_cast<Index>(2 * s + 1)] = f_im(r, c);
  }
  return y;
}

Vector MeasurementOperator::adjoint(const Vector &y) const {
  if (static_cast<std::size_t>(y.size()) != output_size_)
    throw DimensionError("adjoint_apply: input length " + std::to_string(y.size()) + " does not match m = " +
                         std::to_string(output_size_));
  switch (kind_) {
  case OperatorKind::Identity:
    return y;
  case OperatorKind::Dense:
    return matrix_->transpose() * y;
  case OperatorKind::PartialFourier:
    break;
  }
  // u = Re sum_k Y_k e^{+i theta_k}, evaluated separably.
  const auto &p = *plan_;
  Matrix y_re = Matrix::Zero(static_cast<Index>(p.kys.size()), static_cast<Index>(p.kxs.size()));
  Matrix y_im = y_re;
  for (std::size_t s = 0; s < p.selection.size(); ++s) {
    const auto r = static_cast<Index>(p.slot_y[s]);
    const auto c = static_cast<Index>(p.slot_x[s]);
    y_re(r, c) = y[static_cast<Index>(2 * s)];
    y_im(r, c) = y[static_cast<Index>(2 * s + 1)];
  }
  const Matrix z_re = p.cos_y * y_re - p.sin_y * y_im;
  const Matrix z_im = p.cos_y * y_im + p.sin_y * y_re;
  const RowMatrix grid = z_re * p.cos_x.transpose() - z_im * p.sin_x.transpose();
  return Eigen::Map<const Vector>(grid.data(), grid.size());
}

Matrix MeasurementOperator::dense_normal() const {
  const auto n = static_cast<Index>(shape_.size());
  switch (kind_) {
  case OperatorKind::Identity:
    return Matrix::Identity(n, n);
  case OperatorKind::Dense:
    return matrix_->transpose() * (*matrix_);
  case OperatorKind::PartialFourier:
    break;
  }
  Matrix normal(n, n);
  Vector e = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    normal.col(j) = adjoint(forward(e));
    e[j] = 0.0;
  }
  return 0.5 * (normal + normal.transpose());
}

std::optional<SeparableNormal> MeasurementOperator::separable_normal() const {
  if (!shape_.is_2d())
    return std::nullopt;
  const std::size_t ny = shape_.rows();
  const std::size_t nx = shape_.cols();
  if (kind_ == OperatorKind::Identity)
    return SeparableNormal{Axis::X, Matrix::Identity(static_cast<Index>(nx), static_cast<Index>(nx))};
  if (kind_ != OperatorKind::PartialFourier)
    return std::nullopt;

  // For real u, sum_{k in S} |u_hat(k)|^2 = sum_k w(k) |u_hat(k)|^2 with the
  // symmetrized weight w(k) = ([k in S] + [-k in S]) / 2.
  Matrix weight = Matrix::Zero(static_cast<Index>(ny), static_cast<Index>(nx));
  for (const auto &f : plan_->selection) {
    weight(static_cast<Index>(f.ky), static_cast<Index>(f.kx)) += 0.5;
    weight(static_cast<Index>((ny - f.ky) % ny), static_cast<Index>((nx - f.kx) % nx)) += 0.5;
  }

  const auto circulant = [](const Vector &w, std::size_t len, double scale) {
    Matrix block(static_cast<Index>(len), static_cast<Index>(len));
    for (std::size_t d = 0; d < len; ++d) {
      double acc = 0.0;
      for (std::size_t k = 0; k < len; ++k)
        if (w[static_cast<Index>(k)] != 0.0)
          acc += w[static_cast<Index>(k)] * std::cos(twiddle_angle(k, d, len));
      for (std::size_t a = 0; a < len; ++a)
        block(static_cast<Index>(a), static_cast<Index>((a + len - d) % len)) = scale * acc;
    }
    return block;
  };

  bool const_along_y = true;
  for (Index r = 1; r < weight.rows() && const_along_y; ++r)
    const_along_y = weight.row(r) == weight.row(0);
  if (const_along_y)
    return SeparableNormal{Axis::X, circulant(weight.row(0).transpose(), nx, static_cast<double>(ny))};

  for (Index c = 1; c < weight.cols(); ++c)
    if (weight.col(c) != weight.col(0))
      return std::nullopt;
  return SeparableNormal{Axis::Y, circulant(weight.col(0), ny, static_cast<double>(nx))};
}

Vector forward_apply(const MeasurementOperator &op, const Signal &u) {
  if (!(u.shape() == op.signal_shape()))
    throw DimensionError("forward_apply: signal shape " + u.shape().to_string() + " does not match operator shape " +
                         op.signal_shape().to_string());
  return op.forward(u.values());
}

Vector adjoint_apply(const MeasurementOperator &op, const Vector &y) { return op.adjoint(y); }

void gradient_apply(const Shape &shape, const Vector &u, Vector &out) {
  const auto ny = static_cast<Index>(shape.rows());
  const auto nx = static_cast<Index>(shape.cols());
  const Index n = ny * nx;
  if (u.size() != n)
    throw DimensionError("gradient_apply: input length does not match shape " + shape.to_string());
  out.resize(static_cast<Index>(shape.gradient_size()));
  for (Index r = 0; r < ny; ++r) {
    const Index row = r * nx;
    for (Index c = 0; c + 1 < nx; ++c)
      out[row + c] = u[row + c + 1] - u[row + c];
    out[row + nx - 1] = 0.0;
  }
  if (!shape.is_2d())
    return;
  for (Index r = 0; r + 1 < ny; ++r)
    for (Index c = 0; c < nx; ++c)
      out[n + r * nx + c] = u[(r + 1) * nx + c] - u[r * nx + c];
  for (Index c = 0; c < nx; ++c)
    out[n + (ny - 1) * nx + c] = 0.0;
}

GradientField gradient_apply(const Signal &u) {
  Vector out;
  gradient_apply(u.shape(), u.values(), out);
  return GradientField(u.shape(), std::move(out));
}

void gradient_adjoint(const Shape &shape, const Vector &v, Vector &out) {
  const auto ny = static_cast<Index>(shape.rows());
  const auto nx = static_cast<Index>(shape.cols());
  const Index n = ny * nx;
  if (static_cast<std::size_t>(v.size()) != shape.gradient_size())
    throw DimensionError("gradient_adjoint: field length " + std::to_string(v.size()) + " does not match shape " +
                         shape.to_string());
  out.setZero(n);
  for (Index r = 0; r < ny; ++r) {
    const Index row = r * nx;
    for (Index c = 0; c + 1 < nx; ++c) {
      out[row + c] -= v[row + c];
      out[row + c + 1] += v[row + c];
    }
  }
  if (!shape.is_2d())
    return;
  for (Index r = 0; r + 1 < ny; ++r)
    for (Index c = 0; c < nx; ++c) {
      const double d = v[n + r * nx + c];
      out[r * nx + c] -= d;
      out[(r + 1) * nx + c] += d;
    }
}

Vector gradient_adjoint(const GradientField &v) {
  Vector out;
  gradient_adjoint(v.shape(), v.values(), out);
  return out;
}

Matrix difference_normal_1d(std::size_t n) {
  const auto len = static_cast<Index>(n);
  Matrix m = Matrix::Zero(len, len);
  for (Index i = 0; i + 1 < len; ++i) {
    m(i, i) += 1.0;
    m(i + 1, i + 1) += 1.0;
    m(i, i + 1) -= 1.0;
    m(i + 1, i) -= 1.0;
  }
  return m;
}

Selection lowpass_selection(const Shape &shape, std::size_t count) {
  if (shape.is_2d())
    throw InvalidInputError("lowpass selection is defined for 1D shapes; use x_lowpass_selection");
  if (count > shape.cols())
    throw InvalidSelectionError("lowpass count exceeds signal length");
  Selection s;
  for (std::size_t k = 0; k < count; ++k)
    s.push_back({k, 0});
  return s;
}

Selection x_lowpass_selection(const Shape &shape, std::size_t count) {
  if (count > shape.cols())
    throw InvalidSelectionError("x-lowpass count exceeds number of columns");
  Selection s;
  for (std::size_t kx = 0; kx < count; ++kx)
    for (std::size_t ky = 0; ky < shape.rows(); ++ky)
      s.push_back({kx, ky});
  return s;
}

Selection x_stride_selection(const Shape &shape, std::size_t stride) {
  if (stride == 0)
    throw InvalidSelectionError("x-stride must be positive");
  Selection s;
  for (std::size_t kx = 0; kx < shape.cols(); kx += stride)
    for (std::size_t ky = 0; ky < shape.rows(); ++ky)
      s.push_back({kx, ky});
  return s;
}

namespace {

std::size_t parse_index(std::string_view text, const std::filesystem::path &path, std::size_t line_no) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed frequency index '" +
                  std::string(text) + "'");
  return value;
}

} // namespace

Selection read_mask_file(const std::filesystem::path &path, const Shape &shape) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open mask file " + path.string());
  Selection s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
      continue;
    const auto comma = line.find(',');
    if (shape.is_2d()) {
      if (comma == std::string::npos)
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 'kx,ky'");
      s.push_back({parse_index(std::string_view(line).substr(0, comma), path, line_no),
                   parse_index(std::string_view(line).substr(comma + 1), path, line_no)});
    } else {
      if (comma != std::string::npos)
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected a single index for a 1D mask");
      s.push_back({parse_index(line, path, line_no), 0});
    }
  }
  return s;
}

void write_mask_file(const std::filesystem::path &path, const Shape &shape, const Selection &selection) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write mask file " + path.string());
  for (const auto &f : selection) {
    if (shape.is_2d())
      out << f.kx << ',' << f.ky << '\n';
    else
      out << f.kx << '\n';
  }
  if (!out)
    throw IoError("failed writing mask file " + path.string());
}

} // namespace inhomlp
