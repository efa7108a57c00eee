#include "inhomlp/signal.hpp"

#include <charconv>
#include <cmath>

#include "inhomlp/errors.hpp"

namespace inhomlp {

Shape Shape::line(std::size_t n) {
  if (n == 0)
    throw InvalidSizeError("signal length must be positive");
  return Shape(1, n, false);
}

Shape Shape::grid(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0)
    throw InvalidSizeError("grid dimensions must be positive");
  return Shape(rows, cols, true);
}

std::string Shape::to_string() const {
  if (!two_d_)
    return std::to_string(cols_);
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

namespace {

std::size_t parse_dimension(std::string_view text, const std::string &whole) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0)
    throw InvalidSizeError("invalid shape '" + whole + "'");
  return value;
}

} // namespace

Shape Shape::parse(const std::string &text) {
  const auto x = text.find('x');
  if (x == std::string::npos)
    return line(parse_dimension(text, text));
  return grid(parse_dimension(std::string_view(text).substr(0, x), text),
              parse_dimension(std::string_view(text).substr(x + 1), text));
}

Signal::Signal(Shape shape, Vector values) : shape_(shape), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != shape_.size())
    throw DimensionError("signal has " + std::to_string(values_.size()) + " values but shape " +
                         shape_.to_string() + " needs " + std::to_string(shape_.size()));
  if (!values_.allFinite())
    throw InvalidInputError("signal contains non-finite values");
}

Signal Signal::zeros(Shape shape) { return Signal(shape, Vector::Zero(static_cast<Eigen::Index>(shape.size()))); }

GradientField::GradientField(Shape shape, Vector values) : shape_(shape), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != shape_.gradient_size())
    throw DimensionError("gradient field has " + std::to_string(values_.size()) + " values but shape " +
                         shape_.to_string() + " needs " + std::to_string(shape_.gradient_size()));
}

GradientField GradientField::zeros(Shape shape) {
  return GradientField(shape, Vector::Zero(static_cast<Eigen::Index>(shape.gradient_size())));
}

Vector GradientField::magnitudes() const {
  const auto n = static_cast<Eigen::Index>(shape_.size());
  if (!shape_.is_2d())
    return values_.cwiseAbs();
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out[i] = std::hypot(values_[i], values_[n + i]);
  return out;
}

} // namespace inhomlp
