#include "inhomlp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "inhomlp/errors.hpp"

namespace inhomlp {

namespace {

double grid_point(std::size_t i, std::size_t n) {
  return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
}

} // namespace

double synthetic_1d_value(double x) {
  if (x >= -0.7 && x <= -0.3)
    return 1.0;
  if (x > 0.0 && x <= 1.0)
    return 0.5 * (1.0 + std::sin(100.0 * (x + 1.0))) * std::exp(-25.0 * (x - 0.5) * (x - 0.5));
  return 0.0;
}

double ring_image_value(double x, double y) {
  constexpr double pi = std::numbers::pi;
  const double r = std::sqrt(x * x + y * y);
  if (r <= 4.0 / 9.0)
    return std::cos(18.0 * pi * r);
  if (r <= 5.0 / 9.0)
    return -18.0 * (r - 4.0 / 9.0) + 1.0;
  if (r <= 13.0 / 18.0)
    return -1.0;
  return std::cos(36.0 / 13.0 * pi * r);
}

Signal make_signal_1d(std::size_t n) {
  if (n < 2)
    throw InvalidSizeError("1D grid needs at least 2 points");
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    v[static_cast<Eigen::Index>(i)] = synthetic_1d_value(grid_point(i, n));
  return Signal(Shape::line(n), std::move(v));
}

Signal make_signal_2d(std::size_t n) {
  if (n < 2)
    throw InvalidSizeError("2D grid needs at least 2 points per axis");
  Vector v(static_cast<Eigen::Index>(n * n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      v[static_cast<Eigen::Index>(r * n + c)] = ring_image_value(grid_point(c, n), grid_point(r, n));
  return Signal(Shape::grid(n, n), std::move(v));
}

Vector add_noise(const Vector &y, const NoiseSpec &spec) {
  if (!(spec.sigma >= 0.0))
    throw InvalidInputError("noise sigma must be non-negative");
  if (!y.allFinite())
    throw InvalidInputError("measurement contains non-finite values");
  if (spec.sigma == 0.0)
    return y;
  std::mt19937_64 gen(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.sigma);
  Vector out = y;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out[i] += noise(gen);
  return out;
}

ErrorReport error_metrics(const Signal &u_hat, const Signal &u_true) {
  if (!(u_hat.shape() == u_true.shape()))
    throw DimensionError("error_metrics: shapes " + u_hat.shape().to_string() + " and " +
                         u_true.shape().to_string() + " differ");
  Vector diff = (u_hat.values() - u_true.values()).cwiseAbs();
  const double l1 = diff.sum();
  const double l2 = diff.norm();
  const double t1 = u_true.values().lpNorm<1>();
  const double t2 = u_true.values().norm();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return ErrorReport{l1, l2, t1 > 0 ? l1 / t1 : nan, t2 > 0 ? l2 / t2 : nan, Signal(u_true.shape(), std::move(diff))};
}

double improvement(double e_base, double e_new) { return (e_base - e_new) / e_base; }

double snr_db(const Vector &clean_measurement, double sigma) {
  if (sigma == 0.0)
    return std::numeric_limits<double>::infinity();
  const double power = clean_measurement.squaredNorm() / static_cast<double>(clean_measurement.size());
  return 10.0 * std::log10(power / (sigma * sigma));
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream &in, const std::filesystem::path &path) {
  std::string token;
  while (true) {
    const int ch = in.get();
    if (ch == EOF)
      throw IoError(path.string() + ": truncated PGM header");
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      if (!token.empty())
        return token;
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty())
        return token;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
}

std::size_t header_number(std::istream &in, const std::filesystem::path &path, const char *what) {
  const auto token = header_token(in, path);
  std::size_t value = 0;
  try {
    std::size_t used = 0;
    value = std::stoul(token, &used);
    if (used != token.size())
      throw std::invalid_argument(token);
  } catch (const std::exception &) {
    throw IoError(path.string() + ": bad PGM " + what + " '" + token + "'");
  }
  return value;
}

void write_p5(const std::filesystem::path &path, const Shape &shape, const std::vector<unsigned char> &pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << shape.cols() << ' ' << shape.rows() << "\n255\n";
  out.write(reinterpret_cast<const char *>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out)
    throw IoError("failed writing " + path.string());
}

} // namespace

Signal load_image(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open image " + path.string());
  if (header_token(in, path) != "P5")
    throw IoError(path.string() + ": not a binary PGM (P5) file");
  const auto width = header_number(in, path, "width");
  const auto height = header_number(in, path, "height");
  const auto maxval = header_number(in, path, "maxval");
  if (width == 0 || height == 0)
    throw IoError(path.string() + ": empty image");
  if (maxval == 0 || maxval > 255)
    throw IoError(path.string() + ": only 8-bit PGM is supported (maxval " + std::to_string(maxval) + ")");
  std::vector<unsigned char> pixels(width * height);
  in.read(reinterpret_cast<char *>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size()))
    throw IoError(path.string() + ": truncated pixel data");
  Vector v(static_cast<Eigen::Index>(pixels.size()));
  for (std::size_t i = 0; i < pixels.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = pixels[i];
  return Signal(Shape::grid(height, width), std::move(v));
}

void save_image(const std::filesystem::path &path, const Signal &image) {
  if (!image.shape().is_2d())
    throw DimensionError("save_image needs a 2D signal");
  std::vector<unsigned char> pixels(image.size());
  for (std::size_t i = 0; i < pixels.size(); ++i)
    pixels[i] = static_cast<unsigned char>(std::clamp(std::lround(image(i)), 0L, 255L));
  write_p5(path, image.shape(), pixels);
}

void render_pgm(const std::filesystem::path &path, const Signal &image) {
  if (!image.shape().is_2d())
    throw DimensionError("render_pgm needs a 2D signal");
  const double lo = image.values().minCoeff();
  const double hi = image.values().maxCoeff();
  std::vector<unsigned char> pixels(image.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double t = hi > lo ? (image(i) - lo) / (hi - lo) : 0.0;
    pixels[i] = static_cast<unsigned char>(std::lround(255.0 * t));
  }
  write_p5(path, image.shape(), pixels);
}

} // namespace inhomlp
