#pragma once

#include <cstdint>
#include <filesystem>

#include "inhomlp/signal.hpp"

namespace inhomlp {

/// Piecewise test signal on [-1, 1]: a unit plateau on [-0.7, -0.3] and a
/// Gaussian-modulated oscillation on (0, 1].
double synthetic_1d_value(double x);

/// Radial test image on [-1, 1]^2: central oscillation, linear ramp, flat
/// ring, outer cosine, with a jump at r = 13/18.
double ring_image_value(double x, double y);

/// n uniform samples of [-1, 1], endpoints included.
Signal make_signal_1d(std::size_t n);

/// n x n uniform samples of [-1, 1]^2; row index runs along y, column along x.
Signal make_signal_2d(std::size_t n);

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// y + e with e_i ~ N(0, sigma^2) i.i.d., drawn from a generator seeded per call.
Vector add_noise(const Vector &y, const NoiseSpec &spec);

struct ErrorReport {
  double l1 = 0.0;
  double l2 = 0.0;
  double l1_relative = 0.0; // l1 / ||u_true||_1
  double l2_relative = 0.0; // l2 / ||u_true||_2
  Signal pointwise;         // |u_hat - u_true|
};

ErrorReport error_metrics(const Signal &u_hat, const Signal &u_true);

/// (e_base - e_new) / e_base.
double improvement(double e_base, double e_new);

/// 10 log10(mean(|Au|^2) / sigma^2); infinite for sigma = 0.
double snr_db(const Vector &clean_measurement, double sigma);

/// Binary 8-bit PGM (P5). Pixel values are returned unscaled.
Signal load_image(const std::filesystem::path &path);

/// Writes a 2D signal as P5 with values rounded and clamped to [0, 255].
void save_image(const std::filesystem::path &path, const Signal &image);

/// Writes a 2D signal as P5 after linear min-max scaling to [0, 255].
void render_pgm(const std::filesystem::path &path, const Signal &image);

} // namespace inhomlp
