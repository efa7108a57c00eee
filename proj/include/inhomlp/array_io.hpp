#pragma once

#include <filesystem>

#include "inhomlp/signal.hpp"

namespace inhomlp {

// CSV arrays are written with 17 significant digits so every double
// round-trips exactly. A 1D signal is one value per line; a 2D signal is one
// grid row per line.

void write_signal_csv(const std::filesystem::path &path, const Signal &signal);
Signal read_signal_csv(const std::filesystem::path &path);

void write_vector_csv(const std::filesystem::path &path, const Vector &values);
Vector read_vector_csv(const std::filesystem::path &path);

/// Formats a double with round-trip precision.
std::string format_double(double value);

} // namespace inhomlp
