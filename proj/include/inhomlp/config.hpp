#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "inhomlp/admm.hpp"
#include "inhomlp/exponent.hpp"
#include "inhomlp/operators.hpp"

namespace inhomlp {

enum class SignalSource { Builtin1D, Builtin2D, Image };

/// Measurement operator rule plus noise.
///
/// Mask rules:
///   identity            A = I
///   lowpass:<n>         1D, wavenumbers 0..n-1 ("lowpass:20%" takes 20% of N)
///   x-lowpass:<n>       2D, k_x in 0..n-1 for every k_y ("x-lowpass:25%" of columns)
///   x-stride:<s>        2D, k_x in {0, s, 2s, ...} for every k_y
///   file:<path>         explicit mask file
struct MeasurementSpec {
  std::string mask = "lowpass:20%";
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

MeasurementOperator make_operator(const std::string &mask_rule, const Shape &shape,
                                  const std::filesystem::path &base_dir = {});

/// Lambda list: "a,b,c" or "log:<lo>:<hi>:<count>".
std::vector<double> parse_lambda_list(const std::string &text);

struct ExperimentConfig {
  SignalSource source = SignalSource::Builtin1D;
  std::filesystem::path image_path;
  std::size_t grid_size = 200;
  MeasurementSpec measurement;
  DesignHyper hyper;
  SolverConfig solver;
  std::vector<double> final_lambdas = log_spaced(1e-3, 1e1, 8);
  std::vector<double> tv_lambdas = log_spaced(1e-4, 1e4, 20);
  std::vector<double> tikhonov_lambdas = log_spaced(1e-4, 1e4, 20);
  std::filesystem::path output_dir = "out";
  std::size_t threads = 0; // 0: hardware concurrency
  std::filesystem::path base_dir; // for relative paths in the mask rule

  void validate() const;

  /// Canonical key = value listing of every field.
  std::string echo() const;

  /// Parses key = value lines; '#' starts a comment. Unknown keys are errors.
  /// Relative paths are resolved against base_dir. The result is validated.
  static ExperimentConfig parse(const std::string &text, const std::filesystem::path &base_dir = {});
  static ExperimentConfig load(const std::filesystem::path &path);
};

/// Truth signal named by the config.
Signal make_truth(const ExperimentConfig &cfg);

} // namespace inhomlp
