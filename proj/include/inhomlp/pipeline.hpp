#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "inhomlp/admm.hpp"
#include "inhomlp/config.hpp"
#include "inhomlp/exponent.hpp"
#include "inhomlp/synth.hpp"

namespace inhomlp {

/// Runs task(i) for i in [0, count) on up to `threads` workers (0: hardware
/// concurrency). Results do not depend on the worker count. The first failure
/// is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)> &task);

/// One homogeneous-p reconstruction per lambda in `schedule`, returned in
/// schedule order. Failures are rethrown naming the lambda. With a positive
/// cfg.rho_per_lambda each lambda is factored on its own and `solver` is unused.
std::vector<Signal> reconstruct_samples(const NormalSolver &solver, const MeasurementOperator &op, const Vector &y,
                                        const std::vector<double> &schedule, double p, const SolverConfig &cfg,
                                        std::size_t threads = 0);

struct DesignResult {
  std::vector<double> schedule;
  GradientStats stats;
  PatchGrid grid;
  DesignMaps maps;
  ExponentField exponents;
};

/// Draws the lambda schedule, runs the p = 1 and p = 2 sample
/// reconstructions and turns their mean gradients into an exponent field.
DesignResult design_exponents(const NormalSolver &solver, const MeasurementOperator &op, const Vector &y,
                              const DesignHyper &hyper, const SolverConfig &cfg, std::size_t threads = 0);
DesignResult design_exponents(const MeasurementOperator &op, const Vector &y, const DesignHyper &hyper,
                              const SolverConfig &cfg, std::size_t threads = 0);

/// Reconstruction for one exponent field, with lambda picked from a grid by
/// l2 error against the truth (first minimum on ties).
struct MethodOutcome {
  std::string name;
  double lambda_used = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  Signal reconstruction;
  ErrorReport errors;
  std::vector<double> lambdas;
  std::vector<double> l2_by_lambda;
};

MethodOutcome best_over_lambdas(const std::string &name, const NormalSolver &solver, const MeasurementOperator &op,
                                const Vector &y, const ExponentField &p, const std::vector<double> &lambdas,
                                const SolverConfig &cfg, const Signal &truth, std::size_t threads = 0);

struct ExperimentReport {
  Signal truth;
  Vector measurement;
  double snr_db = 0.0;
  DesignResult design;
  MethodOutcome proposed;
  MethodOutcome tv;
  MethodOutcome tikhonov;

  /// (baseline - proposed) / baseline for the l1 and l2 errors.
  double l1_improvement_vs_tv() const { return improvement(tv.errors.l1, proposed.errors.l1); }
  double l2_improvement_vs_tv() const { return improvement(tv.errors.l2, proposed.errors.l2); }
  double l1_improvement_vs_tikhonov() const { return improvement(tikhonov.errors.l1, proposed.errors.l1); }
  double l2_improvement_vs_tikhonov() const { return improvement(tikhonov.errors.l2, proposed.errors.l2); }
};

/// Noisy partial measurement of the truth named by the config.
Vector simulate_measurement(const MeasurementOperator &op, const Signal &truth, const MeasurementSpec &spec);

/// Full experiment without touching the filesystem.
ExperimentReport run_experiment(const ExperimentConfig &cfg);

/// lambda_schedule.csv, classmap.csv, exponents.csv (patch layout),
/// exponents_full.csv (per component), patches.csv and, in 2D, PGM renderings.
void write_design_artifacts(const std::filesystem::path &dir, const DesignResult &design);

/// Writes truth, measurement, mask, design maps, reconstructions, error maps,
/// errors.json, summary.json and config.echo into `dir`. Same report, same bytes.
void write_artifacts(const std::filesystem::path &dir, const ExperimentConfig &cfg, const MeasurementOperator &op,
                     const ExperimentReport &report);

/// run_experiment followed by write_artifacts into cfg.output_dir.
ExperimentReport run_and_write(const ExperimentConfig &cfg);

} // namespace inhomlp
