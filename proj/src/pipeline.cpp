#include "inhomlp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "inhomlp/array_io.hpp"
#include "inhomlp/errors.hpp"

namespace inhomlp {

namespace {

std::size_t resolve_threads(std::size_t threads, std::size_t count) {
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(threads, count));
}

nlohmann::ordered_json errors_json(const MethodOutcome &m) {
  nlohmann::ordered_json j;
  j["l1"] = m.errors.l1;
  j["l2"] = m.errors.l2;
  j["l1_relative"] = m.errors.l1_relative;
  j["l2_relative"] = m.errors.l2_relative;
  j["lambda_used"] = m.lambda_used;
  j["iterations"] = m.iterations;
  j["converged"] = m.converged;
  j["lambdas"] = m.lambdas;
  j["l2_by_lambda"] = m.l2_by_lambda;
  return j;
}

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << text;
  if (!out)
    throw IoError("write failed for " + path.string());
}

} // namespace

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)> &task) {
  if (count == 0)
    return;
  const std::size_t workers = resolve_threads(threads, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i)
      task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::size_t first_index = count;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      if (failed.load())
        return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count)
        return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < first_index) {
          first_index = i;
          first = std::current_exception();
        }
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t)
    pool.emplace_back(worker);
  for (auto &t : pool)
    t.join();
  if (first)
    std::rethrow_exception(first);
}

namespace {

// The shared factorization serves every lambda unless the penalty follows lambda.
ReconstructionResult solve_one(const NormalSolver &shared, const MeasurementOperator &op, const Vector &y,
                               const ExponentField &p, const SolverConfig &cfg) {
  if (cfg.rho_per_lambda > 0.0)
    return admm_solve(op, y, p, cfg);
  return admm_solve(shared, op, y, p, cfg);
}

} // namespace

std::vector<Signal> reconstruct_samples(const NormalSolver &solver, const MeasurementOperator &op, const Vector &y,
                                        const std::vector<double> &schedule, double p, const SolverConfig &cfg,
                                        std::size_t threads) {
  if (schedule.empty())
    throw InvalidInputError("reconstruct_samples: empty lambda schedule");
  const ExponentField field = ExponentField::homogeneous(op.signal_shape().size(), p);
  std::vector<Signal> out(schedule.size(), Signal::zeros(op.signal_shape()));
  parallel_for(schedule.size(), threads, [&](std::size_t i) {
    SolverConfig c = cfg;
    c.lambda = schedule[i];
    c.record_objective = false;
    try {
      out[i] = solve_one(solver, op, y, field, c).u_hat;
    } catch (const std::exception &e) {
      throw Error("sample reconstruction with p=" + format_double(p) + " failed at lambda=" +
                  format_double(schedule[i]) + ": " + e.what());
    }
  });
  return out;
}

DesignResult design_exponents(const NormalSolver &solver, const MeasurementOperator &op, const Vector &y,
                              const DesignHyper &hyper, const SolverConfig &cfg, std::size_t threads) {
  hyper.validate();
  std::vector<double> schedule = lambda_schedule(hyper);
  // Both exponents share one pool so a single run keeps every worker busy.
  std::vector<double> doubled = schedule;
  doubled.insert(doubled.end(), schedule.begin(), schedule.end());
  const std::size_t c = schedule.size();
  const ExponentField tv = ExponentField::homogeneous(op.signal_shape().size(), 1.0);
  const ExponentField tik = ExponentField::homogeneous(op.signal_shape().size(), 2.0);
  std::vector<Signal> all(2 * c, Signal::zeros(op.signal_shape()));
  parallel_for(2 * c, threads, [&](std::size_t i) {
    SolverConfig sc = cfg;
    sc.lambda = doubled[i];
    sc.record_objective = false;
    const bool first_half = i < c;
    try {
      all[i] = solve_one(solver, op, y, first_half ? tv : tik, sc).u_hat;
    } catch (const std::exception &e) {
      throw Error(std::string("sample reconstruction with p=") + (first_half ? "1" : "2") + " failed at lambda=" +
                  format_double(doubled[i]) + ": " + e.what());
    }
  });
  std::vector<Signal> samples_tv(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(c));
  std::vector<Signal> samples_tik(all.begin() + static_cast<std::ptrdiff_t>(c), all.end());

  GradientStats stats = gradient_stats(samples_tv, samples_tik);
  PatchGrid grid(op.signal_shape(), hyper.patch_size);
  DesignMaps maps = design_from_stats(stats, grid, hyper);
  ExponentField exponents = assign_exponents(maps.classes, maps.avg1n, maps.avg2n, hyper.c, grid);
  return DesignResult{std::move(schedule), std::move(stats), std::move(grid), std::move(maps), std::move(exponents)};
}

DesignResult design_exponents(const MeasurementOperator &op, const Vector &y, const DesignHyper &hyper,
                              const SolverConfig &cfg, std::size_t threads) {
  const NormalSolver solver = admm_normal_solver(op, cfg.rho);
  return design_exponents(solver, op, y, hyper, cfg, threads);
}

MethodOutcome best_over_lambdas(const std::string &name, const NormalSolver &solver, const MeasurementOperator &op,
                                const Vector &y, const ExponentField &p, const std::vector<double> &lambdas,
                                const SolverConfig &cfg, const Signal &truth, std::size_t threads) {
  if (lambdas.empty())
    throw InvalidInputError("lambda grid for " + name + " is empty");
  if (!(truth.shape() == op.signal_shape()))
    throw DimensionError("truth shape " + truth.shape().to_string() + " does not match operator shape " +
                         op.signal_shape().to_string());
  std::vector<std::optional<ReconstructionResult>> runs(lambdas.size());
  parallel_for(lambdas.size(), threads, [&](std::size_t i) {
    SolverConfig c = cfg;
    c.lambda = lambdas[i];
    c.record_objective = false;
    try {
      runs[i].emplace(solve_one(solver, op, y, p, c));
    } catch (const std::exception &e) {
      throw Error(name + " reconstruction failed at lambda=" + format_double(lambdas[i]) + ": " + e.what());
    }
  });
  std::vector<double> l2(lambdas.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    l2[i] = (runs[i]->u_hat.values() - truth.values()).norm();
    if (l2[i] < l2[best])
      best = i;
  }
  const ReconstructionResult &r = *runs[best];
  ErrorReport errors = error_metrics(r.u_hat, truth);
  return MethodOutcome{name, lambdas[best], r.iterations, r.converged, r.u_hat, errors, lambdas, l2};
}

Vector simulate_measurement(const MeasurementOperator &op, const Signal &truth, const MeasurementSpec &spec) {
  return add_noise(forward_apply(op, truth), NoiseSpec{spec.sigma, spec.seed});
}

ExperimentReport run_experiment(const ExperimentConfig &cfg) {
  cfg.validate();
  Signal truth = make_truth(cfg);
  const MeasurementOperator op = make_operator(cfg.measurement.mask, truth.shape(), cfg.base_dir);
  const Vector clean = forward_apply(op, truth);
  Vector y = add_noise(clean, NoiseSpec{cfg.measurement.sigma, cfg.measurement.seed});
  const NormalSolver solver = admm_normal_solver(op, cfg.solver.rho);

  DesignResult design = design_exponents(solver, op, y, cfg.hyper, cfg.solver, cfg.threads);
  const std::size_t m = truth.shape().size();
  MethodOutcome proposed =
      best_over_lambdas("proposed", solver, op, y, design.exponents, cfg.final_lambdas, cfg.solver, truth, cfg.threads);
  MethodOutcome tv = best_over_lambdas("tv", solver, op, y, ExponentField::homogeneous(m, 1.0), cfg.tv_lambdas,
                                       cfg.solver, truth, cfg.threads);
  MethodOutcome tik = best_over_lambdas("tikhonov", solver, op, y, ExponentField::homogeneous(m, 2.0),
                                        cfg.tikhonov_lambdas, cfg.solver, truth, cfg.threads);
  const double snr = snr_db(clean, cfg.measurement.sigma);
  return ExperimentReport{std::move(truth), std::move(y),  snr,          std::move(design),
                          std::move(proposed), std::move(tv), std::move(tik)};
}

void write_design_artifacts(const std::filesystem::path &dir, const DesignResult &design) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const bool two_d = design.grid.shape().is_2d();
  write_vector_csv(dir / "lambda_schedule.csv", Eigen::Map<const Vector>(design.schedule.data(),
                                                                         static_cast<Eigen::Index>(design.schedule.size())));

  const PatchGrid &grid = design.grid;
  const DesignMaps &maps = design.maps;
  write_classmap_csv(dir / "classmap.csv", grid, maps.classes);
  write_patch_csv(dir / "exponents.csv", grid, maps.patch_exponents);
  {
    std::string table = "patch,var1n,var2n,filt1,filt2,avg1n,avg2n,class,exponent\n";
    for (std::size_t j = 0; j < grid.count(); ++j) {
      const auto idx = static_cast<Eigen::Index>(j);
      table += std::to_string(j);
      for (const PoolingMap *map : {&maps.var1n, &maps.var2n, &maps.filt1, &maps.filt2, &maps.avg1n, &maps.avg2n})
        table += ',' + format_double(map->values[idx]);
      table += ',';
      table += to_string(maps.classes.labels[j]);
      table += ',' + format_double(maps.patch_exponents[idx]) + '\n';
    }
    write_text(dir / "patches.csv", table);
  }
  if (two_d) {
    render_classmap_pgm(dir / "classmap.pgm", grid, maps.classes);
    render_exponents_pgm(dir / "exponents.pgm", grid, design.exponents);
  }

  write_vector_csv(dir / "exponents_full.csv", design.exponents.values());
}

void write_artifacts(const std::filesystem::path &dir, const ExperimentConfig &cfg, const MeasurementOperator &op,
                     const ExperimentReport &report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const bool two_d = report.truth.shape().is_2d();

  write_signal_csv(dir / "truth.csv", report.truth);
  write_vector_csv(dir / "measurement.csv", report.measurement);
  if (op.kind() == OperatorKind::PartialFourier)
    write_mask_file(dir / "mask.txt", op.signal_shape(), op.selection());
  write_text(dir / "config.echo", cfg.echo());
  write_design_artifacts(dir, report.design);
  if (two_d)
    render_pgm(dir / "truth.pgm", report.truth);

  const PatchGrid &grid = report.design.grid;
  const DesignMaps &maps = report.design.maps;
  nlohmann::ordered_json errors;
  for (const MethodOutcome *m : {&report.proposed, &report.tv, &report.tikhonov}) {
    write_signal_csv(dir / ("recon_" + m->name + ".csv"), m->reconstruction);
    write_signal_csv(dir / ("error_" + m->name + ".csv"), m->errors.pointwise);
    if (two_d) {
      render_pgm(dir / ("recon_" + m->name + ".pgm"), m->reconstruction);
      render_pgm(dir / ("error_" + m->name + ".pgm"), m->errors.pointwise);
    }
    errors[m->name] = errors_json(*m);
  }
  write_text(dir / "errors.json", errors.dump(2) + "\n");

  std::map<std::string, std::size_t> class_counts{{"discontinuity", 0}, {"oscillation", 0}, {"smooth", 0}};
  for (PatchClass c : maps.classes.labels)
    ++class_counts[to_string(c)];
  nlohmann::ordered_json summary;
  summary["shape"] = report.truth.shape().to_string();
  summary["measurements"] = report.measurement.size();
  summary["sigma"] = cfg.measurement.sigma;
  summary["snr_db"] = std::isfinite(report.snr_db) ? nlohmann::ordered_json(report.snr_db)
                                                   : nlohmann::ordered_json("inf");
  summary["patches"] = grid.count();
  summary["class_counts"] = class_counts;
  summary["improvement"] = {{"l1_vs_tv", report.l1_improvement_vs_tv()},
                            {"l2_vs_tv", report.l2_improvement_vs_tv()},
                            {"l1_vs_tikhonov", report.l1_improvement_vs_tikhonov()},
                            {"l2_vs_tikhonov", report.l2_improvement_vs_tikhonov()}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

ExperimentReport run_and_write(const ExperimentConfig &cfg) {
  ExperimentReport report = run_experiment(cfg);
  const MeasurementOperator op = make_operator(cfg.measurement.mask, report.truth.shape(), cfg.base_dir);
  write_artifacts(cfg.output_dir, cfg, op, report);
  return report;
}

} // namespace inhomlp
