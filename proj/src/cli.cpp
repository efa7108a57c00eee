#include "inhomlp/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "inhomlp/array_io.hpp"
#include "inhomlp/config.hpp"
#include "inhomlp/errors.hpp"
#include "inhomlp/pipeline.hpp"
#include "inhomlp/synth.hpp"

namespace inhomlp {

namespace {

struct SolverOptions {
  double rho = 1.0;
  double rho_per_lambda = 0.0;
  std::size_t max_iter = 2000;
  double tol = 1e-6;

  void attach(CLI::App *app) {
    app->add_option("--rho", rho, "ADMM penalty")->capture_default_str();
    app->add_option("--rho-per-lambda", rho_per_lambda, "if positive, penalty = max(rho, this * lambda)")
        ->capture_default_str();
    app->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str();
    app->add_option("--tol", tol, "primal and dual tolerance")->capture_default_str();
  }

  SolverConfig config() const {
    SolverConfig c;
    c.rho = rho;
    c.rho_per_lambda = rho_per_lambda;
    c.max_iter = max_iter;
    c.tol_primal = tol;
    c.tol_dual = tol;
    c.validate();
    return c;
  }
};

int cmd_generate(const std::string &signal, std::size_t n, const std::string &image, const std::string &out_path,
                 const std::string &pgm, std::ostream &out) {
  std::optional<Signal> s;
  if (signal == "builtin-1d")
    s = make_signal_1d(n);
  else if (signal == "builtin-2d")
    s = make_signal_2d(n);
  else {
    if (image.empty())
      throw InvalidInputError("--signal image needs --image");
    s = load_image(image);
  }
  write_signal_csv(out_path, *s);
  if (!pgm.empty())
    render_pgm(pgm, *s);
  out << "wrote " << s->shape().to_string() << " signal to " << out_path << '\n';
  return 0;
}

int cmd_measure(const std::string &truth_path, const std::string &mask, double sigma, std::uint64_t seed,
                const std::string &out_path, const std::string &mask_out, std::ostream &out) {
  if (!(sigma >= 0.0))
    throw InvalidInputError("--sigma must be non-negative");
  const Signal truth = read_signal_csv(truth_path);
  const MeasurementOperator op = make_operator(mask, truth.shape());
  const Vector clean = forward_apply(op, truth);
  const Vector y = add_noise(clean, NoiseSpec{sigma, seed});
  write_vector_csv(out_path, y);
  if (!mask_out.empty()) {
    if (op.kind() != OperatorKind::PartialFourier)
      throw InvalidInputError("--mask-out needs a Fourier mask rule");
    write_mask_file(mask_out, op.signal_shape(), op.selection());
  }
  out << "wrote " << y.size() << " measurements to " << out_path;
  if (sigma > 0.0)
    out << " (SNR " << format_double(snr_db(clean, sigma)) << " dB)";
  out << '\n';
  return 0;
}

int cmd_reconstruct(const std::string &meas, const std::string &shape_text, const std::string &mask,
                    std::optional<double> p, const std::string &exponents_path, double lambda,
                    const SolverOptions &opts, const std::string &out_path, const std::string &diagnostics,
                    const std::string &pgm, std::ostream &out) {
  const Shape shape = Shape::parse(shape_text);
  const MeasurementOperator op = make_operator(mask, shape);
  const Vector y = read_vector_csv(meas);
  if (static_cast<std::size_t>(y.size()) != op.output_size())
    throw DimensionError("measurement has " + std::to_string(y.size()) + " entries, mask rule gives " +
                         std::to_string(op.output_size()));
  if (p.has_value() == !exponents_path.empty())
    throw InvalidInputError("give exactly one of --p and --exponents");
  const ExponentField field = p ? ExponentField::homogeneous(shape.size(), *p)
                                : ExponentField(read_vector_csv(exponents_path));
  if (field.size() != shape.size())
    throw DimensionError("exponent field has " + std::to_string(field.size()) + " entries, expected " +
                         std::to_string(shape.size()));
  SolverConfig cfg = opts.config();
  cfg.lambda = lambda;
  cfg.record_objective = !diagnostics.empty();
  cfg.validate();
  const ReconstructionResult result = admm_solve(op, y, field, cfg);
  write_signal_csv(out_path, result.u_hat);
  if (!diagnostics.empty())
    write_diagnostics_csv(diagnostics, result);
  if (!pgm.empty())
    render_pgm(pgm, result.u_hat);
  out << (result.converged ? "converged" : "stopped at max_iter") << " after " << result.iterations
      << " iterations; wrote " << out_path << '\n';
  return 0;
}

int cmd_design(const std::string &meas, const std::string &shape_text, const std::string &mask,
               const DesignHyper &hyper, const SolverOptions &opts, std::size_t threads, const std::string &out_dir,
               std::ostream &out) {
  hyper.validate();
  const Shape shape = Shape::parse(shape_text);
  const MeasurementOperator op = make_operator(mask, shape);
  const Vector y = read_vector_csv(meas);
  if (static_cast<std::size_t>(y.size()) != op.output_size())
    throw DimensionError("measurement has " + std::to_string(y.size()) + " entries, mask rule gives " +
                         std::to_string(op.output_size()));
  const DesignResult design = design_exponents(op, y, hyper, opts.config(), threads);
  write_design_artifacts(out_dir, design);
  std::size_t counts[3] = {0, 0, 0};
  for (PatchClass c : design.maps.classes.labels)
    ++counts[static_cast<int>(c)];
  out << "patches: " << design.grid.count() << " (discontinuity " << counts[0] << ", oscillation " << counts[1]
      << ", smooth " << counts[2] << "); wrote " << out_dir << '\n';
  return 0;
}

int cmd_run(const std::string &config_path, const std::string &output_dir, std::optional<std::size_t> threads,
            std::ostream &out) {
  ExperimentConfig cfg = ExperimentConfig::load(config_path);
  if (!output_dir.empty())
    cfg.output_dir = output_dir;
  if (threads)
    cfg.threads = *threads;
  const ExperimentReport r = run_and_write(cfg);
  out << "proposed  l1 " << format_double(r.proposed.errors.l1) << "  l2 " << format_double(r.proposed.errors.l2)
      << "  lambda " << format_double(r.proposed.lambda_used) << '\n'
      << "tv        l1 " << format_double(r.tv.errors.l1) << "  l2 " << format_double(r.tv.errors.l2) << "  lambda "
      << format_double(r.tv.lambda_used) << '\n'
      << "tikhonov  l1 " << format_double(r.tikhonov.errors.l1) << "  l2 " << format_double(r.tikhonov.errors.l2)
      << "  lambda " << format_double(r.tikhonov.lambda_used) << '\n'
      << "l1 improvement vs tv " << format_double(r.l1_improvement_vs_tv()) << ", vs tikhonov "
      << format_double(r.l1_improvement_vs_tikhonov()) << '\n'
      << "wrote " << cfg.output_dir.string() << '\n';
  return 0;
}

int cmd_report(const std::string &truth_path, const std::vector<std::string> &recons, const std::string &json_out,
               std::ostream &out) {
  const Signal truth = read_signal_csv(truth_path);
  nlohmann::ordered_json j;
  for (const std::string &item : recons) {
    const auto eq = item.find('=');
    const std::string name = eq == std::string::npos ? std::filesystem::path(item).stem().string() : item.substr(0, eq);
    const std::string path = eq == std::string::npos ? item : item.substr(eq + 1);
    const Signal u = read_signal_csv(path);
    if (!(u.shape() == truth.shape()))
      throw DimensionError(path + " has shape " + u.shape().to_string() + ", truth has " + truth.shape().to_string());
    const ErrorReport e = error_metrics(u, truth);
    j[name] = {{"l1", e.l1}, {"l2", e.l2}, {"l1_relative", e.l1_relative}, {"l2_relative", e.l2_relative}};
  }
  const std::string text = j.dump(2) + "\n";
  if (json_out.empty()) {
    out << text;
  } else {
    std::ofstream f(json_out, std::ios::binary);
    if (!f)
      throw IoError("cannot write " + json_out);
    f << text;
    out << "wrote " << json_out << '\n';
  }
  return 0;
}

} // namespace

int execute_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Inhomogeneous lp regularization for partial Fourier reconstruction"};
  app.require_subcommand(1);

  std::string signal = "builtin-1d", image, out_path, pgm;
  std::size_t n = 200;
  auto *gen = app.add_subcommand("generate", "write a signal as CSV");
  gen->add_option("--signal", signal, "builtin-1d, builtin-2d or image")
      ->check(CLI::IsMember({"builtin-1d", "builtin-2d", "image"}))
      ->capture_default_str();
  gen->add_option("--n", n, "grid points per axis")->capture_default_str();
  gen->add_option("--image", image, "PGM (P5) file for --signal image");
  gen->add_option("--out", out_path, "output CSV")->required();
  gen->add_option("--pgm", pgm, "optional PGM rendering");

  std::string truth_path, mask, mask_out;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  auto *meas = app.add_subcommand("measure", "simulate a noisy partial Fourier measurement");
  meas->add_option("--truth", truth_path, "truth CSV")->required();
  meas->add_option("--mask", mask, "mask rule")->required();
  meas->add_option("--sigma", sigma, "noise standard deviation")->capture_default_str();
  meas->add_option("--seed", seed, "noise seed")->capture_default_str();
  meas->add_option("--out", out_path, "measurement CSV")->required();
  meas->add_option("--mask-out", mask_out, "write the selected frequencies");

  std::string meas_path, shape_text, exponents_path, diagnostics;
  std::optional<double> p;
  double lambda = 1.0;
  SolverOptions solver_opts;
  auto *rec = app.add_subcommand("reconstruct", "one ADMM reconstruction");
  rec->add_option("--measurement", meas_path, "measurement CSV")->required();
  rec->add_option("--shape", shape_text, "N or RxC")->required();
  rec->add_option("--mask", mask, "mask rule")->required();
  rec->add_option("--p", p, "homogeneous exponent");
  rec->add_option("--exponents", exponents_path, "per-component exponent CSV");
  rec->add_option("--lambda", lambda, "regularization weight")->required();
  rec->add_option("--out", out_path, "reconstruction CSV")->required();
  rec->add_option("--diagnostics", diagnostics, "per-iteration residual CSV");
  rec->add_option("--pgm", pgm, "optional PGM rendering");
  solver_opts.attach(rec);

  DesignHyper hyper;
  std::string nghd_1d = "single-max", out_dir;
  std::size_t threads = 0;
  auto *des = app.add_subcommand("design", "design the exponent field from a measurement");
  des->add_option("--measurement", meas_path, "measurement CSV")->required();
  des->add_option("--shape", shape_text, "N or RxC")->required();
  des->add_option("--mask", mask, "mask rule")->required();
  des->add_option("--K", hyper.patch_size, "patch size")->capture_default_str();
  des->add_option("--eps", hyper.eps_var, "variance threshold")->capture_default_str();
  des->add_option("--nghd", hyper.n_nghd, "neighbourhood size")->capture_default_str();
  des->add_option("--c", hyper.c, "exponent curve steepness")->capture_default_str();
  des->add_option("--samples", hyper.samples, "sample reconstructions per exponent")->capture_default_str();
  des->add_option("--seed", hyper.seed, "lambda schedule seed")->capture_default_str();
  des->add_option("--nghd-1d", nghd_1d, "single-max or min-of-sides")
      ->check(CLI::IsMember({"single-max", "min-of-sides"}))
      ->capture_default_str();
  des->add_option("--threads", threads, "worker threads (0: all cores)")->capture_default_str();
  des->add_option("--out-dir", out_dir, "output directory")->required();
  solver_opts.attach(des);

  std::string config_path, run_out;
  std::optional<std::size_t> run_threads;
  auto *run = app.add_subcommand("run", "full experiment from a config file");
  run->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", run_out, "override output_dir");
  run->add_option("--threads", run_threads, "override threads");

  std::vector<std::string> recons;
  std::string json_out;
  auto *rep = app.add_subcommand("report", "error metrics against a truth");
  rep->add_option("--truth", truth_path, "truth CSV")->required();
  rep->add_option("--recon", recons, "[name=]path, repeatable")->required();
  rep->add_option("--out", json_out, "JSON output (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*gen)
      return cmd_generate(signal, n, image, out_path, pgm, out);
    if (*meas)
      return cmd_measure(truth_path, mask, sigma, seed, out_path, mask_out, out);
    if (*rec)
      return cmd_reconstruct(meas_path, shape_text, mask, p, exponents_path, lambda, solver_opts, out_path,
                             diagnostics, pgm, out);
    if (*des) {
      hyper.nghd_1d = nghd_1d == "single-max" ? NghdMode1D::SingleMax : NghdMode1D::MinOfSides;
      return cmd_design(meas_path, shape_text, mask, hyper, solver_opts, threads, out_dir, out);
    }
    if (*run)
      return cmd_run(config_path, run_out, run_threads, out);
    if (*rep)
      return cmd_report(truth_path, recons, json_out, out);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

} // namespace inhomlp
