#include "inhomlp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "inhomlp/array_io.hpp"
#include "inhomlp/errors.hpp"
#include "inhomlp/synth.hpp"

namespace inhomlp {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string &text, const std::string &what) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError("invalid number for " + what + ": '" + text + "'");
  return v;
}

std::uint64_t to_uint(const std::string &text, const std::string &what) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError("invalid non-negative integer for " + what + ": '" + text + "'");
  return v;
}

// "<n>" or "<pct>%" of `total`.
std::size_t count_or_percent(const std::string &text, std::size_t total, const std::string &rule) {
  const std::string t = trim(text);
  if (!t.empty() && t.back() == '%') {
    const double pct = to_double(t.substr(0, t.size() - 1), rule);
    return static_cast<std::size_t>(std::llround(pct / 100.0 * static_cast<double>(total)));
  }
  return static_cast<std::size_t>(to_uint(t, rule));
}

std::string join_lambdas(const std::vector<double> &values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i)
      out += ',';
    out += format_double(values[i]);
  }
  return out;
}

} // namespace

MeasurementOperator make_operator(const std::string &mask_rule, const Shape &shape,
                                  const std::filesystem::path &base_dir) {
  const std::string rule = trim(mask_rule);
  if (rule == "identity")
    return MeasurementOperator::identity(shape);
  const auto colon = rule.find(':');
  if (colon == std::string::npos)
    throw ConfigError("unknown mask rule '" + rule + "'");
  const std::string name = rule.substr(0, colon);
  const std::string arg = rule.substr(colon + 1);
  if (name == "lowpass") {
    if (shape.is_2d())
      throw ConfigError("mask rule 'lowpass' needs a 1D signal; use x-lowpass for images");
    return MeasurementOperator::partial_fourier(shape, lowpass_selection(shape, count_or_percent(arg, shape.cols(), rule)));
  }
  if (name == "x-lowpass" || name == "x-stride") {
    if (!shape.is_2d())
      throw ConfigError("mask rule '" + name + "' needs a 2D signal");
    if (name == "x-lowpass")
      return MeasurementOperator::partial_fourier(shape,
                                                  x_lowpass_selection(shape, count_or_percent(arg, shape.cols(), rule)));
    return MeasurementOperator::partial_fourier(shape, x_stride_selection(shape, to_uint(arg, rule)));
  }
  if (name == "file") {
    std::filesystem::path p = trim(arg);
    if (p.is_relative() && !base_dir.empty())
      p = base_dir / p;
    return MeasurementOperator::partial_fourier(shape, read_mask_file(p, shape));
  }
  throw ConfigError("unknown mask rule '" + rule + "'");
}

std::vector<double> parse_lambda_list(const std::string &text) {
  const std::string t = trim(text);
  std::vector<double> out;
  if (t.rfind("log:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(t.substr(4));
    std::string part;
    while (std::getline(ss, part, ':'))
      parts.push_back(part);
    if (parts.size() != 3)
      throw ConfigError("lambda grid must be log:<lo>:<hi>:<count>, got '" + text + "'");
    const double lo = to_double(parts[0], "lambda grid");
    const double hi = to_double(parts[1], "lambda grid");
    const auto count = to_uint(parts[2], "lambda grid");
    if (!(lo > 0.0 && hi >= lo) || count == 0)
      throw ConfigError("lambda grid needs 0 < lo <= hi and count >= 1");
    return log_spaced(lo, hi, count);
  }
  std::stringstream ss(t);
  std::string part;
  while (std::getline(ss, part, ','))
    out.push_back(to_double(part, "lambda list"));
  return out;
}

void ExperimentConfig::validate() const {
  if (source == SignalSource::Image && !std::filesystem::exists(image_path))
    throw ConfigError("image file " + image_path.string() + " does not exist");
  if (source != SignalSource::Image && grid_size < 2)
    throw ConfigError("grid_size must be at least 2");
  if (!(measurement.sigma >= 0.0))
    throw ConfigError("sigma must be non-negative");
  const std::string rule = trim(measurement.mask);
  if (rule.rfind("file:", 0) == 0) {
    std::filesystem::path p = trim(rule.substr(5));
    if (p.is_relative() && !base_dir.empty())
      p = base_dir / p;
    if (!std::filesystem::exists(p))
      throw ConfigError("mask file " + p.string() + " does not exist");
  }
  if (final_lambdas.empty() || tv_lambdas.empty() || tikhonov_lambdas.empty())
    throw ConfigError("lambda grids must be non-empty");
  for (const auto *grid : {&final_lambdas, &tv_lambdas, &tikhonov_lambdas})
    for (double l : *grid)
      if (!(l > 0.0))
        throw ConfigError("lambda values must be positive");
  try {
    hyper.validate();
    SolverConfig probe = solver;
    probe.validate();
  } catch (const InvalidInputError &e) {
    throw ConfigError(e.what());
  }
}

std::string ExperimentConfig::echo() const {
  std::ostringstream out;
  const char *src = source == SignalSource::Builtin1D ? "builtin-1d"
                    : source == SignalSource::Builtin2D ? "builtin-2d"
                                                        : "image";
  out << "source = " << src << '\n';
  if (source == SignalSource::Image)
    out << "image = " << image_path.string() << '\n';
  out << "grid_size = " << grid_size << '\n'
      << "mask = " << measurement.mask << '\n'
      << "sigma = " << format_double(measurement.sigma) << '\n'
      << "noise_seed = " << measurement.seed << '\n'
      << "K = " << hyper.patch_size << '\n'
      << "eps_var = " << format_double(hyper.eps_var) << '\n'
      << "nghd = " << hyper.n_nghd << '\n'
      << "nghd_1d = " << (hyper.nghd_1d == NghdMode1D::SingleMax ? "single-max" : "min-of-sides") << '\n'
      << "c = " << format_double(hyper.c) << '\n'
      << "samples = " << hyper.samples << '\n'
      << "design_seed = " << hyper.seed << '\n'
      << "lambda_lo = " << format_double(hyper.lambda_lo) << '\n'
      << "lambda_hi = " << format_double(hyper.lambda_hi) << '\n'
      << "ratio_lo = " << format_double(hyper.ratio_lo) << '\n'
      << "ratio_hi = " << format_double(hyper.ratio_hi) << '\n'
      << "rho = " << format_double(solver.rho) << '\n'
      << "rho_per_lambda = " << format_double(solver.rho_per_lambda) << '\n'
      << "max_iter = " << solver.max_iter << '\n'
      << "tol_primal = " << format_double(solver.tol_primal) << '\n'
      << "tol_dual = " << format_double(solver.tol_dual) << '\n'
      << "final_lambdas = " << join_lambdas(final_lambdas) << '\n'
      << "tv_lambdas = " << join_lambdas(tv_lambdas) << '\n'
      << "tikhonov_lambdas = " << join_lambdas(tikhonov_lambdas) << '\n'
      << "output_dir = " << output_dir.string() << '\n';
  return out.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string &text, const std::filesystem::path &base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  const auto resolve = [&](const std::string &value) {
    std::filesystem::path p = value;
    if (p.is_relative() && !base_dir.empty())
      p = base_dir / p;
    return p;
  };
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.resize(hash);
    if (trim(line).empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!seen.emplace(key, line_no).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");

    if (key == "source") {
      if (value == "builtin-1d")
        cfg.source = SignalSource::Builtin1D;
      else if (value == "builtin-2d")
        cfg.source = SignalSource::Builtin2D;
      else if (value == "image")
        cfg.source = SignalSource::Image;
      else
        throw ConfigError("source must be builtin-1d, builtin-2d or image");
    } else if (key == "image") {
      cfg.image_path = resolve(value);
    } else if (key == "grid_size") {
      cfg.grid_size = to_uint(value, key);
    } else if (key == "mask") {
      cfg.measurement.mask = value;
    } else if (key == "sigma") {
      cfg.measurement.sigma = to_double(value, key);
    } else if (key == "noise_seed") {
      cfg.measurement.seed = to_uint(value, key);
    } else if (key == "K") {
      cfg.hyper.patch_size = to_uint(value, key);
    } else if (key == "eps_var") {
      cfg.hyper.eps_var = to_double(value, key);
    } else if (key == "nghd") {
      cfg.hyper.n_nghd = to_uint(value, key);
    } else if (key == "nghd_1d") {
      if (value == "single-max")
        cfg.hyper.nghd_1d = NghdMode1D::SingleMax;
      else if (value == "min-of-sides")
        cfg.hyper.nghd_1d = NghdMode1D::MinOfSides;
      else
        throw ConfigError("nghd_1d must be single-max or min-of-sides");
    } else if (key == "c") {
      cfg.hyper.c = to_double(value, key);
    } else if (key == "samples") {
      cfg.hyper.samples = to_uint(value, key);
    } else if (key == "design_seed") {
      cfg.hyper.seed = to_uint(value, key);
    } else if (key == "lambda_lo") {
      cfg.hyper.lambda_lo = to_double(value, key);
    } else if (key == "lambda_hi") {
      cfg.hyper.lambda_hi = to_double(value, key);
    } else if (key == "ratio_lo") {
      cfg.hyper.ratio_lo = to_double(value, key);
    } else if (key == "ratio_hi") {
      cfg.hyper.ratio_hi = to_double(value, key);
    } else if (key == "rho") {
      cfg.solver.rho = to_double(value, key);
    } else if (key == "rho_per_lambda") {
      cfg.solver.rho_per_lambda = to_double(value, key);
    } else if (key == "max_iter") {
      cfg.solver.max_iter = to_uint(value, key);
    } else if (key == "tol_primal") {
      cfg.solver.tol_primal = to_double(value, key);
    } else if (key == "tol_dual") {
      cfg.solver.tol_dual = to_double(value, key);
    } else if (key == "final_lambdas") {
      cfg.final_lambdas = parse_lambda_list(value);
    } else if (key == "tv_lambdas") {
      cfg.tv_lambdas = parse_lambda_list(value);
    } else if (key == "tikhonov_lambdas") {
      cfg.tikhonov_lambdas = parse_lambda_list(value);
    } else if (key == "output_dir") {
      cfg.output_dir = resolve(value);
    } else if (key == "threads") {
      cfg.threads = to_uint(value, key);
    } else {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

Signal make_truth(const ExperimentConfig &cfg) {
  switch (cfg.source) {
  case SignalSource::Builtin1D:
    return make_signal_1d(cfg.grid_size);
  case SignalSource::Builtin2D:
    return make_signal_2d(cfg.grid_size);
  case SignalSource::Image:
    return load_image(cfg.image_path);
  }
  throw ConfigError("unknown signal source");
}

} // namespace inhomlp
