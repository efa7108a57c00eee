#include "inhomlp/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include "inhomlp/array_io.hpp"
#include "inhomlp/errors.hpp"
#include "inhomlp/operators.hpp"
#include "inhomlp/synth.hpp"

namespace inhomlp {

using Index = Eigen::Index;

PatchGrid::PatchGrid(const Shape &shape, std::size_t k) : shape_(shape), k_(k) {
  if (k == 0)
    throw InvalidSizeError("patch size must be at least 1");
  if (k > shape.cols() || (shape.is_2d() && k > shape.rows()))
    throw InvalidSizeError("patch size " + std::to_string(k) + " exceeds a dimension of shape " + shape.to_string());
  patch_cols_ = (shape.cols() + k - 1) / k;
  patch_rows_ = shape.is_2d() ? (shape.rows() + k - 1) / k : 1;
  patches_.resize(patch_rows_ * patch_cols_);
  owner_.resize(shape.size());
  for (std::size_t r = 0; r < shape.rows(); ++r) {
    for (std::size_t c = 0; c < shape.cols(); ++c) {
      const std::size_t pr = shape.is_2d() ? r / k : 0;
      const std::size_t j = pr * patch_cols_ + c / k;
      const std::size_t i = r * shape.cols() + c;
      patches_[j].push_back(i);
      owner_[i] = j;
    }
  }
}

PatchGrid build_patch_grid(const Shape &shape, std::size_t k) { return PatchGrid(shape, k); }

const char *to_string(PatchClass c) {
  switch (c) {
  case PatchClass::Discontinuity:
    return "discontinuity";
  case PatchClass::Oscillation:
    return "oscillation";
  case PatchClass::Smooth:
    return "smooth";
  }
  return "unknown";
}

void DesignHyper::validate() const {
  if (patch_size == 0)
    throw InvalidInputError("patch size K must be at least 1");
  if (!(eps_var > 0.0 && eps_var < 1.0))
    throw InvalidInputError("variance threshold must lie in (0, 1)");
  if (n_nghd == 0)
    throw InvalidInputError("neighbourhood size must be at least 1");
  if (!(c > 0.0))
    throw InvalidInputError("exponent-curve constant c must be positive");
  if (samples < 2)
    throw InvalidInputError("sample count C must be at least 2");
  if (!(lambda_lo > 0.0 && lambda_lo < lambda_hi))
    throw InvalidInputError("lambda bounds need 0 < lambda_lo < lambda_hi");
  if (!(ratio_lo >= 1.0 && ratio_lo <= ratio_hi && ratio_lo <= lambda_hi / lambda_lo))
    throw InvalidInputError("interval ratio bounds need 1 <= ratio_lo <= ratio_hi and ratio_lo <= lambda_hi / lambda_lo");
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi >= lo))
    throw InvalidInputError("log_spaced needs 0 < lo <= hi");
  std::vector<double> out(count);
  if (count == 0)
    return out;
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> lambda_schedule(const DesignHyper &hyper) {
  hyper.validate();
  std::mt19937_64 gen(hyper.seed);
  const double lg_lo = std::log10(hyper.lambda_lo);
  const double lg_hi = std::log10(hyper.lambda_hi);
  const double r_lo = std::log10(hyper.ratio_lo);
  const double r_hi = std::min(std::log10(hyper.ratio_hi), lg_hi - lg_lo);
  const double r = std::uniform_real_distribution<double>(r_lo, r_hi)(gen);
  const double a = std::uniform_real_distribution<double>(lg_lo, lg_hi - r)(gen);
  auto values = log_spaced(std::pow(10.0, a), std::pow(10.0, a + r), hyper.samples);
  for (auto &v : values)
    v = std::clamp(v, hyper.lambda_lo, hyper.lambda_hi);
  return values;
}

namespace {

// Mean of per-sample gradients, summed per component in sorted order so the
// result does not depend on the order of the samples.
GradientField mean_gradient(const std::vector<Signal> &samples) {
  const Shape shape = samples.front().shape();
  const auto m = static_cast<Index>(shape.gradient_size());
  std::vector<Vector> grads;
  grads.reserve(samples.size());
  for (const auto &s : samples) {
    if (!(s.shape() == shape))
      throw InvalidInputError("gradient_stats: samples have different shapes");
    Vector g;
    gradient_apply(shape, s.values(), g);
    grads.push_back(std::move(g));
  }
  Vector mean(m);
  std::vector<double> column(samples.size());
  for (Index i = 0; i < m; ++i) {
    for (std::size_t s = 0; s < grads.size(); ++s)
      column[s] = grads[s][i];
    std::sort(column.begin(), column.end());
    double acc = 0.0;
    for (double x : column)
      acc += x;
    mean[i] = acc / static_cast<double>(column.size());
  }
  return GradientField(shape, std::move(mean));
}

} // namespace

GradientStats gradient_stats(const std::vector<Signal> &samples_tv, const std::vector<Signal> &samples_tik) {
  if (samples_tv.empty() || samples_tik.empty())
    throw InvalidInputError("gradient_stats needs at least one sample in each list");
  if (!(samples_tv.front().shape() == samples_tik.front().shape()))
    throw InvalidInputError("gradient_stats: TV and Tikhonov samples have different shapes");
  GradientField g1 = mean_gradient(samples_tv);
  GradientField g2 = mean_gradient(samples_tik);
  Vector m1 = g1.magnitudes();
  Vector m2 = g2.magnitudes();
  return GradientStats{std::move(g1), std::move(g2), std::move(m1), std::move(m2)};
}

namespace {

void check_pool_input(const Vector &g, const PatchGrid &grid) {
  if (static_cast<std::size_t>(g.size()) != grid.shape().size())
    throw DimensionError("pooling input length " + std::to_string(g.size()) + " does not match patch grid of " +
                         grid.shape().to_string());
}

} // namespace

PoolingMap variance_pool(const Vector &g, const PatchGrid &grid) {
  check_pool_input(g, grid);
  Vector out(static_cast<Index>(grid.count()));
  for (std::size_t j = 0; j < grid.count(); ++j) {
    const auto &idx = grid.indices(j);
    double sq = 0.0, ab = 0.0;
    for (std::size_t i : idx) {
      const double x = g[static_cast<Index>(i)];
      sq += x * x;
      ab += std::abs(x);
    }
    const double n = static_cast<double>(idx.size());
    const double mean_abs = ab / n;
    // Cancellation can leave a tiny negative value for constant patches.
    out[static_cast<Index>(j)] = std::max(0.0, sq / n - mean_abs * mean_abs);
  }
  return PoolingMap{std::move(out), PoolingKind::Variance};
}

PoolingMap average_pool(const Vector &g, const PatchGrid &grid) {
  check_pool_input(g, grid);
  Vector out(static_cast<Index>(grid.count()));
  for (std::size_t j = 0; j < grid.count(); ++j) {
    const auto &idx = grid.indices(j);
    double ab = 0.0;
    for (std::size_t i : idx)
      ab += std::abs(g[static_cast<Index>(i)]);
    out[static_cast<Index>(j)] = ab / static_cast<double>(idx.size());
  }
  return PoolingMap{std::move(out), PoolingKind::Average};
}

PoolingMap minmax_normalize(const PoolingMap &map) {
  PoolingMap out{map.values, PoolingKind::Normalized};
  if (map.values.size() == 0)
    return out;
  const double lo = map.values.minCoeff();
  const double hi = map.values.maxCoeff();
  if (!(hi > lo)) {
    out.values.setZero();
    return out;
  }
  out.values = ((map.values.array() - lo) / (hi - lo)).matrix();
  return out;
}

PoolingMap nghd_filter(const PoolingMap &vmap, const PatchGrid &grid, std::size_t n, NghdMode1D mode_1d) {
  if (n == 0)
    throw InvalidInputError("neighbourhood size must be at least 1");
  if (static_cast<std::size_t>(vmap.values.size()) != grid.count())
    throw DimensionError("nghd_filter: map does not match patch grid");
  const auto rows = static_cast<long>(grid.patch_rows());
  const auto cols = static_cast<long>(grid.patch_cols());
  const auto value = [&](long i, long j) { return vmap.values[static_cast<Index>(i * cols + j)]; };
  const auto inside = [&](long i, long j) { return i >= 0 && i < rows && j >= 0 && j < cols; };
  const long reach = static_cast<long>(n);
  constexpr double none = -std::numeric_limits<double>::infinity();

  // Max of v over (i + s k di, j + s k dj), k = 1..n, for the given signs.
  const auto ray_max = [&](long i, long j, long di, long dj, std::initializer_list<long> signs) {
    double best = none;
    for (long s : signs)
      for (long k = 1; k <= reach; ++k) {
        const long a = i + s * k * di, b = j + s * k * dj;
        if (inside(a, b))
          best = std::max(best, value(a, b));
      }
    return best;
  };

  PoolingMap out{Vector::Zero(vmap.values.size()), PoolingKind::Normalized};
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      double result = none;
      if (!grid.shape().is_2d()) {
        if (mode_1d == NghdMode1D::SingleMax) {
          result = ray_max(i, j, 0, 1, {-1, 1});
        } else {
          const double left = ray_max(i, j, 0, 1, {-1});
          const double right = ray_max(i, j, 0, 1, {1});
          if (left == none)
            result = right;
          else if (right == none)
            result = left;
          else
            result = std::min(left, right);
        }
      } else {
        constexpr long dirs[4][2] = {{0, 1}, {1, 0}, {1, 1}, {-1, 1}};
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto &d : dirs) {
          const double mx = ray_max(i, j, d[0], d[1], {-1, 1});
          if (mx != none)
            lowest = std::min(lowest, mx);
        }
        if (lowest != std::numeric_limits<double>::infinity())
          result = lowest;
      }
      out.values[static_cast<Index>(i * cols + j)] = result == none ? 0.0 : result;
    }
  }
  return out;
}

ClassMap classify_patches(const PoolingMap &var1n, const PoolingMap &var2n, const PoolingMap &filt1,
                          const PoolingMap &filt2, double eps_var) {
  const auto count = var1n.values.size();
  if (var2n.values.size() != count || filt1.values.size() != count || filt2.values.size() != count)
    throw DimensionError("classify_patches: maps do not share a patch grid");
  ClassMap out;
  out.labels.resize(static_cast<std::size_t>(count));
  for (Index j = 0; j < count; ++j) {
    const bool g1 = var1n.values[j] >= eps_var && filt1.values[j] < eps_var;
    const bool g2 = var2n.values[j] >= eps_var && filt2.values[j] >= eps_var;
    PatchClass c = PatchClass::Smooth;
    if (g1 && !g2)
      c = PatchClass::Discontinuity;
    else if (g2 && !g1)
      c = PatchClass::Oscillation;
    out.labels[static_cast<std::size_t>(j)] = c;
  }
  return out;
}

double exponent_curve(double normalized_average, double c) { return 2.0 - std::exp(-c * normalized_average); }

Vector patch_exponents(const ClassMap &classes, const PoolingMap &avg1n, const PoolingMap &avg2n, double c) {
  if (!(c > 0.0))
    throw InvalidInputError("exponent-curve constant c must be positive");
  const auto count = static_cast<Index>(classes.labels.size());
  if (avg1n.values.size() != count || avg2n.values.size() != count)
    throw DimensionError("assign_exponents: maps do not share a patch grid");
  Vector q(count);
  for (Index j = 0; j < count; ++j) {
    switch (classes.labels[static_cast<std::size_t>(j)]) {
    case PatchClass::Discontinuity:
      q[j] = 1.0;
      break;
    case PatchClass::Smooth:
      q[j] = exponent_curve(avg1n.values[j], c);
      break;
    case PatchClass::Oscillation:
      q[j] = exponent_curve(avg2n.values[j], c);
      break;
    }
  }
  return q;
}

ExponentField assign_exponents(const ClassMap &classes, const PoolingMap &avg1n, const PoolingMap &avg2n, double c,
                               const PatchGrid &grid) {
  if (classes.labels.size() != grid.count())
    throw DimensionError("assign_exponents: class map does not match patch grid");
  const Vector q = patch_exponents(classes, avg1n, avg2n, c);
  Vector p(static_cast<Index>(grid.shape().size()));
  for (std::size_t i = 0; i < grid.shape().size(); ++i)
    p[static_cast<Index>(i)] = q[static_cast<Index>(grid.patch_of(i))];
  return ExponentField(std::move(p));
}

DesignMaps design_from_stats(const GradientStats &stats, const PatchGrid &grid, const DesignHyper &hyper) {
  DesignMaps d;
  d.var1 = variance_pool(stats.g1_magnitude, grid);
  d.var2 = variance_pool(stats.g2_magnitude, grid);
  d.var1n = minmax_normalize(d.var1);
  d.var2n = minmax_normalize(d.var2);
  d.filt1 = nghd_filter(d.var1n, grid, hyper.n_nghd, hyper.nghd_1d);
  d.filt2 = nghd_filter(d.var2n, grid, hyper.n_nghd, hyper.nghd_1d);
  d.classes = classify_patches(d.var1n, d.var2n, d.filt1, d.filt2, hyper.eps_var);
  d.avg1n = minmax_normalize(average_pool(stats.g1_magnitude, grid));
  d.avg2n = minmax_normalize(average_pool(stats.g2_magnitude, grid));
  d.patch_exponents = patch_exponents(d.classes, d.avg1n, d.avg2n, hyper.c);
  return d;
}

void write_patch_csv(const std::filesystem::path &path, const PatchGrid &grid, const Vector &per_patch) {
  if (static_cast<std::size_t>(per_patch.size()) != grid.count())
    throw DimensionError("write_patch_csv: values do not match patch grid");
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < grid.patch_rows(); ++i) {
    for (std::size_t j = 0; j < grid.patch_cols(); ++j) {
      const double v = per_patch[static_cast<Index>(i * grid.patch_cols() + j)];
      if (grid.shape().is_2d()) {
        if (j)
          out << ',';
        out << format_double(v);
      } else {
        out << format_double(v) << '\n';
      }
    }
    if (grid.shape().is_2d())
      out << '\n';
  }
  if (!out)
    throw IoError("failed writing " + path.string());
}

void write_classmap_csv(const std::filesystem::path &path, const PatchGrid &grid, const ClassMap &classes) {
  Vector codes(static_cast<Index>(classes.labels.size()));
  for (std::size_t j = 0; j < classes.labels.size(); ++j)
    codes[static_cast<Index>(j)] = static_cast<double>(classes.labels[j]);
  write_patch_csv(path, grid, codes);
}

void render_classmap_pgm(const std::filesystem::path &path, const PatchGrid &grid, const ClassMap &classes) {
  Vector px(static_cast<Index>(grid.shape().size()));
  for (std::size_t i = 0; i < grid.shape().size(); ++i)
    px[static_cast<Index>(i)] = 127.5 * static_cast<double>(classes.labels.at(grid.patch_of(i)));
  save_image(path, Signal(grid.shape(), std::move(px)));
}

void render_exponents_pgm(const std::filesystem::path &path, const PatchGrid &grid, const ExponentField &p) {
  Vector px = 255.0 * (p.values().array() - 1.0).matrix();
  save_image(path, Signal(grid.shape(), std::move(px)));
}

} // namespace inhomlp
