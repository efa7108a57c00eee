#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "inhomlp/admm.hpp"
#include "inhomlp/signal.hpp"

namespace inhomlp {

/// Non-overlapping K (1D) or K x K (2D) tiling of a signal, row-major over
/// patch coordinates. Trailing remainders form smaller boundary patches.
class PatchGrid {
public:
  PatchGrid(const Shape &shape, std::size_t k);

  const Shape &shape() const noexcept { return shape_; }
  std::size_t patch_size() const noexcept { return k_; }
  std::size_t patch_rows() const noexcept { return patch_rows_; }
  std::size_t patch_cols() const noexcept { return patch_cols_; }
  std::size_t count() const noexcept { return patches_.size(); }

  /// Component indices of patch j.
  const std::vector<std::size_t> &indices(std::size_t j) const { return patches_.at(j); }
  /// Patch that owns component i.
  std::size_t patch_of(std::size_t i) const { return owner_.at(i); }

private:
  Shape shape_;
  std::size_t k_;
  std::size_t patch_rows_ = 1;
  std::size_t patch_cols_ = 0;
  std::vector<std::vector<std::size_t>> patches_;
  std::vector<std::size_t> owner_;
};

PatchGrid build_patch_grid(const Shape &shape, std::size_t k);

enum class PoolingKind { Variance, Average, Normalized };

/// One statistic per patch.
struct PoolingMap {
  Vector values;
  PoolingKind kind = PoolingKind::Variance;
};

enum class PatchClass : std::uint8_t { Discontinuity = 0, Oscillation = 1, Smooth = 2 };

const char *to_string(PatchClass c);

struct ClassMap {
  std::vector<PatchClass> labels;
};

/// How the 1D neighbourhood filter combines the two sides of a patch.
enum class NghdMode1D {
  SingleMax,  ///< max over v_{i-n..i-1} and v_{i+1..i+n} together
  MinOfSides, ///< min(max of left side, max of right side), like the 2D filter
};

struct DesignHyper {
  std::size_t patch_size = 5;
  double eps_var = 1e-2;
  std::size_t n_nghd = 3;
  double c = 27.0;
  std::size_t samples = 200;
  double lambda_lo = 1e-4;
  double lambda_hi = 1e4;
  double ratio_lo = 1e2;
  double ratio_hi = 1e4;
  std::uint64_t seed = 0;
  NghdMode1D nghd_1d = NghdMode1D::SingleMax;

  void validate() const;
};

/// C log-equispaced values from lo to hi inclusive (lo when C = 1).
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// Draws an interval [a, b] inside [lambda_lo, lambda_hi] with b / a in
/// [ratio_lo, ratio_hi]: log10(b / a) uniform, then log10(a) uniform over the
/// admissible range. Returns C log-spaced values on it.
std::vector<double> lambda_schedule(const DesignHyper &hyper);

struct GradientStats {
  GradientField g1;      // mean gradient of the p = 1 reconstructions
  GradientField g2;      // mean gradient of the p = 2 reconstructions
  Vector g1_magnitude;   // per-pixel |g1_i| (isotropic norm in 2D)
  Vector g2_magnitude;
};

GradientStats gradient_stats(const std::vector<Signal> &samples_tv, const std::vector<Signal> &samples_tik);

/// Per patch: mean(g^2) - mean(|g|)^2.
PoolingMap variance_pool(const Vector &g, const PatchGrid &grid);

/// Per patch: mean(|g|).
PoolingMap average_pool(const Vector &g, const PatchGrid &grid);

/// (v - min) / (max - min); all zeros when the map is constant.
PoolingMap minmax_normalize(const PoolingMap &map);

/// Directional neighbourhood filter on a normalized map. 1D: max over the
/// n patches on each side (see NghdMode1D). 2D: min over the horizontal,
/// vertical and two diagonal directions of the max over k = 1..n both ways.
/// Out-of-domain neighbours are dropped, empty directions skipped, and a
/// patch with no neighbours at all gets 0.
PoolingMap nghd_filter(const PoolingMap &vmap, const PatchGrid &grid, std::size_t n,
                       NghdMode1D mode_1d = NghdMode1D::SingleMax);

/// g1-condition: var1n >= eps and filt1 < eps. g2-condition: var2n >= eps and
/// filt2 >= eps. Discontinuity iff only g1 holds, oscillation iff only g2
/// holds, smooth otherwise.
ClassMap classify_patches(const PoolingMap &var1n, const PoolingMap &var2n, const PoolingMap &filt1,
                          const PoolingMap &filt2, double eps_var);

/// Exponent curve 2 - exp(-c a).
double exponent_curve(double normalized_average, double c);

/// Per-patch exponents q_j.
Vector patch_exponents(const ClassMap &classes, const PoolingMap &avg1n, const PoolingMap &avg2n, double c);

/// 1 on discontinuity, curve(avg1n) on smooth, curve(avg2n) on oscillation,
/// expanded to every component of each patch.
ExponentField assign_exponents(const ClassMap &classes, const PoolingMap &avg1n, const PoolingMap &avg2n, double c,
                               const PatchGrid &grid);

/// Everything the classification produced, for reporting.
struct DesignMaps {
  PoolingMap var1, var2, var1n, var2n, filt1, filt2, avg1n, avg2n;
  ClassMap classes;
  Vector patch_exponents;
};

/// Pooling, normalization, filtering, classification and exponent assignment
/// on precomputed gradient statistics.
DesignMaps design_from_stats(const GradientStats &stats, const PatchGrid &grid, const DesignHyper &hyper);

/// Patch-layout CSV (one patch row per line; one value per line in 1D).
void write_patch_csv(const std::filesystem::path &path, const PatchGrid &grid, const Vector &per_patch);
void write_classmap_csv(const std::filesystem::path &path, const PatchGrid &grid, const ClassMap &classes);

/// Pixel-resolution renderings (2D only): classes as 0 / 128 / 255 for
/// discontinuity / oscillation / smooth; exponents scaled from [1, 2].
void render_classmap_pgm(const std::filesystem::path &path, const PatchGrid &grid, const ClassMap &classes);
void render_exponents_pgm(const std::filesystem::path &path, const PatchGrid &grid, const ExponentField &p);

} // namespace inhomlp
