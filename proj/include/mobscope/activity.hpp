#pragma once

#include <vector>

#include "mobscope/dataset.hpp"
#include "mobscope/grid.hpp"
#include "mobscope/kde.hpp"

namespace mobscope {

/// Chi-square CDF with 2 degrees of freedom: 1 - exp(-t/2).
double chi2_2_cdf(double t);

/// Density level corresponding to spending a lambda fraction of the day at a
/// point under isotropic Gaussian noise: lambda / (2 pi sigma^2).
double anchor_level_threshold(double lambda, double sigma);

/// Lower bound on the mass of the average density in a ball of radius r
/// around a point holding at least rho of the latent time:
/// rho * F_chi2_2(r^2 / sigma^2). Also bounds mass around r-dilated regions.
double region_mass_lower_bound(double rho, double r, double sigma);

struct ActivityProbabilityBound {
  double value = 0.0;  // clamped to [0, 1]
  bool vacuous = false;
};

/// Lower bound on the latent-time probability of the r-dilated region given
/// that the average density puts mass at least g in the region itself:
/// 1 - (1 - g) / F_chi2_2(r^2 / sigma^2), vacuous when F < 1 - g.
ActivityProbabilityBound activity_probability_lower_bound(double g, double r, double sigma);

/// Boolean cell membership over a grid, tagged with the density level that
/// produced it.
struct RegionMask {
  GridSpec grid;
  std::vector<std::uint8_t> in_region;
  double level = 0.0;

  std::size_t count() const;
  double area() const { return static_cast<double>(count()) * grid.cell_area(); }
  bool operator==(const RegionMask& o) const = default;
};

/// Cells whose center density is >= level.
RegionMask level_set(const DensityField& field, double level);

struct AnchorEstimate {
  Point location;
  double density = 0.0;  // estimated density at the refined mode
  double level = 0.0;    // threshold used for the containing level set
};

/// Flattened (point, weight) representation of a dataset under per-day
/// weights; masses weight/n sum to 1. Doubles as the weighted sample for
/// exact density evaluation and mean-shift.
struct WeightedEdf {
  std::vector<Point> points;
  std::vector<double> weights;  // W-dagger values; total equals n_days
  std::size_t n_days = 0;

  double total_mass() const;  // sum of weights / n_days
  /// Weighted fraction of observations for which pred(point) holds.
  double mass_where(const std::function<bool(Point)>& pred) const;
};

WeightedEdf weighted_edf(const GpsDataset& data, const DayWeights& weights);

/// Grid local maxima of the field above the threshold, refined by mean-shift
/// on the weighted sample, Hessian-checked by finite differences and merged
/// when closer than h/2.
std::vector<AnchorEstimate> detect_anchors_at_level(const DensityField& field,
                                                    const WeightedEdf& sample, double h,
                                                    double level);

/// Same with the threshold derived from (lambda, sigma).
std::vector<AnchorEstimate> detect_anchors(const DensityField& field, const WeightedEdf& sample,
                                           double h, double lambda, double sigma);

struct ActivitySpace {
  RegionMask region;
  double level = 0.0;          // chosen density level p_(k*)
  double covered_mass = 0.0;   // EDF mass at or above the level
};

/// Smallest upper level set of the estimate covering EDF mass >= rho, via the
/// sorted-density index rule. densities[q] must hold the exact estimate at
/// sample point q (weighted_kde_at of the same weights/bandwidth).
ActivitySpace activity_space(const DensityField& field, const WeightedEdf& sample,
                             const std::vector<double>& densities, double rho);

/// Definition-level scan over candidate levels (the unique sample densities,
/// thinned to at most max_levels). Used as an independent check of
/// activity_space.
ActivitySpace activity_space_by_level_scan(const DensityField& field, const WeightedEdf& sample,
                                           const std::vector<double>& densities, double rho,
                                           std::size_t max_levels = 512);

}  // namespace mobscope
