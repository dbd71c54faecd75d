#pragma once

#include <vector>

#include "mobscope/common.hpp"
#include "mobscope/dataset.hpp"
#include "mobscope/grid.hpp"

namespace mobscope {

/// Distance on the day circle: min(|t1 - t2|, 1 - |t1 - t2|), in [0, 0.5].
double cyclic_time_distance(double t1, double t2);

struct Bandwidths {
  double h_x = 0.1;  // planar units
  double h_t = 0.02; // day fractions

  void validate() const {
    if (!(h_x > 0.0)) throw config_error("bandwidths: h_x must be > 0");
    if (!(h_t > 0.0) || h_t > 0.5) throw config_error("bandwidths: h_t must be in (0, 0.5]");
  }
};

/// Mid-point weights of one day: W_j = (t_{j+1} - t_{j-1}) / 2 with the day
/// closed into a circle (t_0 = t_m - 1, t_{m+1} = 1 + t_1). Sums to 1.
std::vector<double> time_weights(const GpsDay& day);

/// Per-day observation weights for the weighted-KDE form of the estimators.
struct DayWeights {
  enum class Kind { midpoint, integrated };
  Kind kind = Kind::midpoint;
  std::vector<std::vector<double>> w;  // [day][observation]

  double total() const;
};

DayWeights midpoint_weights(const GpsDataset& data);

/// Integrated-conditional weights: for observation (i, j),
///   W~_{i,j} = (n / m_i) * integral over t of
///              K_T(d_T(t_{i,j}, t)/h_T) / sum_{i',j'} (1/m_{i'}) K_T(...)
/// approximated with the midpoint rule on the time grid. Restricting to an
/// interval keeps only grid times inside it and divides by the interval
/// measure covered by those grid times. The whole-day weights total n.
DayWeights integrated_conditional_weights(const GpsDataset& data, const Bandwidths& bw,
                                          const TimeGrid& tg,
                                          const TimeInterval& interval = TimeInterval::full());

/// Weighted 2D KDE deposit: field(c) = sum_{i,j} w_{i,j} K((X_{i,j}-c)/h) / h^2
/// with K the standard bivariate Gaussian. Tails are cut 6 bandwidths out.
DensityField weighted_kde(const GpsDataset& data, const DayWeights& weights, double h,
                          const GridSpec& grid);

/// Same weighted sum evaluated exactly at arbitrary points (no grid).
std::vector<double> weighted_kde_at(const GpsDataset& data, const DayWeights& weights, double h,
                                    const std::vector<Point>& queries);

/// Estimator ignoring timestamps: every observation weighted 1/N.
DensityField naive_kde(const GpsDataset& data, double h, const GridSpec& grid);

/// Time-weighted estimator: observation (i,j) weighted W_{i,j}/n.
DensityField time_weighted_kde(const GpsDataset& data, double h, const GridSpec& grid);

/// Conditional density estimate at time t. Throws unsupported_time_error when
/// every time-kernel value underflows (no data anywhere near t in time).
DensityField conditional_kde(const GpsDataset& data, const Bandwidths& bw, const GridSpec& grid,
                             double t);

/// Average density via the integral of the conditional estimator over the
/// time grid; identical to weighted_kde with integrated-conditional weights.
DensityField integrated_conditional_kde(const GpsDataset& data, const Bandwidths& bw,
                                        const GridSpec& grid, const TimeGrid& tg);

enum class IntervalEstimator { weighted, conditional };

/// Interval-specific density. The weighted variant keeps in-interval
/// observations with their mid-point weights renormalized per day; the
/// conditional variant averages the conditional estimator over in-interval
/// time-grid points.
DensityField interval_kde(const GpsDataset& data, const Bandwidths& bw, const GridSpec& grid,
                          const TimeInterval& interval, IntervalEstimator estimator,
                          const TimeGrid& tg = TimeGrid(1440));

/// Naive estimator restricted to in-interval observations (equal weights).
DensityField interval_naive(const GpsDataset& data, double h, const GridSpec& grid,
                            const TimeInterval& interval);

/// Average of per-day conditional estimates at time t (comparison estimator).
DensityField daily_average_conditional(const GpsDataset& data, const Bandwidths& bw,
                                       const GridSpec& grid, double t);

/// Day weights alpha_i(t) of the conditional estimator (sum to 1).
std::vector<double> conditional_day_weights(const GpsDataset& data, double h_t, double t);

}  // namespace mobscope
