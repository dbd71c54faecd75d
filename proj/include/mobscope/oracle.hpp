#pragma once

#include <cstdint>
#include <functional>

#include "mobscope/grid.hpp"
#include "mobscope/simulate.hpp"

namespace mobscope {

/// Streaming mean/variance (Welford).
class RunningMoments {
 public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Monte Carlo density estimate with a per-cell standard error of the mean.
struct OracleField {
  DensityField mean;
  DensityField std_error;
  std::size_t n_draws = 0;
};

using TrajectorySampler = std::function<Trajectory(Rng&)>;

/// Average density oracle: draws (trajectory, U) with U uniform on the given
/// interval and deposits the exact noise density centered at S(U) on every
/// cell, so the only error is Monte Carlo error.
OracleField monte_carlo_density_oracle(const TrajectorySampler& sampler, double sigma,
                                       const GridSpec& grid, std::size_t n_mc, std::uint64_t seed,
                                       const TimeInterval& interval = TimeInterval::full());

/// Conditional density oracle at a fixed time t (only trajectories are drawn).
OracleField monte_carlo_conditional_oracle(const TrajectorySampler& sampler, double sigma,
                                           const GridSpec& grid, std::size_t n_mc,
                                           std::uint64_t seed, double t);

/// Midpoint-rule time average of the conditional oracle: each trajectory draw
/// deposits the average of its exact noise densities over the time grid.
OracleField monte_carlo_time_averaged_oracle(const TrajectorySampler& sampler, double sigma,
                                             const GridSpec& grid, std::size_t n_traj,
                                             const TimeGrid& tg, std::uint64_t seed);

/// Sampler drawing one SMM day per call.
TrajectorySampler smm_sampler(const World& world, std::vector<ActionPattern> patterns);

OracleField true_density_oracle(const World& world, const std::vector<ActionPattern>& patterns,
                                double sigma, const GridSpec& grid, std::size_t n_mc,
                                std::uint64_t seed);
OracleField interval_oracle(const World& world, const std::vector<ActionPattern>& patterns,
                            double sigma, const GridSpec& grid, std::size_t n_mc,
                            std::uint64_t seed, const TimeInterval& interval);

/// Mass a N(p, sigma^2 I) distribution puts in the disk of the given radius
/// whose center lies center_dist away from p. Exact up to series truncation.
double gaussian_mass_in_disk(double center_dist, double radius, double sigma);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

}  // namespace mobscope
