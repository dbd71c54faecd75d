#include "mobscope/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace mobscope {

namespace {

constexpr double kNoiseCut = 8.0;  // deposit box half-width in noise SDs

struct MomentField {
  std::vector<double> sum;
  std::vector<double> sum_sq;

  explicit MomentField(std::size_t cells) : sum(cells, 0.0), sum_sq(cells, 0.0) {}
  MomentField() = default;
};

// Adds the exact noise density phi_sigma(c - p) for cells near p. scale
// rescales the deposit (used by the time-averaged variant).
void deposit_gaussian(std::vector<double>& buf, const GridSpec& grid, Point p, double inv2s2,
                      double norm, double cut) {
  long ix_lo = static_cast<long>(std::ceil((p.x - cut - grid.x_min) / grid.cell_dx - 0.5));
  long ix_hi = static_cast<long>(std::floor((p.x + cut - grid.x_min) / grid.cell_dx - 0.5));
  long iy_lo = static_cast<long>(std::ceil((p.y - cut - grid.y_min) / grid.cell_dy - 0.5));
  long iy_hi = static_cast<long>(std::floor((p.y + cut - grid.y_min) / grid.cell_dy - 0.5));
  ix_lo = std::max(ix_lo, 0L);
  iy_lo = std::max(iy_lo, 0L);
  ix_hi = std::min(ix_hi, static_cast<long>(grid.n_x) - 1);
  iy_hi = std::min(iy_hi, static_cast<long>(grid.n_y) - 1);
  for (long ix = ix_lo; ix <= ix_hi; ++ix) {
    const double dx = grid.center_x(static_cast<std::size_t>(ix)) - p.x;
    const std::size_t base = static_cast<std::size_t>(ix) * grid.n_y;
    for (long iy = iy_lo; iy <= iy_hi; ++iy) {
      const double dy = grid.center_y(static_cast<std::size_t>(iy)) - p.y;
      buf[base + static_cast<std::size_t>(iy)] += norm * std::exp(-(dx * dx + dy * dy) * inv2s2);
    }
  }
}

OracleField finalize(const GridSpec& grid, const std::vector<MomentField>& partial,
                     std::size_t n_draws) {
  OracleField out;
  out.mean = DensityField(grid);
  out.std_error = DensityField(grid);
  out.n_draws = n_draws;
  const std::size_t cells = grid.cells();
  std::vector<double> sum(cells, 0.0), sum_sq(cells, 0.0);
  for (const auto& part : partial) {
    if (part.sum.empty()) continue;
    for (std::size_t c = 0; c < cells; ++c) {
      sum[c] += part.sum[c];
      sum_sq[c] += part.sum_sq[c];
    }
  }
  const double n = static_cast<double>(n_draws);
  for (std::size_t c = 0; c < cells; ++c) {
    double mean = sum[c] / n;
    out.mean.values[c] = mean;
    if (n_draws > 1) {
      double var = (sum_sq[c] - n * mean * mean) / (n - 1.0);
      // Below the accumulation noise of the two-pass formula the variance is
      // indistinguishable from zero.
      double noise_floor = 8.0 * n * 2.22e-16 * sum_sq[c] / (n - 1.0);
      out.std_error.values[c] = var > noise_floor ? std::sqrt(var / n) : 0.0;
    }
  }
  return out;
}

// Draw loop shared by the oracles: position_of(rng) yields one deposit center
// per draw; each fixed chunk runs its own derived stream.
OracleField run_oracle(const GridSpec& grid, double sigma, std::size_t n_mc, std::uint64_t seed,
                       const std::function<Point(Rng&)>& position_of) {
  grid.validate();
  if (n_mc < 1) throw config_error("oracle: n_mc must be >= 1");
  if (!(sigma > 0.0)) throw config_error("oracle: sigma must be > 0");
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const double norm = 1.0 / (2.0 * kPi * sigma * sigma);
  const double cut = kNoiseCut * sigma;
  const std::size_t cells = grid.cells();

  const std::size_t n_chunks = 64;
  std::vector<MomentField> partial(n_chunks);
  parallel_chunks(n_mc, n_chunks, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    partial[c] = MomentField(cells);
    Rng rng = Rng::derive(seed, {0x0Au, c});
    for (std::size_t k = lo; k < hi; ++k) {
      Point p = position_of(rng);
      long ix_lo = std::max(0L, static_cast<long>(std::ceil((p.x - cut - grid.x_min) / grid.cell_dx - 0.5)));
      long ix_hi = std::min(static_cast<long>(grid.n_x) - 1,
                            static_cast<long>(std::floor((p.x + cut - grid.x_min) / grid.cell_dx - 0.5)));
      long iy_lo = std::max(0L, static_cast<long>(std::ceil((p.y - cut - grid.y_min) / grid.cell_dy - 0.5)));
      long iy_hi = std::min(static_cast<long>(grid.n_y) - 1,
                            static_cast<long>(std::floor((p.y + cut - grid.y_min) / grid.cell_dy - 0.5)));
      for (long ix = ix_lo; ix <= ix_hi; ++ix) {
        const double dx = grid.center_x(static_cast<std::size_t>(ix)) - p.x;
        const std::size_t base = static_cast<std::size_t>(ix) * grid.n_y;
        for (long iy = iy_lo; iy <= iy_hi; ++iy) {
          const double dy = grid.center_y(static_cast<std::size_t>(iy)) - p.y;
          const std::size_t cell = base + static_cast<std::size_t>(iy);
          double v = norm * std::exp(-(dx * dx + dy * dy) * inv2s2);
          partial[c].sum[cell] += v;
          partial[c].sum_sq[cell] += v * v;
        }
      }
    }
  });
  return finalize(grid, partial, n_mc);
}

}  // namespace

OracleField monte_carlo_density_oracle(const TrajectorySampler& sampler, double sigma,
                                       const GridSpec& grid, std::size_t n_mc, std::uint64_t seed,
                                       const TimeInterval& interval) {
  return run_oracle(grid, sigma, n_mc, seed, [&](Rng& rng) {
    Trajectory traj = sampler(rng);
    double u = interval.start + interval.length * rng.uniform();
    if (u >= 1.0) u -= 1.0;
    return traj.at(u);
  });
}

OracleField monte_carlo_conditional_oracle(const TrajectorySampler& sampler, double sigma,
                                           const GridSpec& grid, std::size_t n_mc,
                                           std::uint64_t seed, double t) {
  if (t < 0.0 || t > 1.0) throw config_error("conditional oracle: t must be in [0, 1]");
  return run_oracle(grid, sigma, n_mc, seed, [&](Rng& rng) {
    Trajectory traj = sampler(rng);
    return traj.at(t);
  });
}

OracleField monte_carlo_time_averaged_oracle(const TrajectorySampler& sampler, double sigma,
                                             const GridSpec& grid, std::size_t n_traj,
                                             const TimeGrid& tg, std::uint64_t seed) {
  grid.validate();
  if (n_traj < 1) throw config_error("oracle: n_traj must be >= 1");
  if (!(sigma > 0.0)) throw config_error("oracle: sigma must be > 0");
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const double norm = 1.0 / (2.0 * kPi * sigma * sigma) / static_cast<double>(tg.n_t);
  const double cut = kNoiseCut * sigma;
  const std::size_t cells = grid.cells();

  const std::size_t n_chunks = 64;
  std::vector<MomentField> partial(n_chunks);
  parallel_chunks(n_traj, n_chunks, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    partial[c] = MomentField(cells);
    std::vector<double> draw(cells, 0.0);
    Rng rng = Rng::derive(seed, {0x0Bu, c});
    for (std::size_t k = lo; k < hi; ++k) {
      Trajectory traj = sampler(rng);
      std::fill(draw.begin(), draw.end(), 0.0);
      for (std::size_t l = 0; l < tg.n_t; ++l) {
        deposit_gaussian(draw, grid, traj.at(tg.time(l)), inv2s2, norm, cut);
      }
      for (std::size_t cell = 0; cell < cells; ++cell) {
        double v = draw[cell];
        partial[c].sum[cell] += v;
        partial[c].sum_sq[cell] += v * v;
      }
    }
  });
  return finalize(grid, partial, n_traj);
}

TrajectorySampler smm_sampler(const World& world, std::vector<ActionPattern> patterns) {
  validate_patterns(world, patterns);
  return [&world, patterns = std::move(patterns)](Rng& rng) {
    return sample_day(world, patterns, rng).trajectory;
  };
}

OracleField true_density_oracle(const World& world, const std::vector<ActionPattern>& patterns,
                                double sigma, const GridSpec& grid, std::size_t n_mc,
                                std::uint64_t seed) {
  return monte_carlo_density_oracle(smm_sampler(world, patterns), sigma, grid, n_mc, seed);
}

OracleField interval_oracle(const World& world, const std::vector<ActionPattern>& patterns,
                            double sigma, const GridSpec& grid, std::size_t n_mc,
                            std::uint64_t seed, const TimeInterval& interval) {
  return monte_carlo_density_oracle(smm_sampler(world, patterns), sigma, grid, n_mc, seed,
                                    interval);
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw config_error("regularized_gamma_p: a must be > 0");
  if (x < 0.0) throw config_error("regularized_gamma_p: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) {
    // Series representation.
    double term = 1.0 / a;
    double sum = term;
    double ai = a;
    for (int k = 0; k < 500; ++k) {
      ai += 1.0;
      term *= x / ai;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // Continued fraction for Q(a, x) = 1 - P(a, x) (modified Lentz).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k <= 500; ++k) {
    double an = -static_cast<double>(k) * (static_cast<double>(k) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  return 1.0 - q;
}

double gaussian_mass_in_disk(double center_dist, double radius, double sigma) {
  if (!(sigma > 0.0)) throw config_error("gaussian_mass_in_disk: sigma must be > 0");
  if (radius <= 0.0) return 0.0;
  double d = std::fabs(center_dist);
  if ((d - radius) / sigma > 10.0) return 0.0;
  if ((radius - d) / sigma > 10.0) return 1.0;

  const double half_delta = d * d / (2.0 * sigma * sigma);  // noncentrality / 2
  const double half_x = radius * radius / (2.0 * sigma * sigma);
  if (half_delta == 0.0) return -std::expm1(-half_x);

  // Poisson(half_delta) mixture of central chi-square CDFs, iterated from the
  // Poisson mode outward so the weights never underflow.
  const long k0 = static_cast<long>(half_delta);
  auto log_poisson = [&](long k) {
    return -half_delta + static_cast<double>(k) * std::log(half_delta) -
           std::lgamma(static_cast<double>(k) + 1.0);
  };
  // C_k = P(chi^2_{2k+2} <= x) = P(k + 1, x/2);
  // q_k = e^{-x/2} (x/2)^k / k! satisfies C_{k+1} = C_k - q_{k+1}.
  double total = 0.0;

  // Upward sweep from k0.
  {
    double p = std::exp(log_poisson(k0));
    double c = regularized_gamma_p(static_cast<double>(k0) + 1.0, half_x);
    double log_q = -half_x + static_cast<double>(k0) * std::log(half_x) -
                   std::lgamma(static_cast<double>(k0) + 1.0);
    double q = std::exp(log_q);
    for (long k = k0; k < k0 + 100000; ++k) {
      total += p * c;
      if (p < 1e-18 && k > k0) break;
      p *= half_delta / static_cast<double>(k + 1);
      q *= half_x / static_cast<double>(k + 1);
      c -= q;
      if (c < 0.0) c = 0.0;
    }
  }
  // Downward sweep from k0 - 1; maintains p = Pois(k), c = C_k, q = q_k.
  if (k0 > 0) {
    double p = std::exp(log_poisson(k0 - 1));
    double c = regularized_gamma_p(static_cast<double>(k0), half_x);
    double q = std::exp(-half_x + static_cast<double>(k0 - 1) * std::log(half_x) -
                        std::lgamma(static_cast<double>(k0)));
    for (long k = k0 - 1; k >= 0; --k) {
      total += p * c;
      if (p < 1e-18) break;
      if (k > 0) {
        p *= static_cast<double>(k) / half_delta;
        c += q;  // C_{k-1} = C_k + q_k
        q *= static_cast<double>(k) / half_x;
      }
    }
  }
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace mobscope
