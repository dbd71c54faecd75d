#include "mobscope/kde.hpp"

#include <algorithm>
#include <cmath>

namespace mobscope {

namespace {

// Gaussian tails are dropped this many bandwidths out, both in grid
// deposition and in point evaluation; the discarded mass is below 4e-9.
constexpr double kKernelCut = 6.0;
// A time slice counts as unsupported once even the closest observation's
// time-kernel value would underflow 1e-300.
constexpr double kLogSupportMin = -690.7755278982137;

std::vector<std::pair<std::uint32_t, std::uint32_t>> flatten_observations(
    const GpsDataset& data, const std::vector<std::size_t>& order) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> flat;
  flat.reserve(data.total_observations());
  for (std::size_t i : order) {
    for (std::size_t j = 0; j < data.days[i].size(); ++j)
      flat.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  }
  return flat;
}

// Deposits scale * w[i][j] * K((X_ij - c)/h) / h^2 over the grid. Chunk
// buffers are reduced in a fixed order, so results do not depend on the
// thread count, and days are walked in canonical order, so they do not
// depend on day ordering either.
void require_weight_shape(const GpsDataset& data, const std::vector<std::vector<double>>& w) {
  if (w.size() != data.n_days()) throw data_error("weights/dataset day count mismatch");
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i].size() != data.days[i].size())
      throw data_error("weights/dataset observation count mismatch");
}

DensityField deposit(const GpsDataset& data, const std::vector<std::vector<double>>& w,
                     double scale, double h, const GridSpec& grid) {
  grid.validate();
  if (!(h > 0.0)) throw config_error("kde: bandwidth must be > 0");
  require_weight_shape(data, w);
  DensityField field(grid);
  auto order = data.canonical_day_order();
  auto flat = flatten_observations(data, order);

  const double cut = kKernelCut * h;
  const double inv2h2 = 1.0 / (2.0 * h * h);
  const double norm = scale / (2.0 * kPi * h * h);

  const std::size_t n_chunks = 32;
  std::vector<std::vector<double>> partial(n_chunks);
  parallel_chunks(flat.size(), n_chunks, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    std::vector<double>& buf = partial[c];
    buf.assign(grid.cells(), 0.0);
    for (std::size_t f = lo; f < hi; ++f) {
      auto [i, j] = flat[f];
      const Point x = data.days[i].points[j];
      const double weight = norm * w[i][j];
      if (weight == 0.0) continue;
      long ix_lo = static_cast<long>(std::ceil((x.x - cut - grid.x_min) / grid.cell_dx - 0.5));
      long ix_hi = static_cast<long>(std::floor((x.x + cut - grid.x_min) / grid.cell_dx - 0.5));
      long iy_lo = static_cast<long>(std::ceil((x.y - cut - grid.y_min) / grid.cell_dy - 0.5));
      long iy_hi = static_cast<long>(std::floor((x.y + cut - grid.y_min) / grid.cell_dy - 0.5));
      ix_lo = std::max(ix_lo, 0L);
      iy_lo = std::max(iy_lo, 0L);
      ix_hi = std::min(ix_hi, static_cast<long>(grid.n_x) - 1);
      iy_hi = std::min(iy_hi, static_cast<long>(grid.n_y) - 1);
      for (long ix = ix_lo; ix <= ix_hi; ++ix) {
        const double dx = grid.center_x(static_cast<std::size_t>(ix)) - x.x;
        const std::size_t base = static_cast<std::size_t>(ix) * grid.n_y;
        for (long iy = iy_lo; iy <= iy_hi; ++iy) {
          const double dy = grid.center_y(static_cast<std::size_t>(iy)) - x.y;
          buf[base + static_cast<std::size_t>(iy)] += weight * std::exp(-(dx * dx + dy * dy) * inv2h2);
        }
      }
    }
  });
  for (std::size_t c = 0; c < n_chunks; ++c) {
    if (partial[c].empty()) continue;
    for (std::size_t cell = 0; cell < field.values.size(); ++cell)
      field.values[cell] += partial[c][cell];
  }
  return field;
}

std::vector<std::vector<double>> uniform_weights(const GpsDataset& data, double value) {
  std::vector<std::vector<double>> w(data.n_days());
  for (std::size_t i = 0; i < data.n_days(); ++i) w[i].assign(data.days[i].size(), value);
  return w;
}

// Unnormalized time-kernel values exp(-(d_T/h_t)^2 / 2) rescaled by the
// maximum so ratios survive underflow, plus the rescaled denominator
// sum_{i,j} (1/m_i) k_{i,j}. Throws when the whole profile underflows.
struct TimeKernelProfile {
  std::vector<std::vector<double>> k;
  double denom = 0.0;
};

TimeKernelProfile time_kernel_profile(const GpsDataset& data,
                                      const std::vector<std::size_t>& order, double h_t,
                                      double t) {
  TimeKernelProfile profile;
  profile.k.resize(data.n_days());
  double max_log = -1e308;
  for (std::size_t i = 0; i < data.n_days(); ++i) {
    const GpsDay& day = data.days[i];
    auto& ki = profile.k[i];
    ki.resize(day.size());
    for (std::size_t j = 0; j < day.size(); ++j) {
      double u = cyclic_time_distance(day.times[j], t) / h_t;
      ki[j] = -0.5 * u * u;  // log values for now
      max_log = std::max(max_log, ki[j]);
    }
  }
  if (max_log < kLogSupportMin)
    throw unsupported_time_error("no time-kernel support at t = " + std::to_string(t));
  for (auto& ki : profile.k)
    for (double& v : ki) v = std::exp(v - max_log);
  for (std::size_t i : order) {
    const double inv_m = 1.0 / static_cast<double>(data.days[i].size());
    double day_sum = 0.0;
    for (double v : profile.k[i]) day_sum += v;
    profile.denom += inv_m * day_sum;
  }
  return profile;
}

}  // namespace

double cyclic_time_distance(double t1, double t2) {
  if (t1 < 0.0 || t1 > 1.0 || t2 < 0.0 || t2 > 1.0)
    throw config_error("cyclic_time_distance: times must be in [0, 1]");
  double d = std::fabs(t1 - t2);
  return std::min(d, 1.0 - d);
}

std::vector<double> time_weights(const GpsDay& day) {
  day.validate();
  const std::size_t m = day.size();
  std::vector<double> w(m);
  for (std::size_t j = 0; j < m; ++j) {
    double prev = j == 0 ? day.times[m - 1] - 1.0 : day.times[j - 1];
    double next = j + 1 == m ? 1.0 + day.times[0] : day.times[j + 1];
    w[j] = (next - prev) / 2.0;
  }
  return w;
}

double DayWeights::total() const {
  double s = 0.0;
  for (const auto& wi : w)
    for (double v : wi) s += v;
  return s;
}

DayWeights midpoint_weights(const GpsDataset& data) {
  data.validate();
  DayWeights weights;
  weights.kind = DayWeights::Kind::midpoint;
  weights.w.reserve(data.n_days());
  for (const auto& day : data.days) weights.w.push_back(time_weights(day));
  return weights;
}

DayWeights integrated_conditional_weights(const GpsDataset& data, const Bandwidths& bw,
                                          const TimeGrid& tg, const TimeInterval& interval) {
  data.validate();
  bw.validate();
  auto order = data.canonical_day_order();

  std::vector<std::size_t> grid_times;
  for (std::size_t l = 0; l < tg.n_t; ++l) {
    if (interval.contains(tg.time(l))) grid_times.push_back(l);
  }
  if (grid_times.empty()) throw data_error("no time-grid points inside the interval");
  const double inv_count = 1.0 / static_cast<double>(grid_times.size());
  const double n_days = static_cast<double>(data.n_days());

  DayWeights weights;
  weights.kind = DayWeights::Kind::integrated;
  weights.w.resize(data.n_days());
  for (std::size_t i = 0; i < data.n_days(); ++i) weights.w[i].assign(data.days[i].size(), 0.0);

  const std::size_t n_chunks = 32;
  std::vector<DayWeights> partial(n_chunks);
  parallel_chunks(grid_times.size(), n_chunks, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    DayWeights& acc = partial[c];
    acc.w.resize(data.n_days());
    for (std::size_t i = 0; i < data.n_days(); ++i) acc.w[i].assign(data.days[i].size(), 0.0);
    for (std::size_t g = lo; g < hi; ++g) {
      TimeKernelProfile profile = time_kernel_profile(data, order, bw.h_t, tg.time(grid_times[g]));
      const double inv_denom = 1.0 / profile.denom;
      for (std::size_t i = 0; i < data.n_days(); ++i) {
        auto& wi = acc.w[i];
        const auto& ki = profile.k[i];
        for (std::size_t j = 0; j < wi.size(); ++j) wi[j] += ki[j] * inv_denom;
      }
    }
  });
  for (std::size_t c = 0; c < n_chunks; ++c) {
    if (partial[c].w.empty()) continue;
    for (std::size_t i = 0; i < data.n_days(); ++i) {
      const auto& src = partial[c].w[i];
      auto& dst = weights.w[i];
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
  }
  for (std::size_t i = 0; i < data.n_days(); ++i) {
    const double factor = n_days / static_cast<double>(data.days[i].size()) * inv_count;
    for (double& v : weights.w[i]) v *= factor;
  }
  return weights;
}

DensityField weighted_kde(const GpsDataset& data, const DayWeights& weights, double h,
                          const GridSpec& grid) {
  data.validate();
  if (weights.w.size() != data.n_days()) throw data_error("weights/dataset day count mismatch");
  return deposit(data, weights.w, 1.0 / static_cast<double>(data.n_days()), h, grid);
}

std::vector<double> weighted_kde_at(const GpsDataset& data, const DayWeights& weights, double h,
                                    const std::vector<Point>& queries) {
  data.validate();
  require_weight_shape(data, weights.w);
  if (!(h > 0.0)) throw config_error("kde: bandwidth must be > 0");
  auto order = data.canonical_day_order();
  auto flat = flatten_observations(data, order);
  const double cut2 = kKernelCut * h * kKernelCut * h;
  const double inv2h2 = 1.0 / (2.0 * h * h);
  const double norm = 1.0 / (2.0 * kPi * h * h * static_cast<double>(data.n_days()));

  std::vector<double> out(queries.size(), 0.0);
  const std::size_t n_chunks = 64;
  parallel_chunks(queries.size(), n_chunks, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t q = lo; q < hi; ++q) {
      const Point c = queries[q];
      double acc = 0.0;
      for (auto [i, j] : flat) {
        const Point x = data.days[i].points[j];
        const double dx = x.x - c.x;
        const double dy = x.y - c.y;
        const double r2 = dx * dx + dy * dy;
        if (r2 > cut2) continue;
        acc += weights.w[i][j] * std::exp(-r2 * inv2h2);
      }
      out[q] = acc * norm;
    }
  });
  return out;
}

DensityField naive_kde(const GpsDataset& data, double h, const GridSpec& grid) {
  data.validate();
  const double inv_total = 1.0 / static_cast<double>(data.total_observations());
  return deposit(data, uniform_weights(data, inv_total), 1.0, h, grid);
}

DensityField time_weighted_kde(const GpsDataset& data, double h, const GridSpec& grid) {
  DayWeights weights = midpoint_weights(data);
  return weighted_kde(data, weights, h, grid);
}

DensityField conditional_kde(const GpsDataset& data, const Bandwidths& bw, const GridSpec& grid,
                             double t) {
  data.validate();
  bw.validate();
  auto order = data.canonical_day_order();
  TimeKernelProfile profile = time_kernel_profile(data, order, bw.h_t, t);
  const double inv_denom = 1.0 / profile.denom;
  std::vector<std::vector<double>> w(data.n_days());
  for (std::size_t i = 0; i < data.n_days(); ++i) {
    const double inv_m = 1.0 / static_cast<double>(data.days[i].size());
    w[i].resize(data.days[i].size());
    for (std::size_t j = 0; j < w[i].size(); ++j) w[i][j] = inv_m * profile.k[i][j] * inv_denom;
  }
  return deposit(data, w, 1.0, bw.h_x, grid);
}

DensityField integrated_conditional_kde(const GpsDataset& data, const Bandwidths& bw,
                                        const GridSpec& grid, const TimeGrid& tg) {
  DayWeights weights = integrated_conditional_weights(data, bw, tg);
  return weighted_kde(data, weights, bw.h_x, grid);
}

DensityField interval_kde(const GpsDataset& data, const Bandwidths& bw, const GridSpec& grid,
                          const TimeInterval& interval, IntervalEstimator estimator,
                          const TimeGrid& tg) {
  data.validate();
  bw.validate();
  if (estimator == IntervalEstimator::conditional) {
    DayWeights weights = integrated_conditional_weights(data, bw, tg, interval);
    return weighted_kde(data, weights, bw.h_x, grid);
  }
  // Weighted variant: per-day renormalized mid-point weights of in-interval
  // observations, averaged over the days that have any.
  std::vector<std::vector<double>> w(data.n_days());
  std::size_t days_covered = 0;
  for (std::size_t i = 0; i < data.n_days(); ++i) {
    const GpsDay& day = data.days[i];
    std::vector<double> base = time_weights(day);
    double in_mass = 0.0;
    w[i].assign(day.size(), 0.0);
    for (std::size_t j = 0; j < day.size(); ++j) {
      if (interval.contains(day.times[j])) {
        w[i][j] = base[j];
        in_mass += base[j];
      }
    }
    if (in_mass > 0.0) {
      ++days_covered;
      for (double& v : w[i]) v /= in_mass;
    }
  }
  if (days_covered == 0) throw data_error("no observations inside the interval");
  return deposit(data, w, 1.0 / static_cast<double>(days_covered), bw.h_x, grid);
}

DensityField interval_naive(const GpsDataset& data, double h, const GridSpec& grid,
                            const TimeInterval& interval) {
  data.validate();
  std::vector<std::vector<double>> w(data.n_days());
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.n_days(); ++i) {
    const GpsDay& day = data.days[i];
    w[i].assign(day.size(), 0.0);
    for (std::size_t j = 0; j < day.size(); ++j) {
      if (interval.contains(day.times[j])) {
        w[i][j] = 1.0;
        ++count;
      }
    }
  }
  if (count == 0) throw data_error("no observations inside the interval");
  return deposit(data, w, 1.0 / static_cast<double>(count), h, grid);
}

DensityField daily_average_conditional(const GpsDataset& data, const Bandwidths& bw,
                                       const GridSpec& grid, double t) {
  data.validate();
  bw.validate();
  std::vector<std::vector<double>> w(data.n_days());
  for (std::size_t i = 0; i < data.n_days(); ++i) {
    const GpsDay& day = data.days[i];
    double max_log = -1e308;
    std::vector<double> logs(day.size());
    for (std::size_t j = 0; j < day.size(); ++j) {
      double u = cyclic_time_distance(day.times[j], t) / bw.h_t;
      logs[j] = -0.5 * u * u;
      max_log = std::max(max_log, logs[j]);
    }
    if (max_log < kLogSupportMin)
      throw unsupported_time_error("day " + std::to_string(i) + " has no time-kernel support at t = " +
                                   std::to_string(t));
    double denom = 0.0;
    w[i].resize(day.size());
    for (std::size_t j = 0; j < day.size(); ++j) {
      w[i][j] = std::exp(logs[j] - max_log);
      denom += w[i][j];
    }
    for (double& v : w[i]) v /= denom;
  }
  return deposit(data, w, 1.0 / static_cast<double>(data.n_days()), bw.h_x, grid);
}

std::vector<double> conditional_day_weights(const GpsDataset& data, double h_t, double t) {
  data.validate();
  auto order = data.canonical_day_order();
  TimeKernelProfile profile = time_kernel_profile(data, order, h_t, t);
  std::vector<double> alpha(data.n_days(), 0.0);
  for (std::size_t i = 0; i < data.n_days(); ++i) {
    double day_sum = 0.0;
    for (double v : profile.k[i]) day_sum += v;
    alpha[i] = day_sum / static_cast<double>(data.days[i].size()) / profile.denom;
  }
  return alpha;
}

}  // namespace mobscope
