#include "mobscope/activity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mobscope {

double chi2_2_cdf(double t) {
  if (t < 0.0) throw config_error("chi2_2_cdf: t must be >= 0");
  return -std::expm1(-0.5 * t);
}

double anchor_level_threshold(double lambda, double sigma) {
  if (!(lambda > 0.0) || lambda > 1.0) throw config_error("anchor threshold: lambda must be in (0, 1]");
  if (!(sigma > 0.0))
    throw config_error("anchor threshold: sigma must be > 0 (noiseless densities are singular)");
  return lambda / (2.0 * kPi * sigma * sigma);
}

double region_mass_lower_bound(double rho, double r, double sigma) {
  if (!(r > 0.0)) throw config_error("region bound: r must be > 0");
  if (rho < 0.0 || rho > 1.0) throw config_error("region bound: rho must be in [0, 1]");
  if (!(sigma > 0.0)) throw config_error("region bound: sigma must be > 0");
  return rho * chi2_2_cdf(r * r / (sigma * sigma));
}

ActivityProbabilityBound activity_probability_lower_bound(double g, double r, double sigma) {
  if (!(r > 0.0)) throw config_error("activity bound: r must be > 0");
  if (g < 0.0 || g > 1.0) throw config_error("activity bound: g must be in [0, 1]");
  if (!(sigma > 0.0)) throw config_error("activity bound: sigma must be > 0");
  double f = chi2_2_cdf(r * r / (sigma * sigma));
  ActivityProbabilityBound out;
  out.vacuous = f < 1.0 - g;
  out.value = f > 0.0 ? std::max(0.0, 1.0 - (1.0 - g) / f) : 0.0;
  return out;
}

std::size_t RegionMask::count() const {
  std::size_t n = 0;
  for (auto v : in_region) n += v;
  return n;
}

RegionMask level_set(const DensityField& field, double level) {
  RegionMask mask;
  mask.grid = field.grid;
  mask.level = level;
  mask.in_region.resize(field.values.size());
  for (std::size_t c = 0; c < field.values.size(); ++c)
    mask.in_region[c] = field.values[c] >= level ? 1 : 0;
  return mask;
}

double WeightedEdf::total_mass() const {
  double s = std::accumulate(weights.begin(), weights.end(), 0.0);
  return s / static_cast<double>(n_days);
}

double WeightedEdf::mass_where(const std::function<bool(Point)>& pred) const {
  double s = 0.0;
  for (std::size_t q = 0; q < points.size(); ++q)
    if (pred(points[q])) s += weights[q];
  return s / static_cast<double>(n_days);
}

WeightedEdf weighted_edf(const GpsDataset& data, const DayWeights& weights) {
  data.validate();
  if (weights.w.size() != data.n_days()) throw data_error("weights/dataset day count mismatch");
  WeightedEdf edf;
  edf.n_days = data.n_days();
  auto order = data.canonical_day_order();
  for (std::size_t i : order) {
    if (weights.w[i].size() != data.days[i].size())
      throw data_error("weights/dataset observation count mismatch");
    for (std::size_t j = 0; j < data.days[i].size(); ++j) {
      edf.points.push_back(data.days[i].points[j]);
      edf.weights.push_back(weights.w[i][j]);
    }
  }
  return edf;
}

namespace {

// Exact weighted-KDE value at y over the flattened sample, same kernel cut as
// the grid deposit.
double density_at_point(const WeightedEdf& sample, double h, Point y) {
  const double cut2 = 36.0 * h * h;
  const double inv2h2 = 1.0 / (2.0 * h * h);
  double acc = 0.0;
  for (std::size_t q = 0; q < sample.points.size(); ++q) {
    const double dx = sample.points[q].x - y.x;
    const double dy = sample.points[q].y - y.y;
    const double r2 = dx * dx + dy * dy;
    if (r2 > cut2) continue;
    acc += sample.weights[q] * std::exp(-r2 * inv2h2);
  }
  return acc / (2.0 * kPi * h * h * static_cast<double>(sample.n_days));
}

Point mean_shift_step(const WeightedEdf& sample, double h, Point y) {
  const double cut2 = 36.0 * h * h;
  const double inv2h2 = 1.0 / (2.0 * h * h);
  double wx = 0.0, wy = 0.0, wsum = 0.0;
  for (std::size_t q = 0; q < sample.points.size(); ++q) {
    const double dx = sample.points[q].x - y.x;
    const double dy = sample.points[q].y - y.y;
    const double r2 = dx * dx + dy * dy;
    if (r2 > cut2) continue;
    const double k = sample.weights[q] * std::exp(-r2 * inv2h2);
    wx += k * sample.points[q].x;
    wy += k * sample.points[q].y;
    wsum += k;
  }
  if (wsum <= 0.0) return y;
  return {wx / wsum, wy / wsum};
}

// Largest eigenvalue of the finite-difference Hessian must be negative for a
// point to count as a mode.
bool negative_definite_hessian(const WeightedEdf& sample, double h, Point y) {
  const double step = h / 10.0;
  auto f = [&](double x, double yy) { return density_at_point(sample, h, {x, yy}); };
  const double f0 = f(y.x, y.y);
  const double fxx = (f(y.x + step, y.y) - 2.0 * f0 + f(y.x - step, y.y)) / (step * step);
  const double fyy = (f(y.x, y.y + step) - 2.0 * f0 + f(y.x, y.y - step)) / (step * step);
  const double fxy = (f(y.x + step, y.y + step) - f(y.x + step, y.y - step) -
                      f(y.x - step, y.y + step) + f(y.x - step, y.y - step)) /
                     (4.0 * step * step);
  const double tr = fxx + fyy;
  const double det = fxx * fyy - fxy * fxy;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  return tr / 2.0 + disc < 0.0;
}

}  // namespace

std::vector<AnchorEstimate> detect_anchors_at_level(const DensityField& field,
                                                    const WeightedEdf& sample, double h,
                                                    double level) {
  if (!(h > 0.0)) throw config_error("detect_anchors: bandwidth must be > 0");
  const GridSpec& g = field.grid;

  // Grid-local maxima (8-neighborhood) above the level; plateau ties keep
  // only the lexicographically first cell.
  std::vector<Point> seeds;
  for (std::size_t ix = 0; ix < g.n_x; ++ix) {
    for (std::size_t iy = 0; iy < g.n_y; ++iy) {
      const double v = field.at(ix, iy);
      if (v < level) continue;
      bool is_max = true;
      for (long dx = -1; dx <= 1 && is_max; ++dx) {
        for (long dy = -1; dy <= 1 && is_max; ++dy) {
          if (dx == 0 && dy == 0) continue;
          long nx = static_cast<long>(ix) + dx;
          long ny = static_cast<long>(iy) + dy;
          if (nx < 0 || ny < 0 || nx >= static_cast<long>(g.n_x) || ny >= static_cast<long>(g.n_y))
            continue;
          const double nv = field.at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny));
          if (nv > v) is_max = false;
          // Equal-valued neighbor earlier in x-major order wins the plateau.
          if (nv == v && (nx < static_cast<long>(ix) || (nx == static_cast<long>(ix) && ny < static_cast<long>(iy))))
            is_max = false;
        }
      }
      if (is_max) seeds.push_back({g.center_x(ix), g.center_y(iy)});
    }
  }

  std::vector<AnchorEstimate> modes;
  for (Point seed : seeds) {
    Point y = seed;
    for (int it = 0; it < 50; ++it) {
      Point next = mean_shift_step(sample, h, y);
      double move = distance(next, y);
      y = next;
      if (move < 1e-6 * h) break;
    }
    if (!negative_definite_hessian(sample, h, y)) continue;
    modes.push_back({y, density_at_point(sample, h, y), level});
  }

  // Merge modes closer than h/2, keeping the denser one.
  std::sort(modes.begin(), modes.end(),
            [](const AnchorEstimate& a, const AnchorEstimate& b) { return a.density > b.density; });
  std::vector<AnchorEstimate> merged;
  for (const auto& m : modes) {
    bool dup = false;
    for (const auto& kept : merged) {
      if (distance(kept.location, m.location) < h / 2.0) {
        dup = true;
        break;
      }
    }
    if (!dup) merged.push_back(m);
  }
  return merged;
}

std::vector<AnchorEstimate> detect_anchors(const DensityField& field, const WeightedEdf& sample,
                                           double h, double lambda, double sigma) {
  return detect_anchors_at_level(field, sample, h, anchor_level_threshold(lambda, sigma));
}

ActivitySpace activity_space(const DensityField& field, const WeightedEdf& sample,
                             const std::vector<double>& densities, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw config_error("activity_space: rho must be in (0, 1)");
  if (densities.size() != sample.points.size())
    throw data_error("activity_space: density/sample size mismatch");
  const std::size_t n = densities.size();
  if (n == 0) throw data_error("activity_space: empty sample");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return densities[a] < densities[b]; });

  // Largest k whose upper cumulative weight still reaches rho.
  const double inv_days = 1.0 / static_cast<double>(sample.n_days);
  double upper = 0.0;
  std::vector<double> upper_from(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    upper += sample.weights[order[k]] * inv_days;
    upper_from[k] = upper;
  }
  std::size_t k_star = 0;
  for (std::size_t k = n; k-- > 0;) {
    if (upper_from[k] >= rho) {
      k_star = k;
      break;
    }
  }
  const double level = densities[order[k_star]];

  ActivitySpace out;
  out.level = level;
  out.region = level_set(field, level);
  double covered = 0.0;
  for (std::size_t q = 0; q < n; ++q)
    if (densities[q] >= level) covered += sample.weights[q] * inv_days;
  out.covered_mass = covered;
  return out;
}

ActivitySpace activity_space_by_level_scan(const DensityField& field, const WeightedEdf& sample,
                                           const std::vector<double>& densities, double rho,
                                           std::size_t max_levels) {
  if (!(rho > 0.0 && rho < 1.0)) throw config_error("activity_space: rho must be in (0, 1)");
  if (densities.size() != sample.points.size())
    throw data_error("activity_space: density/sample size mismatch");

  std::vector<double> levels(densities);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.size() > max_levels) {
    std::vector<double> thinned;
    thinned.reserve(max_levels);
    for (std::size_t k = 0; k < max_levels; ++k) {
      std::size_t idx = k * (levels.size() - 1) / (max_levels - 1);
      thinned.push_back(levels[idx]);
    }
    levels = std::move(thinned);
  }

  const double inv_days = 1.0 / static_cast<double>(sample.n_days);
  double best_level = levels.front();
  bool found = false;
  for (std::size_t k = levels.size(); k-- > 0;) {
    double mass = 0.0;
    for (std::size_t q = 0; q < densities.size(); ++q)
      if (densities[q] >= levels[k]) mass += sample.weights[q] * inv_days;
    if (mass >= rho) {
      best_level = levels[k];
      found = true;
      break;
    }
  }
  if (!found) best_level = levels.front();

  ActivitySpace out;
  out.level = best_level;
  out.region = level_set(field, best_level);
  double covered = 0.0;
  for (std::size_t q = 0; q < densities.size(); ++q)
    if (densities[q] >= best_level) covered += sample.weights[q] * inv_days;
  out.covered_mass = covered;
  return out;
}

}  // namespace mobscope
