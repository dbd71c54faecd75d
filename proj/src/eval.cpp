#include "mobscope/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mobscope {

Bandwidths reference_bandwidths(const GpsDataset& data) {
  data.validate();
  const double n = static_cast<double>(data.n_days());
  const double total = static_cast<double>(data.total_observations());

  double mu_x = 0.0, mu_y = 0.0;
  std::vector<std::vector<double>> w(data.n_days());
  auto order = data.canonical_day_order();
  for (std::size_t i : order) {
    w[i] = time_weights(data.days[i]);
    for (double& v : w[i]) v /= n;
    for (std::size_t j = 0; j < data.days[i].size(); ++j) {
      mu_x += w[i][j] * data.days[i].points[j].x;
      mu_y += w[i][j] * data.days[i].points[j].y;
    }
  }
  double sx2 = 0.0, sy2 = 0.0;
  for (std::size_t i : order) {
    for (std::size_t j = 0; j < data.days[i].size(); ++j) {
      const Point p = data.days[i].points[j];
      sx2 += w[i][j] * (p.x - mu_x) * (p.x - mu_x);
      sy2 += w[i][j] * (p.y - mu_y) * (p.y - mu_y);
    }
  }
  double spread = std::sqrt(sx2 + sy2);

  Bandwidths bw;
  bw.h_t = 0.05 * std::cbrt(n / total);
  bw.h_x = spread > 0.0 ? 0.065 * std::pow(spread / total, 1.0 / 6.0) : 1e-6;
  bw.validate();
  return bw;
}

double mise(const DensityField& estimate, const DensityField& truth) {
  require_same_grid(estimate, truth);
  double acc = 0.0;
  for (std::size_t c = 0; c < estimate.values.size(); ++c) {
    double d = estimate.values[c] - truth.values[c];
    acc += d * d;
  }
  return acc * estimate.grid.cell_area();
}

GridSpec world_eval_grid(const World& world, double sigma, std::size_t n_x, std::size_t n_y,
                         double cell) {
  Point lo, hi;
  world.bounding_box(lo, hi);
  const double margin = 3.0 * sigma;
  const double span_x = static_cast<double>(n_x) * cell;
  const double span_y = static_cast<double>(n_y) * cell;
  if (hi.x - lo.x + 2.0 * margin > span_x || hi.y - lo.y + 2.0 * margin > span_y)
    throw config_error("world does not fit the evaluation canvas");
  GridSpec grid;
  grid.n_x = n_x;
  grid.n_y = n_y;
  grid.cell_dx = cell;
  grid.cell_dy = cell;
  grid.x_min = (lo.x + hi.x) / 2.0 - span_x / 2.0;
  grid.y_min = (lo.y + hi.y) / 2.0 - span_y / 2.0;
  return grid;
}

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::naive: return "naive";
    case EstimatorKind::time_weighted: return "fw";
    case EstimatorKind::integrated_conditional: return "fc";
  }
  return "?";
}

std::string timestamp_mode_name(TimestampMode mode) {
  switch (mode) {
    case TimestampMode::even: return "even";
    case TimestampMode::even_interior: return "even-interior";
    case TimestampMode::realistic: return "realistic";
  }
  return "?";
}

std::string target_name(EvalTarget target) {
  return target == EvalTarget::full_day ? "full" : "interval";
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw config_error("experiment: repetitions must be >= 1");
  if (n_values.empty() || m_values.empty() || sigma_values.empty() || modes.empty() ||
      estimators.empty() || targets.empty())
    throw config_error("experiment: empty parameter axis");
  for (std::size_t m : m_values)
    if (m < 2) throw config_error("experiment: m must be >= 2");
  for (double s : sigma_values)
    if (!(s > 0.0)) throw config_error("experiment: sigma must be > 0");
  if (oracle_draws < 1) throw config_error("experiment: oracle_draws must be >= 1");
}

const MiseRow& MiseTable::find(std::size_t n, std::size_t m, double sigma, TimestampMode mode,
                               EstimatorKind estimator, EvalTarget target) const {
  for (const auto& row : rows) {
    if (row.n == n && row.m == m && row.sigma == sigma && row.mode == mode &&
        row.estimator == estimator && row.target == target)
      return row;
  }
  throw data_error("mise table: row not found");
}

MiseTable run_experiment(const ExperimentConfig& cfg, const World& world,
                         const std::vector<ActionPattern>& patterns) {
  cfg.validate();
  validate_patterns(world, patterns);
  const TimestampTemplate* tmpl = cfg.timestamp_template;
  if (tmpl == nullptr) tmpl = &default_skewed_template();

  const bool wants_interval =
      std::find(cfg.targets.begin(), cfg.targets.end(), EvalTarget::interval) != cfg.targets.end();
  const bool wants_full =
      std::find(cfg.targets.begin(), cfg.targets.end(), EvalTarget::full_day) != cfg.targets.end();

  // Oracle truth per (sigma, target), shared across all configurations.
  std::map<std::pair<double, EvalTarget>, DensityField> truth;
  std::map<double, GridSpec> grids;
  for (double sigma : cfg.sigma_values) {
    GridSpec grid = world_eval_grid(world, sigma);
    grids[sigma] = grid;
    if (wants_full) {
      truth.emplace(std::make_pair(sigma, EvalTarget::full_day),
                    true_density_oracle(world, patterns, sigma, grid, cfg.oracle_draws,
                                        cfg.seed ^ 0x0AC1Eull)
                        .mean);
    }
    if (wants_interval) {
      truth.emplace(std::make_pair(sigma, EvalTarget::interval),
                    interval_oracle(world, patterns, sigma, grid, cfg.oracle_draws,
                                    cfg.seed ^ 0x0AC2Eull, cfg.interval)
                        .mean);
    }
  }

  MiseTable table;
  const TimeGrid tg(cfg.time_grid_size);
  std::uint64_t config_index = 0;
  for (double sigma : cfg.sigma_values) {
    const GridSpec& grid = grids[sigma];
    for (TimestampMode mode : cfg.modes) {
      for (std::size_t n : cfg.n_values) {
        for (std::size_t m : cfg.m_values) {
          ++config_index;
          // ise[target][estimator] accumulates per-repetition values.
          std::map<std::pair<EvalTarget, EstimatorKind>, RunningMoments> ise;
          std::map<std::pair<EvalTarget, EstimatorKind>, std::vector<double>> ise_values;
          for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
            SimulationConfig sim;
            sim.n_days = n;
            sim.m = m;
            sim.sigma = sigma;
            sim.mode = mode;
            sim.timestamp_template = mode == TimestampMode::realistic ? tmpl : nullptr;
            sim.seed = Rng::derive(cfg.seed, {0x5E, config_index, rep}).uniform_index(
                UINT64_MAX - 1);
            GpsDataset data = simulate_dataset(world, patterns, sim);
            Bandwidths bw = reference_bandwidths(data);

            DayWeights integrated;
            bool have_integrated = false;
            for (EstimatorKind est : cfg.estimators) {
              if (est == EstimatorKind::integrated_conditional && !have_integrated) {
                integrated = integrated_conditional_weights(data, bw, tg);
                have_integrated = true;
              }
              if (wants_full) {
                DensityField f;
                switch (est) {
                  case EstimatorKind::naive: f = naive_kde(data, bw.h_x, grid); break;
                  case EstimatorKind::time_weighted: f = time_weighted_kde(data, bw.h_x, grid); break;
                  case EstimatorKind::integrated_conditional:
                    f = weighted_kde(data, integrated, bw.h_x, grid);
                    break;
                }
                double v = mise(f, truth.at({sigma, EvalTarget::full_day}));
                ise[{EvalTarget::full_day, est}].add(v);
                ise_values[{EvalTarget::full_day, est}].push_back(v);
              }
              if (wants_interval) {
                DensityField f;
                switch (est) {
                  case EstimatorKind::naive: {
                    // Interval analogue of the naive estimator: in-interval
                    // observations, equal weights.
                    f = interval_naive(data, bw.h_x, grid, cfg.interval);
                    break;
                  }
                  case EstimatorKind::time_weighted:
                    f = interval_kde(data, bw, grid, cfg.interval, IntervalEstimator::weighted, tg);
                    break;
                  case EstimatorKind::integrated_conditional:
                    f = interval_kde(data, bw, grid, cfg.interval, IntervalEstimator::conditional,
                                     tg);
                    break;
                }
                double v = mise(f, truth.at({sigma, EvalTarget::interval}));
                ise[{EvalTarget::interval, est}].add(v);
                ise_values[{EvalTarget::interval, est}].push_back(v);
              }
            }
          }
          for (EvalTarget target : cfg.targets) {
            for (EstimatorKind est : cfg.estimators) {
              const RunningMoments& acc = ise[{target, est}];
              MiseRow row;
              row.n = n;
              row.m = m;
              row.sigma = sigma;
              row.mode = mode;
              row.estimator = est;
              row.target = target;
              row.mise_mean = acc.mean();
              row.mise_std = acc.std_error();
              row.repetitions = acc.count();
              row.seed = cfg.seed;
              row.ise_per_rep = ise_values[{target, est}];
              table.rows.push_back(row);
            }
          }
        }
      }
    }
  }
  return table;
}

}  // namespace mobscope
