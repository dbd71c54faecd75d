#pragma once

#include <string>
#include <vector>

#include "mobscope/kde.hpp"
#include "mobscope/oracle.hpp"
#include "mobscope/simulate.hpp"

namespace mobscope {

/// Reference rule for the smoothing bandwidths:
///   h_X = 0.065 (sqrt(s_{x,1}^2 + s_{x,2}^2) / sum_i m_i)^(1/6)
///   h_T = 0.05 (n / sum_i m_i)^(1/3)
/// with s_{x,l} the time-weighted coordinate spreads under the mid-point
/// weights w_{i,j} = (t_{i,j+1} - t_{i,j-1}) / (2n). A dataset with zero
/// spread gets the floor h_X = 1e-6.
Bandwidths reference_bandwidths(const GpsDataset& data);

/// Integrated squared difference on a shared grid (single-replicate ISE).
double mise(const DensityField& estimate, const DensityField& truth);

/// The rectangular evaluation canvas used for the simulation study: fixed
/// cell size, fixed cell counts, centered on the world plus a noise margin.
GridSpec world_eval_grid(const World& world, double sigma, std::size_t n_x = 121,
                         std::size_t n_y = 99, double cell = 0.2);

enum class EstimatorKind { naive, time_weighted, integrated_conditional };
std::string estimator_name(EstimatorKind kind);

enum class EvalTarget { full_day, interval };

struct ExperimentConfig {
  std::vector<std::size_t> n_values{7, 30};
  std::vector<std::size_t> m_values{159, 479};
  std::vector<double> sigma_values{0.2};
  std::vector<TimestampMode> modes{TimestampMode::even, TimestampMode::realistic};
  std::vector<EstimatorKind> estimators{EstimatorKind::naive, EstimatorKind::time_weighted,
                                        EstimatorKind::integrated_conditional};
  std::vector<EvalTarget> targets{EvalTarget::full_day};
  TimeInterval interval = TimeInterval::from_to(8.0 / 24.0, 10.0 / 24.0);
  std::size_t repetitions = 20;
  std::size_t oracle_draws = 200000;
  std::size_t time_grid_size = 1440;
  std::uint64_t seed = 1;
  const TimestampTemplate* timestamp_template = nullptr;  // default skewed pool when null

  void validate() const;
};

struct MiseRow {
  std::size_t n = 0;
  std::size_t m = 0;
  double sigma = 0.0;
  TimestampMode mode = TimestampMode::even;
  EstimatorKind estimator = EstimatorKind::naive;
  EvalTarget target = EvalTarget::full_day;
  double mise_mean = 0.0;
  double mise_std = 0.0;  // standard error of the mean over repetitions
  std::size_t repetitions = 0;
  std::uint64_t seed = 0;
  std::vector<double> ise_per_rep;  // repetitions share datasets across estimators
};

struct MiseTable {
  std::vector<MiseRow> rows;

  const MiseRow& find(std::size_t n, std::size_t m, double sigma, TimestampMode mode,
                      EstimatorKind estimator, EvalTarget target) const;
};

/// Runs the simulation study: per repetition, simulate, estimate with the
/// reference bandwidths, and score against the Monte Carlo oracle fields
/// (computed once per sigma/target). Fully determined by (cfg, world).
MiseTable run_experiment(const ExperimentConfig& cfg, const World& world,
                         const std::vector<ActionPattern>& patterns);

std::string timestamp_mode_name(TimestampMode mode);
std::string target_name(EvalTarget target);

}  // namespace mobscope
