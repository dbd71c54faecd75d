#pragma once

#include <cstdint>
#include <vector>

#include "mobscope/common.hpp"
#include "mobscope/dataset.hpp"
#include "mobscope/trajectory.hpp"
#include "mobscope/world.hpp"

namespace mobscope {

struct SampledDay {
  std::size_t pattern_index = 0;        // 0-based index into the pattern set
  std::vector<double> durations_hours;  // one entry per step, final stay included
  Trajectory trajectory;
};

/// Draws a pattern by its probability, draws truncated-normal durations for
/// the non-final steps, gives the final stay the remainder of the 24-hour day
/// and assembles the constant-speed trajectory. Throws config_error when the
/// sampled non-final durations already reach 24 hours.
SampledDay sample_day(const World& world, const std::vector<ActionPattern>& patterns, Rng& rng);
SampledDay sample_day(const World& world, const std::vector<ActionPattern>& patterns,
                      std::uint64_t rng_seed);

enum class TimestampMode {
  even,           // t_j = (2j - 1) / (2m)
  even_interior,  // t_j = j / (m + 1), i.e. one fix every 1440/(m+1) minutes
  realistic,      // resampled from a template day's timestamp pool
};

/// Pool of per-day timestamp vectors used by the realistic mode.
struct TimestampTemplate {
  std::vector<std::vector<double>> days;
};

/// Returns m sorted, strictly increasing timestamps in (0, 1).
/// Realistic mode picks one template day, subsamples it uniformly when it is
/// larger than m, and augments it with draws from a Gaussian kernel estimate
/// of its timestamp distribution (Silverman bandwidth) when smaller.
std::vector<double> generate_timestamps(TimestampMode mode, std::size_t m,
                                        const TimestampTemplate* tmpl, Rng& rng);
std::vector<double> generate_timestamps(TimestampMode mode, std::size_t m,
                                        const TimestampTemplate* tmpl, std::uint64_t rng_seed);

/// Observes the trajectory at the given times under isotropic Gaussian noise.
GpsDay observe(const Trajectory& traj, const std::vector<double>& times, double sigma, Rng& rng);
GpsDay observe(const Trajectory& traj, const std::vector<double>& times, double sigma,
               std::uint64_t rng_seed);

struct SimulationConfig {
  std::size_t n_days = 30;
  std::size_t m = 479;
  double sigma = 0.2;
  TimestampMode mode = TimestampMode::even;
  const TimestampTemplate* timestamp_template = nullptr;  // required for realistic mode
  std::uint64_t seed = 1;
};

/// Simulates n_days independent days. Each day uses its own random stream
/// derived from (seed, day), so the result is independent of evaluation
/// order. Day metadata records the 1-based pattern id.
GpsDataset simulate_dataset(const World& world, const std::vector<ActionPattern>& patterns,
                            const SimulationConfig& cfg);

/// Built-in skewed timestamp pool: daytime and evening usage bumps over a thin
/// uniform floor, so nighttime hours are heavily under-sampled.
const TimestampTemplate& default_skewed_template();

/// Loads a template pool from a CSV with columns day_id,t.
TimestampTemplate load_timestamp_template(const std::string& path);

}  // namespace mobscope
