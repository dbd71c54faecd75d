#include "mobscope/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace mobscope {

SampledDay sample_day(const World& world, const std::vector<ActionPattern>& patterns, Rng& rng) {
  if (patterns.empty()) throw config_error("sample_day: no patterns");
  std::vector<double> probs;
  probs.reserve(patterns.size());
  for (const auto& p : patterns) probs.push_back(p.probability);
  std::size_t chosen = rng.categorical(probs);
  const ActionPattern& pattern = patterns[chosen];

  std::vector<double> hours(pattern.steps.size(), 0.0);
  double used = 0.0;
  for (std::size_t k = 0; k + 1 < pattern.steps.size(); ++k) {
    const PatternStep& step = pattern.steps[k];
    hours[k] = rng.truncated_normal(step.mu_hours, step.eta_hours, step.q_hours);
    used += hours[k];
  }
  if (used >= 24.0)
    throw config_error("sample_day: sampled durations fill the day; shrink mu or q");
  hours.back() = 24.0 - used;

  // Cumulative boundaries divided by the total make the fractions tile [0, 1]
  // exactly; the last boundary is total/total = 1.
  double total = std::accumulate(hours.begin(), hours.end(), 0.0);
  std::vector<Trajectory::Segment> segments;
  segments.reserve(pattern.steps.size());
  double cum = 0.0;
  double prev_frac = 0.0;
  for (std::size_t k = 0; k < pattern.steps.size(); ++k) {
    cum += hours[k];
    double frac = cum / total;
    Trajectory::Segment seg;
    seg.t_start = prev_frac;
    seg.t_end = frac;
    const PatternStep& step = pattern.steps[k];
    if (step.kind == PatternStep::Kind::stay) {
      seg.moving = false;
      seg.hold_point = world.anchor(step.ref).position;
    } else {
      seg.moving = true;
      seg.path = world.road(step.ref).path;
    }
    segments.push_back(std::move(seg));
    prev_frac = frac;
  }
  return SampledDay{chosen, std::move(hours), Trajectory(std::move(segments))};
}

SampledDay sample_day(const World& world, const std::vector<ActionPattern>& patterns,
                      std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return sample_day(world, patterns, rng);
}

namespace {

void sort_strictly_increasing(std::vector<double>& t) {
  std::sort(t.begin(), t.end());
  for (std::size_t j = 1; j < t.size(); ++j) {
    if (t[j] <= t[j - 1]) t[j] = std::nextafter(t[j - 1], 1.0);
  }
}

double silverman_bandwidth(std::vector<double> values) {
  std::size_t n = values.size();
  double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    double pos = q * static_cast<double>(n - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, n - 1);
    double w = pos - static_cast<double>(lo);
    return (1.0 - w) * values[lo] + w * values[hi];
  };
  double iqr = quantile(0.75) - quantile(0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  if (!(spread > 0.0)) spread = 1e-3;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> realistic_timestamps(std::size_t m, const TimestampTemplate& tmpl, Rng& rng) {
  if (tmpl.days.empty()) throw config_error("realistic timestamps need a non-empty template");
  const std::vector<double>& pool = tmpl.days[rng.uniform_index(tmpl.days.size())];
  if (pool.empty()) throw config_error("template day has no timestamps");

  std::vector<double> out;
  if (pool.size() == m) {
    out = pool;
  } else if (pool.size() > m) {
    // Uniform subsample without replacement (partial Fisher-Yates).
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t pick = j + rng.uniform_index(idx.size() - j);
      std::swap(idx[j], idx[pick]);
    }
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j) out.push_back(pool[idx[j]]);
  } else {
    out = pool;
    double bw = silverman_bandwidth(pool);
    while (out.size() < m) {
      double base = pool[rng.uniform_index(pool.size())];
      double t = base + bw * rng.normal();
      t = std::clamp(t, 1e-9, 1.0 - 1e-9);
      out.push_back(t);
    }
  }
  sort_strictly_increasing(out);
  return out;
}

}  // namespace

std::vector<double> generate_timestamps(TimestampMode mode, std::size_t m,
                                        const TimestampTemplate* tmpl, Rng& rng) {
  if (m < 2) throw config_error("generate_timestamps: m must be >= 2");
  std::vector<double> t;
  switch (mode) {
    case TimestampMode::even:
      t.reserve(m);
      for (std::size_t j = 1; j <= m; ++j)
        t.push_back((2.0 * static_cast<double>(j) - 1.0) / (2.0 * static_cast<double>(m)));
      return t;
    case TimestampMode::even_interior:
      t.reserve(m);
      for (std::size_t j = 1; j <= m; ++j)
        t.push_back(static_cast<double>(j) / (static_cast<double>(m) + 1.0));
      return t;
    case TimestampMode::realistic:
      if (tmpl == nullptr) throw config_error("realistic timestamps need a template pool");
      return realistic_timestamps(m, *tmpl, rng);
  }
  throw config_error("generate_timestamps: unknown mode");
}

std::vector<double> generate_timestamps(TimestampMode mode, std::size_t m,
                                        const TimestampTemplate* tmpl, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return generate_timestamps(mode, m, tmpl, rng);
}

GpsDay observe(const Trajectory& traj, const std::vector<double>& times, double sigma, Rng& rng) {
  if (sigma < 0.0) throw config_error("observe: sigma must be >= 0");
  GpsDay day;
  day.times = times;
  day.points.reserve(times.size());
  for (double t : times) {
    Point p = traj.at(t);
    if (sigma > 0.0) {
      p.x += sigma * rng.normal();
      p.y += sigma * rng.normal();
    }
    day.points.push_back(p);
  }
  return day;
}

GpsDay observe(const Trajectory& traj, const std::vector<double>& times, double sigma,
               std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return observe(traj, times, sigma, rng);
}

GpsDataset simulate_dataset(const World& world, const std::vector<ActionPattern>& patterns,
                            const SimulationConfig& cfg) {
  validate_patterns(world, patterns);
  if (cfg.n_days == 0) throw config_error("simulate_dataset: n_days must be >= 1");
  GpsDataset data;
  data.days.resize(cfg.n_days);
  for (std::size_t i = 0; i < cfg.n_days; ++i) {
    Rng rng = Rng::derive(cfg.seed, {0xDA, i});
    SampledDay sd = sample_day(world, patterns, rng);
    std::vector<double> times = generate_timestamps(cfg.mode, cfg.m, cfg.timestamp_template, rng);
    GpsDay day = observe(sd.trajectory, times, cfg.sigma, rng);
    day.pattern_id = static_cast<int>(sd.pattern_index) + 1;
    data.days[i] = std::move(day);
  }
  data.validate();
  return data;
}

const TimestampTemplate& default_skewed_template() {
  static const TimestampTemplate tmpl = [] {
    TimestampTemplate t;
    const std::size_t sizes[] = {347, 521, 433, 389, 612, 296, 458, 503};
    std::size_t p = 0;
    for (std::size_t n : sizes) {
      Rng rng = Rng::derive(0xC0FFEE, {p});
      // Mixture: broad daytime bump + tighter evening bump + thin uniform
      // floor, so night hours are sparsely observed.
      double day_center = rng.uniform(0.42, 0.50);
      double day_sd = rng.uniform(0.07, 0.10);
      double eve_center = rng.uniform(0.78, 0.86);
      double eve_sd = rng.uniform(0.04, 0.07);
      double w_day = rng.uniform(0.46, 0.54);
      double w_eve = rng.uniform(0.20, 0.26);
      std::vector<double> day_times;
      day_times.reserve(n);
      while (day_times.size() < n) {
        double u = rng.uniform();
        double v;
        if (u < w_day)
          v = rng.normal(day_center, day_sd);
        else if (u < w_day + w_eve)
          v = rng.normal(eve_center, eve_sd);
        else
          v = rng.uniform(0.001, 0.999);
        if (v > 0.0005 && v < 0.9995) day_times.push_back(v);
      }
      sort_strictly_increasing(day_times);
      t.days.push_back(std::move(day_times));
      ++p;
    }
    return t;
  }();
  return tmpl;
}

TimestampTemplate load_timestamp_template(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open template file: " + path);
  TimestampTemplate tmpl;
  std::map<long long, std::vector<double>> by_day;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.find("day_id") != std::string::npos) continue;  // header
    std::istringstream ss(line);
    std::string day_str, t_str;
    if (!std::getline(ss, day_str, ',') || !std::getline(ss, t_str, ','))
      throw data_error("template line " + std::to_string(line_no) + ": expected day_id,t");
    try {
      by_day[std::stoll(day_str)].push_back(std::stod(t_str));
    } catch (const std::exception&) {
      throw data_error("template line " + std::to_string(line_no) + ": unparseable values");
    }
  }
  for (auto& [id, times] : by_day) {
    sort_strictly_increasing(times);
    tmpl.days.push_back(std::move(times));
  }
  if (tmpl.days.empty()) throw data_error("template file has no rows: " + path);
  return tmpl;
}

}  // namespace mobscope
