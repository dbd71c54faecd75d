#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "mobscope/simulate.hpp"
#include "mobscope/world.hpp"
#include "test_util.hpp"

using namespace mobscope;
using namespace testutil;

TEST_CASE("default world model is valid and matches the schedule table") {
  const WorldModel& m = default_world_model();
  m.world.validate();
  validate_patterns(m.world, m.patterns);
  CHECK(m.world.anchors.size() == 6);
  CHECK(m.patterns.size() == 5);
  double total = 0.0;
  for (const auto& p : m.patterns) total += p.probability;
  CHECK(std::fabs(total - 1.0) < 1e-9);
  CHECK(m.patterns[0].probability == doctest::Approx(15.0 / 28.0).epsilon(1e-12));
  CHECK(m.patterns[4].steps.size() == 1);  // stay-home day
  // json round trip preserves the model
  WorldModel back = parse_world_model(world_model_to_json(m));
  CHECK(back.world.anchors.size() == m.world.anchors.size());
  CHECK(back.patterns.size() == m.patterns.size());
  CHECK(back.patterns[2].steps[1].mu_hours == m.patterns[2].steps[1].mu_hours);
}

#ifdef MOBSCOPE_SOURCE_DIR
TEST_CASE("shipped world file matches the built-in model") {
  WorldModel shipped = load_world_model(std::string(MOBSCOPE_SOURCE_DIR) + "/data/default_world.json");
  CHECK(world_model_to_json(shipped) == world_model_to_json(default_world_model()));
}
#endif

TEST_CASE("trajectory evaluation: holds, constant speed, continuity") {
  // hold all day
  Trajectory hold = Trajectory::hold_all_day({2.0, 3.0});
  for (double t : {0.0, 0.25, 0.77, 1.0}) {
    CHECK(hold.at(t).x == 2.0);
    CHECK(hold.at(t).y == 3.0);
  }
  // straight unit segment traversed over [0, 0.5]: t = 0.25 is the midpoint
  Trajectory::Segment move;
  move.t_start = 0.0;
  move.t_end = 0.5;
  move.moving = true;
  move.path = Polyline({{0.0, 0.0}, {1.0, 0.0}});
  Trajectory::Segment rest;
  rest.t_start = 0.5;
  rest.t_end = 1.0;
  rest.moving = false;
  rest.hold_point = {1.0, 0.0};
  Trajectory traj({move, rest});
  CHECK(traj.at(0.25).x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(traj.at(0.25).y == 0.0);
  // boundary value agrees from both sides
  CHECK(distance(traj.at(0.5), traj.at(std::nextafter(0.5, 0.0))) < 1e-9);
  CHECK(distance(traj.at(0.5), traj.at(std::nextafter(0.5, 1.0))) < 1e-9);
}

TEST_CASE("sampled days tile the unit interval and stay continuous") {
  const WorldModel& m = default_world_model();
  double worst_gap = 0.0;
  double worst_jump = 0.0;
  int probes = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    SampledDay day = sample_day(m.world, m.patterns, seed);
    const auto& segs = day.trajectory.segments();
    CHECK(segs.front().t_start == 0.0);
    CHECK(segs.back().t_end == 1.0);
    double sum = 0.0;
    for (const auto& s : segs) sum += s.t_end - s.t_start;
    worst_gap = std::max(worst_gap, std::fabs(sum - 1.0));
    for (double b : day.trajectory.boundaries()) {
      double lo = std::max(0.0, b - 1e-13);
      double hi = std::min(1.0, b + 1e-13);
      worst_jump = std::max(worst_jump, distance(day.trajectory.at(lo), day.trajectory.at(hi)));
      ++probes;
    }
    // durations: non-final draws inside the truncation window
    const ActionPattern& pattern = m.patterns[day.pattern_index];
    for (std::size_t k = 0; k + 1 < pattern.steps.size(); ++k) {
      CHECK(day.durations_hours[k] > pattern.steps[k].mu_hours - pattern.steps[k].q_hours);
      CHECK(day.durations_hours[k] < pattern.steps[k].mu_hours + pattern.steps[k].q_hours);
    }
    double hours = 0.0;
    for (double h : day.durations_hours) hours += h;
    CHECK(hours == doctest::Approx(24.0).epsilon(1e-12));
  }
  CHECK(worst_gap < 1e-12);
  CHECK(worst_jump < 1e-9);
  CHECK(probes > 100);
}

TEST_CASE("stay-home pattern gives a single hold over the whole day") {
  WorldModel m = hold_world({1.5, -2.0});
  SampledDay day = sample_day(m.world, m.patterns, 3);
  CHECK(day.trajectory.segments().size() == 1);
  CHECK(day.trajectory.at(0.0).x == 1.5);
  CHECK(day.trajectory.at(0.9).y == -2.0);
  CHECK(day.durations_hours.back() == 24.0);
}

TEST_CASE("pattern frequencies converge to the table probabilities") {
  const WorldModel& m = default_world_model();
  const std::vector<double> expected{15.0 / 28, 5.0 / 28, 4.0 / 28, 1.0 / 28, 3.0 / 28};
  std::vector<int> counts(5, 0);
  const int n = 10000;
  Rng rng(2024);
  for (int k = 0; k < n; ++k) ++counts[sample_day(m.world, m.patterns, rng).pattern_index];
  double chi2 = 0.0;
  for (int i = 0; i < 5; ++i) {
    double freq = static_cast<double>(counts[i]) / n;
    CHECK(std::fabs(freq - expected[i]) < 0.02);
    double e = expected[i] * n;
    chi2 += (counts[i] - e) * (counts[i] - e) / e;
  }
  CHECK(chi2 < 18.4668);  // chi-square(4 dof) quantile at 0.999
}

TEST_CASE("overfull schedules are rejected as configuration errors") {
  WorldModel m = hold_world({0.0, 0.0});
  ActionPattern greedy;
  greedy.probability = 1.0;
  greedy.steps = {{PatternStep::Kind::stay, "a", 23.0, 1.0, 2.0},
                  {PatternStep::Kind::move, "loop", 0.0, 0.0, 0.0}};
  // make it structurally valid: loop road back to the anchor
  m.world.roads = {{"loop", "a", "a", Polyline({{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}})}};
  greedy.steps = {{PatternStep::Kind::stay, "a", 23.0, 1.0, 2.0},
                  {PatternStep::Kind::move, "loop", 0.5, 0.1, 0.3},
                  {PatternStep::Kind::stay, "a", 0.0, 0.0, 0.0}};
  m.patterns = {greedy};
  validate_patterns(m.world, m.patterns);
  bool threw = false;
  for (std::uint64_t seed = 0; seed < 200 && !threw; ++seed) {
    try {
      sample_day(m.world, m.patterns, seed);
    } catch (const config_error&) {
      threw = true;
    }
  }
  CHECK(threw);
}

TEST_CASE("even timestamps: midpoint rule by default, interior lattice behind the flag") {
  Rng rng(1);
  auto t3 = generate_timestamps(TimestampMode::even, 3, nullptr, rng);
  REQUIRE(t3.size() == 3);
  CHECK(t3[0] == 1.0 / 6.0);
  CHECK(t3[1] == 0.5);
  CHECK(t3[2] == 5.0 / 6.0);
  auto t2 = generate_timestamps(TimestampMode::even, 2, nullptr, rng);
  CHECK(t2[0] == 0.25);
  CHECK(t2[1] == 0.75);
  auto a2 = generate_timestamps(TimestampMode::even_interior, 2, nullptr, rng);
  CHECK(a2[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(a2[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(generate_timestamps(TimestampMode::even, 1, nullptr, rng), config_error);
}

TEST_CASE("realistic timestamps: copy, subsample and augment") {
  TimestampTemplate tmpl;
  tmpl.days.push_back({0.1, 0.2, 0.4, 0.5, 0.9});

  Rng rng(11);
  auto exact = generate_timestamps(TimestampMode::realistic, 5, &tmpl, rng);
  CHECK(exact == tmpl.days[0]);

  auto sub = generate_timestamps(TimestampMode::realistic, 3, &tmpl, rng);
  REQUIRE(sub.size() == 3);
  CHECK(std::is_sorted(sub.begin(), sub.end()));
  for (double t : sub) CHECK(std::count(tmpl.days[0].begin(), tmpl.days[0].end(), t) == 1);

  auto aug = generate_timestamps(TimestampMode::realistic, 12, &tmpl, rng);
  REQUIRE(aug.size() == 12);
  for (std::size_t j = 1; j < aug.size(); ++j) CHECK(aug[j] > aug[j - 1]);
  for (double t : aug) {
    CHECK(t > 0.0);
    CHECK(t < 1.0);
  }
  // all template values survive augmentation
  for (double t : tmpl.days[0]) CHECK(std::count(aug.begin(), aug.end(), t) >= 1);

  TimestampTemplate empty;
  CHECK_THROWS_AS(generate_timestamps(TimestampMode::realistic, 4, &empty, rng), config_error);
  CHECK_THROWS_AS(generate_timestamps(TimestampMode::realistic, 4, nullptr, rng), config_error);
}

TEST_CASE("observe: noiseless fixes sit on the trajectory, noise has the right scale") {
  Trajectory hold = Trajectory::hold_all_day({4.0, -1.0});
  Rng rng(3);
  auto times = generate_timestamps(TimestampMode::even, 1439, nullptr, rng);

  GpsDay clean = observe(hold, times, 0.0, 99);
  for (std::size_t j = 0; j < clean.size(); ++j) {
    CHECK(clean.points[j].x == 4.0);
    CHECK(clean.points[j].y == -1.0);
  }

  GpsDay noisy = observe(hold, times, 0.2, 99);
  double mx = 0.0, my = 0.0;
  for (const auto& p : noisy.points) {
    mx += p.x;
    my += p.y;
  }
  mx /= 1439.0;
  my /= 1439.0;
  double sx = 0.0, sy = 0.0;
  for (const auto& p : noisy.points) {
    sx += (p.x - mx) * (p.x - mx);
    sy += (p.y - my) * (p.y - my);
  }
  sx = std::sqrt(sx / 1438.0);
  sy = std::sqrt(sy / 1438.0);
  CHECK(std::fabs(sx - 0.2) < 0.02);
  CHECK(std::fabs(sy - 0.2) < 0.02);

  // zero-mean noise over many draws
  std::vector<double> one_time{0.25, 0.75};
  double sum_dx = 0.0;
  Rng noise_rng(17);
  const int reps = 50000;  // 1e5 coordinates across the two fixes
  for (int k = 0; k < reps; ++k) {
    GpsDay d = observe(hold, one_time, 0.2, noise_rng);
    sum_dx += (d.points[0].x - 4.0) + (d.points[1].x - 4.0);
  }
  double mean_dx = sum_dx / (2.0 * reps);
  CHECK(std::fabs(mean_dx) < 3.0 * 0.2 / std::sqrt(2.0 * reps));
}

TEST_CASE("simulate_dataset is deterministic and day-wise independent") {
  const WorldModel& m = default_world_model();
  SimulationConfig cfg;
  cfg.n_days = 6;
  cfg.m = 30;
  cfg.sigma = 0.1;
  cfg.seed = 31;
  GpsDataset a = simulate_dataset(m.world, m.patterns, cfg);
  GpsDataset b = simulate_dataset(m.world, m.patterns, cfg);
  REQUIRE(a.n_days() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(a.days[i].times == b.days[i].times);
    for (std::size_t j = 0; j < a.days[i].size(); ++j) {
      CHECK(a.days[i].points[j].x == b.days[i].points[j].x);
      CHECK(a.days[i].points[j].y == b.days[i].points[j].y);
    }
    CHECK(a.days[i].pattern_id == b.days[i].pattern_id);
  }
  // skewed default template drives the realistic mode
  cfg.mode = TimestampMode::realistic;
  cfg.timestamp_template = &default_skewed_template();
  GpsDataset c = simulate_dataset(m.world, m.patterns, cfg);
  CHECK(c.n_days() == 6);
  for (const auto& day : c.days) CHECK(day.size() == 30);
}
