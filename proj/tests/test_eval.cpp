#include <cmath>

#include "doctest.h"
#include "mobscope/eval.hpp"
#include "test_util.hpp"

using namespace mobscope;
using namespace testutil;

TEST_CASE("reference bandwidths: floor, temporal rule, scaling identity") {
  // zero spread: h_x floor, h_t from the counts alone
  GpsDataset flat;
  {
    GpsDay d;
    Rng rng(1);
    d.times = generate_timestamps(TimestampMode::even, 8, nullptr, rng);
    d.points.assign(8, Point{3.0, -1.0});
    flat.days.push_back(d);
  }
  Bandwidths bw0 = reference_bandwidths(flat);
  CHECK(bw0.h_x == 1e-6);
  CHECK(bw0.h_t == doctest::Approx(0.025).epsilon(1e-12));

  // 30 days x 479 fixes: h_t = 0.05 (30/14370)^{1/3}
  const WorldModel& w = default_world_model();
  SimulationConfig cfg;
  cfg.n_days = 30;
  cfg.m = 479;
  cfg.sigma = 0.2;
  cfg.seed = 4;
  GpsDataset sim = simulate_dataset(w.world, w.patterns, cfg);
  Bandwidths bw = reference_bandwidths(sim);
  CHECK(bw.h_t == doctest::Approx(0.006390352767).epsilon(1e-9));
  CHECK(bw.h_x > 0.0);
  CHECK(bw.h_x < 0.1);

  // scaling the coordinates by c scales the spread by c and h_x per the rule
  const double c = 3.7;
  GpsDataset scaled = sim;
  for (auto& day : scaled.days)
    for (auto& p : day.points) p = c * p;
  // independent spread computation straight from the definition
  auto spread_of = [](const GpsDataset& data) {
    double n = static_cast<double>(data.n_days());
    double mu_x = 0.0, mu_y = 0.0;
    std::vector<std::vector<double>> w(data.n_days());
    for (std::size_t i = 0; i < data.n_days(); ++i) {
      w[i] = time_weights(data.days[i]);
      for (std::size_t j = 0; j < data.days[i].size(); ++j) {
        mu_x += w[i][j] / n * data.days[i].points[j].x;
        mu_y += w[i][j] / n * data.days[i].points[j].y;
      }
    }
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < data.n_days(); ++i)
      for (std::size_t j = 0; j < data.days[i].size(); ++j) {
        sx += w[i][j] / n * std::pow(data.days[i].points[j].x - mu_x, 2);
        sy += w[i][j] / n * std::pow(data.days[i].points[j].y - mu_y, 2);
      }
    return std::sqrt(sx + sy);
  };
  double expected = 0.065 * std::pow(spread_of(scaled) / 14370.0, 1.0 / 6.0);
  CHECK(reference_bandwidths(scaled).h_x == doctest::Approx(expected).epsilon(1e-12));
  CHECK(reference_bandwidths(scaled).h_t == bw.h_t);
}

TEST_CASE("mise: zero, constant offset, symmetry") {
  GridSpec unit = square_grid(0.0, 0.0, 10, 0.1);  // total area exactly 1
  DensityField a(unit), b(unit);
  for (std::size_t c = 0; c < a.values.size(); ++c) a.values[c] = 0.3 + 0.01 * c;
  CHECK(mise(a, a) == 0.0);
  b = a;
  for (double& v : b.values) v += 0.25;
  CHECK(mise(a, b) == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(mise(a, b) == mise(b, a));
  DensityField other(square_grid(0.0, 0.0, 5, 0.1));
  CHECK_THROWS_AS(mise(a, other), data_error);
}

TEST_CASE("world evaluation canvas covers the world with its noise margin") {
  const WorldModel& m = default_world_model();
  GridSpec grid = world_eval_grid(m.world, 0.2);
  CHECK(grid.n_x == 121);
  CHECK(grid.n_y == 99);
  CHECK(grid.cell_dx == 0.2);
  Point lo, hi;
  m.world.bounding_box(lo, hi);
  CHECK(grid.x_min <= lo.x - 0.6);
  CHECK(grid.y_min <= lo.y - 0.6);
  CHECK(grid.x_min + 121 * 0.2 >= hi.x + 0.6);
  CHECK(grid.y_min + 99 * 0.2 >= hi.y + 0.6);
}

TEST_CASE("noise level and interval orderings match the benchmark behavior") {
  const WorldModel& m = default_world_model();
  ExperimentConfig cfg;
  cfg.n_values = {7};
  cfg.m_values = {159};
  cfg.sigma_values = {0.2, 0.1};
  cfg.modes = {TimestampMode::realistic};
  cfg.targets = {EvalTarget::full_day, EvalTarget::interval};
  cfg.repetitions = 20;
  cfg.oracle_draws = 150000;
  cfg.seed = 23;
  MiseTable t = run_experiment(cfg, m.world, m.patterns);

  // Sharper truth (smaller noise) is harder to estimate.
  for (EstimatorKind est : cfg.estimators) {
    const MiseRow& coarse = t.find(7, 159, 0.2, TimestampMode::realistic, est, EvalTarget::full_day);
    const MiseRow& sharp = t.find(7, 159, 0.1, TimestampMode::realistic, est, EvalTarget::full_day);
    double slack = 2.0 * std::sqrt(coarse.mise_std * coarse.mise_std + sharp.mise_std * sharp.mise_std);
    CHECK(sharp.mise_mean > coarse.mise_mean - slack);
  }

  // Morning-interval target keeps the integrated-conditional estimator ahead.
  auto paired_gap = [](const MiseRow& a, const MiseRow& b) {
    RunningMoments d;
    for (std::size_t r = 0; r < a.ise_per_rep.size(); ++r) d.add(a.ise_per_rep[r] - b.ise_per_rep[r]);
    return std::make_pair(d.mean(), d.std_error());
  };
  const MiseRow& inv = t.find(7, 159, 0.2, TimestampMode::realistic, EstimatorKind::naive,
                              EvalTarget::interval);
  const MiseRow& ifw = t.find(7, 159, 0.2, TimestampMode::realistic, EstimatorKind::time_weighted,
                              EvalTarget::interval);
  const MiseRow& ifc = t.find(7, 159, 0.2, TimestampMode::realistic,
                              EstimatorKind::integrated_conditional, EvalTarget::interval);
  auto [g1, s1] = paired_gap(inv, ifc);
  auto [g2, s2] = paired_gap(ifw, ifc);
  CHECK(ifc.mise_mean < ifw.mise_mean);
  CHECK(ifc.mise_mean < inv.mise_mean);
  CHECK(g1 > 2.0 * s1);
  CHECK(g2 > 2.0 * s2);
}

TEST_CASE("averaging per-day conditionals is no better than the pooled estimator") {
  const WorldModel& m = default_world_model();
  GridSpec grid = world_eval_grid(m.world, 0.2);
  DensityField truth = true_density_oracle(m.world, m.patterns, 0.2, grid, 150000, 91).mean;
  TimeGrid tg(288);

  RunningMoments pooled_ise, averaged_ise;
  for (std::uint64_t rep = 0; rep < 4; ++rep) {
    SimulationConfig sim;
    sim.n_days = 10;
    sim.m = 159;
    sim.sigma = 0.2;
    sim.mode = TimestampMode::realistic;
    sim.timestamp_template = &default_skewed_template();
    sim.seed = 700 + rep;
    GpsDataset data = simulate_dataset(m.world, m.patterns, sim);
    Bandwidths bw = reference_bandwidths(data);

    DensityField pooled = integrated_conditional_kde(data, bw, grid, tg);
    DensityField averaged(grid);
    for (std::size_t l = 0; l < tg.n_t; ++l) {
      DensityField slice = daily_average_conditional(data, bw, grid, tg.time(l));
      for (std::size_t c = 0; c < averaged.values.size(); ++c) averaged.values[c] += slice.values[c];
    }
    for (double& v : averaged.values) v /= static_cast<double>(tg.n_t);
    pooled_ise.add(mise(pooled, truth));
    averaged_ise.add(mise(averaged, truth));
  }
  CHECK(averaged_ise.mean() >= pooled_ise.mean());
}

TEST_CASE("default-world oracle keeps its mass on the evaluation canvas") {
  const WorldModel& m = default_world_model();
  GridSpec grid = world_eval_grid(m.world, 0.2);
  OracleField oracle = true_density_oracle(m.world, m.patterns, 0.2, grid, 20000, 17);
  CHECK(oracle.mean.integral() >= 0.99);
  CHECK(oracle.mean.integral() <= 1.000001);
  for (double v : oracle.mean.values) CHECK(v >= 0.0);
}

TEST_CASE("experiment runner: determinism and even-spacing estimator identity") {
  const WorldModel& m = default_world_model();
  ExperimentConfig cfg;
  cfg.n_values = {3};
  cfg.m_values = {24};
  cfg.sigma_values = {0.2};
  cfg.modes = {TimestampMode::even};
  cfg.targets = {EvalTarget::full_day};
  cfg.repetitions = 2;
  cfg.oracle_draws = 3000;
  cfg.time_grid_size = 96;
  cfg.seed = 11;

  MiseTable t1 = run_experiment(cfg, m.world, m.patterns);
  MiseTable t2 = run_experiment(cfg, m.world, m.patterns);
  REQUIRE(t1.rows.size() == t2.rows.size());
  for (std::size_t r = 0; r < t1.rows.size(); ++r) {
    CHECK(t1.rows[r].mise_mean == t2.rows[r].mise_mean);
    CHECK(t1.rows[r].mise_std == t2.rows[r].mise_std);
  }

  const MiseRow& naive = t1.find(3, 24, 0.2, TimestampMode::even, EstimatorKind::naive,
                                 EvalTarget::full_day);
  const MiseRow& fw = t1.find(3, 24, 0.2, TimestampMode::even, EstimatorKind::time_weighted,
                              EvalTarget::full_day);
  CHECK(fw.mise_mean == doctest::Approx(naive.mise_mean).epsilon(1e-9));
  CHECK(t1.find(3, 24, 0.2, TimestampMode::even, EstimatorKind::integrated_conditional,
                EvalTarget::full_day)
            .mise_mean > 0.0);
}
