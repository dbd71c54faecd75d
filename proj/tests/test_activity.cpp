#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mobscope/activity.hpp"
#include "mobscope/simulate.hpp"
#include "test_util.hpp"

using namespace mobscope;
using namespace testutil;

TEST_CASE("anchor level threshold") {
  CHECK(anchor_level_threshold(8.0 / 24.0, 0.2) == doctest::Approx(1.3262911924).epsilon(1e-9));
  CHECK(anchor_level_threshold(1e-9, 0.2) == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  double base = anchor_level_threshold(0.3, 0.1);
  CHECK(anchor_level_threshold(0.3, 0.2) == doctest::Approx(base / 4.0).epsilon(1e-12));
  CHECK_THROWS_AS(anchor_level_threshold(0.3, 0.0), config_error);
}

TEST_CASE("identification bounds: closed forms and edge cases") {
  // rho = 0.5, r = sigma: 0.5 * (1 - e^{-1/2})
  CHECK(region_mass_lower_bound(0.5, 0.2, 0.2) == doctest::Approx(0.19673467014).epsilon(1e-9));
  CHECK(region_mass_lower_bound(0.0, 1.0, 0.2) == 0.0);

  ActivityProbabilityBound full = activity_probability_lower_bound(1.0, 0.3, 0.2);
  CHECK(full.value == 1.0);
  CHECK_FALSE(full.vacuous);

  // F = 0.05 with G = 0.9 leaves nothing: vacuous, clamped at zero.
  double r = 0.2 * std::sqrt(-2.0 * std::log(0.95));
  ActivityProbabilityBound weak = activity_probability_lower_bound(0.9, r, 0.2);
  CHECK(weak.vacuous);
  CHECK(weak.value == 0.0);
  CHECK_THROWS_AS(region_mass_lower_bound(0.5, -1.0, 0.2), config_error);
}

TEST_CASE("level sets: thresholds and nesting") {
  GpsDataset data;
  data.days.push_back(day_at({0.0, 0.0}, {0.3, 0.7}));
  GridSpec grid = square_grid(-2.05, -2.05, 41, 0.1);
  DensityField f = naive_kde(data, 0.15, grid);

  RegionMask everything = level_set(f, 0.0);
  CHECK(everything.count() == grid.cells());  // zero level keeps all cells

  RegionMask positive = level_set(f, 1e-300);
  for (std::size_t c = 0; c < f.values.size(); ++c)
    CHECK(positive.in_region[c] == (f.values[c] > 0.0 ? 1 : 0));

  RegionMask empty = level_set(f, f.max_value() * 1.0001);
  CHECK(empty.count() == 0);

  RegionMask lo = level_set(f, 0.3);
  RegionMask hi = level_set(f, 0.8);
  for (std::size_t c = 0; c < lo.in_region.size(); ++c)
    if (hi.in_region[c]) CHECK(lo.in_region[c]);
  CHECK(hi.area() <= lo.area());
  CHECK(lo.area() == doctest::Approx(static_cast<double>(lo.count()) * 0.01));
}

TEST_CASE("weighted edf masses") {
  GpsDataset data;
  data.days.push_back(day_at({0.0, 0.0}, {0.25, 0.75}));
  data.days.push_back(day_at({4.0, 0.0}, {0.25, 0.75}));
  DayWeights w = midpoint_weights(data);
  WeightedEdf edf = weighted_edf(data, w);
  CHECK(edf.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(edf.mass_where([](Point) { return true; }) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(edf.mass_where([](Point p) { return p.x < 2.0; }) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(edf.mass_where([](Point p) { return p.x > 10.0; }) == 0.0);

  DayWeights bad = w;
  bad.w.pop_back();
  CHECK_THROWS_AS(weighted_edf(data, bad), data_error);
}

TEST_CASE("anchor detection: unimodal, bimodal, stability") {
  const double h = 0.15;
  GridSpec grid = square_grid(-3.05, -3.05, 61, 0.1);

  GpsDataset one;
  one.days.push_back(day_at({0.4, -0.2}, {0.3, 0.7}));
  DayWeights w1 = midpoint_weights(one);
  WeightedEdf s1 = weighted_edf(one, w1);
  DensityField f1 = weighted_kde(one, w1, h, grid);
  auto anchors1 = detect_anchors_at_level(f1, s1, h, 0.5);
  REQUIRE(anchors1.size() == 1);
  CHECK(distance(anchors1[0].location, {0.4, -0.2}) < 0.01);
  CHECK(anchors1[0].density == doctest::Approx(1.0 / (2.0 * kPi * h * h)).epsilon(1e-6));

  // Two bumps farther apart than 6h: two anchors, each at the half-plane argmax.
  GpsDataset two;
  two.days.push_back(day_at({-1.2, 0.0}, {0.2, 0.45}));
  two.days.push_back(day_at({1.2, 0.1}, {0.55, 0.8}));
  DayWeights w2 = midpoint_weights(two);
  WeightedEdf s2 = weighted_edf(two, w2);
  DensityField f2 = weighted_kde(two, w2, h, grid);
  auto anchors2 = detect_anchors_at_level(f2, s2, h, 0.1);
  REQUIRE(anchors2.size() == 2);
  auto brute_argmax = [&](bool left) {
    Point best{0, 0};
    double best_v = -1.0;
    for (std::size_t ix = 0; ix < grid.n_x; ++ix) {
      double x = grid.center_x(ix);
      if (left != (x < 0.0)) continue;
      for (std::size_t iy = 0; iy < grid.n_y; ++iy) {
        if (f2.at(ix, iy) > best_v) {
          best_v = f2.at(ix, iy);
          best = {x, grid.center_y(iy)};
        }
      }
    }
    return best;
  };
  std::sort(anchors2.begin(), anchors2.end(),
            [](const AnchorEstimate& a, const AnchorEstimate& b) { return a.location.x < b.location.x; });
  CHECK(distance(anchors2[0].location, brute_argmax(true)) < 0.12);
  CHECK(distance(anchors2[1].location, brute_argmax(false)) < 0.12);

  // Stable under day permutation and under duplicating a day.
  GpsDataset permuted;
  permuted.days = {two.days[1], two.days[0]};
  DayWeights wp = midpoint_weights(permuted);
  auto anchors_p = detect_anchors_at_level(weighted_kde(permuted, wp, h, grid),
                                           weighted_edf(permuted, wp), h, 0.1);
  REQUIRE(anchors_p.size() == 2);
  std::sort(anchors_p.begin(), anchors_p.end(),
            [](const AnchorEstimate& a, const AnchorEstimate& b) { return a.location.x < b.location.x; });
  CHECK(distance(anchors_p[0].location, anchors2[0].location) < 1e-9);
  CHECK(distance(anchors_p[1].location, anchors2[1].location) < 1e-9);

  GpsDataset dup;
  dup.days = {two.days[0], two.days[1], two.days[1]};
  DayWeights wd = midpoint_weights(dup);
  auto anchors_d = detect_anchors_at_level(weighted_kde(dup, wd, h, grid),
                                           weighted_edf(dup, wd), h, 0.1);
  REQUIRE(anchors_d.size() == 2);
  std::sort(anchors_d.begin(), anchors_d.end(),
            [](const AnchorEstimate& a, const AnchorEstimate& b) { return a.location.x < b.location.x; });
  CHECK(distance(anchors_d[0].location, anchors2[0].location) < 0.05);
  CHECK(distance(anchors_d[1].location, anchors2[1].location) < 0.05);
}

namespace {

struct SpaceFixture {
  GpsDataset data;
  DayWeights weights;
  WeightedEdf edf;
  DensityField field;
  std::vector<double> densities;

  SpaceFixture(std::size_t n_days, std::size_t m, std::uint64_t seed, double h,
               const GridSpec& grid) {
    const WorldModel& w = default_world_model();
    SimulationConfig cfg;
    cfg.n_days = n_days;
    cfg.m = m;
    cfg.sigma = 0.2;
    cfg.seed = seed;
    data = simulate_dataset(w.world, w.patterns, cfg);
    weights = midpoint_weights(data);
    edf = weighted_edf(data, weights);
    field = weighted_kde(data, weights, h, grid);
    densities = weighted_kde_at(data, weights, h, edf.points);
  }
};

}  // namespace

TEST_CASE("activity space: coverage, nesting, degenerate case") {
  GridSpec grid;
  grid.x_min = -0.1;
  grid.y_min = -1.1;
  grid.n_x = 121;
  grid.n_y = 99;
  grid.cell_dx = 0.2;
  grid.cell_dy = 0.2;
  SpaceFixture fx(3, 40, 17, 0.3, grid);

  double prev_area = 0.0;
  RegionMask prev_mask;
  bool have_prev = false;
  for (double rho : {0.5, 0.7, 0.9, 0.99}) {
    ActivitySpace space = activity_space(fx.field, fx.edf, fx.densities, rho);
    CHECK(space.covered_mass >= rho);
    if (have_prev) {
      for (std::size_t c = 0; c < space.region.in_region.size(); ++c)
        if (prev_mask.in_region[c]) CHECK(space.region.in_region[c]);
      CHECK(space.region.area() >= prev_area);
    }
    prev_mask = space.region;
    prev_area = space.region.area();
    have_prev = true;
  }

  // All observations identical: the top region contains the point at any rho.
  GpsDataset flat;
  flat.days.push_back(day_at({2.0, 2.0}, {0.3, 0.7}));
  DayWeights w = midpoint_weights(flat);
  WeightedEdf edf = weighted_edf(flat, w);
  DensityField f = weighted_kde(flat, w, 0.2, grid);
  auto dens = weighted_kde_at(flat, w, 0.2, edf.points);
  for (double rho : {0.1, 0.5, 0.9}) {
    ActivitySpace space = activity_space(f, edf, dens, rho);
    CHECK(space.covered_mass == doctest::Approx(1.0).epsilon(1e-12));
    std::size_t ix = static_cast<std::size_t>((2.0 - grid.x_min) / grid.cell_dx);
    std::size_t iy = static_cast<std::size_t>((2.0 - grid.y_min) / grid.cell_dy);
    CHECK(space.region.in_region[grid.index(ix, iy)] == 1);
  }
  CHECK_THROWS_AS(activity_space(f, edf, dens, 1.0), config_error);
}

TEST_CASE("fast activity space equals the level-scan definition") {
  GridSpec grid;
  grid.x_min = -0.1;
  grid.y_min = -1.1;
  grid.n_x = 121;
  grid.n_y = 99;
  grid.cell_dx = 0.2;
  grid.cell_dy = 0.2;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SpaceFixture fx(4, 25, seed, 0.25, grid);  // 100 observations
    for (double rho : {0.5, 0.7, 0.9, 0.99}) {
      ActivitySpace fast = activity_space(fx.field, fx.edf, fx.densities, rho);
      ActivitySpace scan = activity_space_by_level_scan(fx.field, fx.edf, fx.densities, rho);
      CHECK(fast.level == scan.level);
      CHECK(fast.region.in_region == scan.region.in_region);
    }
  }
}

TEST_CASE("activity space ties: equal densities enter together") {
  // Four identical-weight points, two sharing the same (isolated) density.
  GridSpec grid = square_grid(-5.05, -5.05, 101, 0.1);
  GpsDataset data;
  GpsDay day;
  day.times = {0.2, 0.4, 0.6, 0.8};
  day.points = {{-3.0, 0.0}, {3.0, 0.0}, {0.0, -3.0}, {0.0, 3.1}};
  data.days.push_back(day);
  DayWeights w = midpoint_weights(data);
  WeightedEdf edf = weighted_edf(data, w);
  DensityField f = weighted_kde(data, w, 0.2, grid);
  auto dens = weighted_kde_at(data, w, 0.2, edf.points);
  // the two x-axis points have exactly symmetric configurations
  ActivitySpace space = activity_space(f, edf, dens, 0.6);
  CHECK(space.covered_mass >= 0.6);
}
