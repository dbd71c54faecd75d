#pragma once

#include <cmath>
#include <vector>

#include "mobscope/dataset.hpp"
#include "mobscope/grid.hpp"
#include "mobscope/world.hpp"

namespace testutil {

using namespace mobscope;

/// Two anchors joined by one straight unit-speed road; pattern stays at a,
/// crosses, stays at b.
inline WorldModel straight_road_world(Point a, Point b, double stay_a_h, double move_h,
                                      double eta = 0.2, double q = 0.5) {
  WorldModel m;
  m.world.anchors = {{"a", a}, {"b", b}};
  m.world.roads = {{"ab", "a", "b", Polyline({a, b})}};
  ActionPattern p;
  p.probability = 1.0;
  p.steps = {{PatternStep::Kind::stay, "a", stay_a_h, eta, q},
             {PatternStep::Kind::move, "ab", move_h, eta / 2.0, q / 2.0},
             {PatternStep::Kind::stay, "b", 0.0, 0.0, 0.0}};
  m.patterns = {p};
  return m;
}

/// Single-anchor world whose only pattern holds there all day.
inline WorldModel hold_world(Point a) {
  WorldModel m;
  m.world.anchors = {{"a", a}};
  ActionPattern p;
  p.probability = 1.0;
  p.steps = {{PatternStep::Kind::stay, "a", 0.0, 0.0, 0.0}};
  m.patterns = {p};
  return m;
}

inline GridSpec square_grid(double x_min, double y_min, std::size_t n, double cell) {
  GridSpec g;
  g.x_min = x_min;
  g.y_min = y_min;
  g.n_x = n;
  g.n_y = n;
  g.cell_dx = cell;
  g.cell_dy = cell;
  return g;
}

/// max |a - b| over cells.
inline double sup_diff(const DensityField& a, const DensityField& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.values.size(); ++c)
    s = std::max(s, std::fabs(a.values[c] - b.values[c]));
  return s;
}

/// max |a - b| / max |a|.
inline double rel_sup_diff(const DensityField& a, const DensityField& b) {
  double scale = 0.0;
  for (double v : a.values) scale = std::max(scale, std::fabs(v));
  return scale > 0.0 ? sup_diff(a, b) / scale : sup_diff(a, b);
}

/// One day with explicit times, all observations at the same point.
inline GpsDay day_at(Point p, std::vector<double> times) {
  GpsDay d;
  d.times = std::move(times);
  d.points.assign(d.times.size(), p);
  return d;
}

/// Mass of the field within radius r of center (cell-center quadrature).
inline double ball_mass(const DensityField& f, Point center, double r) {
  double s = 0.0;
  for (std::size_t ix = 0; ix < f.grid.n_x; ++ix) {
    for (std::size_t iy = 0; iy < f.grid.n_y; ++iy) {
      Point c{f.grid.center_x(ix), f.grid.center_y(iy)};
      if (distance(c, center) <= r) s += f.at(ix, iy);
    }
  }
  return s * f.grid.cell_area();
}

}  // namespace testutil
