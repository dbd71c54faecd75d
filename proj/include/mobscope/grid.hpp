#pragma once

#include <cstddef>
#include <vector>

#include "mobscope/common.hpp"

namespace mobscope {

/// Rectangular evaluation lattice. Cell (ix, iy) has its center at
/// (x_min + (ix + 0.5) dx, y_min + (iy + 0.5) dy).
struct GridSpec {
  double x_min = 0.0;
  double y_min = 0.0;
  std::size_t n_x = 1;
  std::size_t n_y = 1;
  double cell_dx = 1.0;
  double cell_dy = 1.0;

  void validate() const;
  std::size_t cells() const { return n_x * n_y; }
  double cell_area() const { return cell_dx * cell_dy; }
  double center_x(std::size_t ix) const { return x_min + (static_cast<double>(ix) + 0.5) * cell_dx; }
  double center_y(std::size_t iy) const { return y_min + (static_cast<double>(iy) + 0.5) * cell_dy; }
  std::size_t index(std::size_t ix, std::size_t iy) const { return ix * n_y + iy; }
  bool operator==(const GridSpec& o) const = default;
};

/// Density values per unit area at cell centers, x-major storage.
struct DensityField {
  GridSpec grid;
  std::vector<double> values;

  DensityField() = default;
  explicit DensityField(const GridSpec& g) : grid(g), values(g.cells(), 0.0) {}

  double& at(std::size_t ix, std::size_t iy) { return values[grid.index(ix, iy)]; }
  double at(std::size_t ix, std::size_t iy) const { return values[grid.index(ix, iy)]; }

  /// Midpoint-rule integral over the grid.
  double integral() const;
  /// Cell index holding the maximum value (first in x-major order on ties).
  std::size_t argmax_cell() const;
  double max_value() const;
};

/// Requires matching grids; throws data_error otherwise.
void require_same_grid(const DensityField& a, const DensityField& b);

/// Evaluation times {(l + 0.5) / n_t, l = 0..n_t-1}.
struct TimeGrid {
  std::size_t n_t = 1440;

  explicit TimeGrid(std::size_t n = 1440) : n_t(n) {
    if (n_t < 2) throw config_error("TimeGrid: n_t must be >= 2");
  }
  double time(std::size_t l) const { return (static_cast<double>(l) + 0.5) / static_cast<double>(n_t); }
};

/// Circular arc on the day circle [0,1) with identified endpoints: starts at
/// `start` and extends forward by `length`, possibly wrapping past 1.
struct TimeInterval {
  double start = 0.0;
  double length = 1.0;

  TimeInterval() = default;
  TimeInterval(double s, double len);
  /// Arc from a forward to b (wrapping if b <= a); a == b is rejected.
  static TimeInterval from_to(double a, double b);
  static TimeInterval full() { return TimeInterval(0.0, 1.0); }

  bool is_full() const { return length >= 1.0; }
  bool contains(double t) const;
};

}  // namespace mobscope
