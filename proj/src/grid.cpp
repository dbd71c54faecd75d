#include "mobscope/grid.hpp"

#include <algorithm>
#include <cmath>

namespace mobscope {

void GridSpec::validate() const {
  if (n_x < 1 || n_y < 1) throw config_error("GridSpec: cell counts must be >= 1");
  if (!(cell_dx > 0.0) || !(cell_dy > 0.0)) throw config_error("GridSpec: cell sizes must be > 0");
  if (!std::isfinite(x_min) || !std::isfinite(y_min)) throw config_error("GridSpec: origin must be finite");
}

double DensityField::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_area();
}

std::size_t DensityField::argmax_cell() const {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

double DensityField::max_value() const {
  return *std::max_element(values.begin(), values.end());
}

void require_same_grid(const DensityField& a, const DensityField& b) {
  if (!(a.grid == b.grid)) throw data_error("fields are defined on different grids");
}

TimeInterval::TimeInterval(double s, double len) : start(s), length(len) {
  if (!(len > 0.0) || len > 1.0 + 1e-12) throw config_error("TimeInterval: length must be in (0, 1]");
  if (s < 0.0 || s >= 1.0) throw config_error("TimeInterval: start must be in [0, 1)");
  length = std::min(length, 1.0);
}

TimeInterval TimeInterval::from_to(double a, double b) {
  if (a < 0.0 || a >= 1.0 || b < 0.0 || b > 1.0) throw config_error("TimeInterval: endpoints must be in [0, 1]");
  if (a == b) throw config_error("TimeInterval: empty interval");
  double len = b > a ? b - a : 1.0 - a + b;
  return TimeInterval(a, len);
}

bool TimeInterval::contains(double t) const {
  if (is_full()) return true;
  double d = t - start;
  if (d < 0.0) d += 1.0;
  return d >= 0.0 && d < length;
}

}  // namespace mobscope
