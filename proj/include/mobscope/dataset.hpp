#pragma once

#include <optional>
#include <vector>

#include "mobscope/common.hpp"
#include "mobscope/grid.hpp"

namespace mobscope {

/// One day of GPS fixes: strictly increasing timestamps in (0,1) paired with
/// planar observations.
struct GpsDay {
  std::vector<double> times;
  std::vector<Point> points;
  /// True action-pattern index when the day was simulated (1-based).
  std::optional<int> pattern_id;

  std::size_t size() const { return times.size(); }
  void validate() const;
};

struct GpsDataset {
  std::vector<GpsDay> days;

  std::size_t n_days() const { return days.size(); }
  std::size_t total_observations() const;
  void validate() const;

  /// Day indices ordered by content (size, then timestamps, then coordinates).
  /// Reductions over days iterate in this order so that results do not depend
  /// on how the days happen to be listed.
  std::vector<std::size_t> canonical_day_order() const;

  /// Subset restricted to the given day indices (metadata preserved).
  GpsDataset subset(const std::vector<std::size_t>& day_indices) const;

  /// Axis-aligned bounding box of all observations.
  void bounding_box(Point& lo, Point& hi) const;
};

}  // namespace mobscope
