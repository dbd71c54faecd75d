#pragma once

#include <vector>

#include "mobscope/common.hpp"
#include "mobscope/world.hpp"

namespace mobscope {

/// Continuous day path: holds at points alternating with constant-speed
/// traversals of polylines. Segments tile [0, 1] exactly.
class Trajectory {
 public:
  struct Segment {
    double t_start = 0.0;
    double t_end = 0.0;
    bool moving = false;
    Point hold_point;   // when !moving
    Polyline path;      // when moving; traversed at constant speed
  };

  explicit Trajectory(std::vector<Segment> segments);

  /// Location at time t in [0, 1].
  Point at(double t) const;
  const std::vector<Segment>& segments() const { return segments_; }
  /// Interior segment boundaries (excludes 0 and 1).
  std::vector<double> boundaries() const;

  static Trajectory hold_all_day(Point p);

 private:
  std::vector<Segment> segments_;
  std::vector<double> starts_;
};

}  // namespace mobscope
