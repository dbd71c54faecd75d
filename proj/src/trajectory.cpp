#include "mobscope/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace mobscope {

Trajectory::Trajectory(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw config_error("trajectory has no segments");
  if (segments_.front().t_start != 0.0 || segments_.back().t_end != 1.0)
    throw config_error("trajectory must span [0, 1]");
  starts_.reserve(segments_.size());
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const Segment& s = segments_[k];
    if (!(s.t_end > s.t_start)) throw config_error("trajectory segment has nonpositive duration");
    if (k > 0) {
      if (s.t_start != segments_[k - 1].t_end) throw config_error("trajectory segments must tile [0, 1]");
      Point prev_end = segments_[k - 1].moving ? segments_[k - 1].path.vertices().back()
                                               : segments_[k - 1].hold_point;
      Point next_start = s.moving ? s.path.vertices().front() : s.hold_point;
      if (distance(prev_end, next_start) > 1e-9)
        throw config_error("trajectory segments must be spatially continuous");
    }
    starts_.push_back(s.t_start);
  }
}

Point Trajectory::at(double t) const {
  if (t < 0.0 || t > 1.0) throw config_error("trajectory time must be in [0, 1]");
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  std::size_t k = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
  const Segment& s = segments_[k];
  if (!s.moving) return s.hold_point;
  double u = (t - s.t_start) / (s.t_end - s.t_start);
  return s.path.at_fraction(u);
}

std::vector<double> Trajectory::boundaries() const {
  std::vector<double> b;
  for (std::size_t k = 1; k < segments_.size(); ++k) b.push_back(segments_[k].t_start);
  return b;
}

Trajectory Trajectory::hold_all_day(Point p) {
  Segment s;
  s.t_start = 0.0;
  s.t_end = 1.0;
  s.moving = false;
  s.hold_point = p;
  return Trajectory({s});
}

}  // namespace mobscope
