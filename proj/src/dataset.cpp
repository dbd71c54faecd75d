#include "mobscope/dataset.hpp"

#include <algorithm>
#include <limits>

namespace mobscope {

void GpsDay::validate() const {
  if (times.size() != points.size()) throw data_error("day: timestamp/point count mismatch");
  if (times.size() < 2) throw data_error("day: needs at least 2 observations");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!(times[j] > 0.0 && times[j] < 1.0)) throw data_error("day: timestamps must lie in (0, 1)");
    if (j > 0 && !(times[j] > times[j - 1])) throw data_error("day: timestamps must be strictly increasing");
  }
}

std::size_t GpsDataset::total_observations() const {
  std::size_t n = 0;
  for (const auto& d : days) n += d.size();
  return n;
}

void GpsDataset::validate() const {
  if (days.empty()) throw data_error("dataset: no days");
  for (const auto& d : days) d.validate();
}

std::vector<std::size_t> GpsDataset::canonical_day_order() const {
  std::vector<std::size_t> order(days.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto less = [this](std::size_t a, std::size_t b) {
    const GpsDay& da = days[a];
    const GpsDay& db = days[b];
    if (da.size() != db.size()) return da.size() < db.size();
    for (std::size_t j = 0; j < da.size(); ++j) {
      if (da.times[j] != db.times[j]) return da.times[j] < db.times[j];
      if (da.points[j].x != db.points[j].x) return da.points[j].x < db.points[j].x;
      if (da.points[j].y != db.points[j].y) return da.points[j].y < db.points[j].y;
    }
    return false;
  };
  std::stable_sort(order.begin(), order.end(), less);
  return order;
}

GpsDataset GpsDataset::subset(const std::vector<std::size_t>& day_indices) const {
  GpsDataset out;
  out.days.reserve(day_indices.size());
  for (std::size_t i : day_indices) {
    if (i >= days.size()) throw data_error("subset: day index out of range");
    out.days.push_back(days[i]);
  }
  return out;
}

void GpsDataset::bounding_box(Point& lo, Point& hi) const {
  lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  hi = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& d : days) {
    for (const auto& p : d.points) {
      lo.x = std::min(lo.x, p.x);
      lo.y = std::min(lo.y, p.y);
      hi.x = std::max(hi.x, p.x);
      hi.y = std::max(hi.y, p.y);
    }
  }
}

}  // namespace mobscope
