#pragma once

#include <string>
#include <vector>

#include "mobscope/common.hpp"

namespace mobscope {

/// Ordered vertex chain with precomputed arc lengths; evaluable by arc length.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const { return vertices_; }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  /// Point at arc length s, clamped to [0, length].
  Point at_arclength(double s) const;
  /// Point at fraction u in [0, 1] of total length.
  Point at_fraction(double u) const { return at_arclength(u * length()); }

 private:
  std::vector<Point> vertices_;
  std::vector<double> cumulative_;  // cumulative_[k] = length of first k segments
};

struct Anchor {
  std::string name;
  Point position;
};

/// Named road connecting two anchors (possibly the same one for loops).
struct Road {
  std::string name;
  std::string from;
  std::string to;
  Polyline path;
};

struct World {
  std::vector<Anchor> anchors;
  std::vector<Road> roads;

  const Anchor& anchor(const std::string& name) const;
  const Road& road(const std::string& name) const;
  void validate() const;
  /// Bounding box over anchors and road vertices.
  void bounding_box(Point& lo, Point& hi) const;
};

/// One step of a day schedule: a stay at an anchor or a move along a road.
/// Durations are truncated-normal in hours; the final stay has no duration
/// parameters and absorbs whatever remains of the 24-hour day.
struct PatternStep {
  enum class Kind { stay, move };
  Kind kind = Kind::stay;
  std::string ref;      // anchor name for stays, road name for moves
  double mu_hours = 0.0;
  double eta_hours = 0.0;
  double q_hours = 0.0;
};

struct ActionPattern {
  double probability = 0.0;
  std::vector<PatternStep> steps;
};

/// Validates one pattern against the world (alternation, endpoint matching,
/// duration ranges).
void validate_pattern(const World& world, const ActionPattern& pattern);
/// Validates the whole set, including probabilities summing to 1.
void validate_patterns(const World& world, const std::vector<ActionPattern>& patterns);

struct WorldModel {
  World world;
  std::vector<ActionPattern> patterns;
};

/// Parses the world + pattern JSON document.
WorldModel parse_world_model(const std::string& json_text);
WorldModel load_world_model(const std::string& path);
std::string world_model_to_json(const WorldModel& model);

/// Built-in six-anchor world with the five commuter/errand/leisure schedules.
const WorldModel& default_world_model();

}  // namespace mobscope
