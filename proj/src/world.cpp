#include "mobscope/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mobscope {

using nlohmann::json;

Polyline::Polyline(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) throw config_error("polyline needs at least 2 vertices");
  cumulative_.resize(vertices_.size());
  cumulative_[0] = 0.0;
  for (std::size_t k = 1; k < vertices_.size(); ++k) {
    cumulative_[k] = cumulative_[k - 1] + distance(vertices_[k - 1], vertices_[k]);
  }
  if (!(length() > 0.0)) throw config_error("polyline has zero length");
}

Point Polyline::at_arclength(double s) const {
  if (s <= 0.0) return vertices_.front();
  if (s >= length()) return vertices_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t k = static_cast<std::size_t>(it - cumulative_.begin());  // segment (k-1, k)
  double seg_len = cumulative_[k] - cumulative_[k - 1];
  double u = seg_len > 0.0 ? (s - cumulative_[k - 1]) / seg_len : 0.0;
  return vertices_[k - 1] + u * (vertices_[k] - vertices_[k - 1]);
}

const Anchor& World::anchor(const std::string& name) const {
  for (const auto& a : anchors)
    if (a.name == name) return a;
  throw config_error("unknown anchor: " + name);
}

const Road& World::road(const std::string& name) const {
  for (const auto& r : roads)
    if (r.name == name) return r;
  throw config_error("unknown road: " + name);
}

void World::validate() const {
  if (anchors.empty()) throw config_error("world has no anchors");
  std::set<std::string> names;
  for (const auto& a : anchors) {
    if (!names.insert(a.name).second) throw config_error("duplicate anchor name: " + a.name);
  }
  std::set<std::string> road_names;
  for (const auto& r : roads) {
    if (!road_names.insert(r.name).second) throw config_error("duplicate road name: " + r.name);
    const Anchor& from = anchor(r.from);
    const Anchor& to = anchor(r.to);
    if (r.path.vertices().size() < 2) throw config_error("road " + r.name + " has fewer than 2 vertices");
    if (!(r.path.length() > 0.0)) throw config_error("road " + r.name + " has zero length");
    if (distance(r.path.vertices().front(), from.position) > 1e-9)
      throw config_error("road " + r.name + " does not start at anchor " + r.from);
    if (distance(r.path.vertices().back(), to.position) > 1e-9)
      throw config_error("road " + r.name + " does not end at anchor " + r.to);
  }
}

void World::bounding_box(Point& lo, Point& hi) const {
  lo = {1e300, 1e300};
  hi = {-1e300, -1e300};
  auto grow = [&](Point p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  };
  for (const auto& a : anchors) grow(a.position);
  for (const auto& r : roads)
    for (const auto& v : r.path.vertices()) grow(v);
}

void validate_pattern(const World& world, const ActionPattern& pattern) {
  if (pattern.steps.empty()) throw config_error("pattern has no steps");
  if (!(pattern.probability >= 0.0)) throw config_error("pattern probability must be nonnegative");
  if (pattern.steps.front().kind != PatternStep::Kind::stay ||
      pattern.steps.back().kind != PatternStep::Kind::stay)
    throw config_error("pattern must begin and end with a stay");
  double mu_sum = 0.0;
  for (std::size_t k = 0; k < pattern.steps.size(); ++k) {
    const PatternStep& step = pattern.steps[k];
    bool expect_stay = (k % 2 == 0);
    if ((step.kind == PatternStep::Kind::stay) != expect_stay)
      throw config_error("pattern steps must alternate stay/move");
    if (step.kind == PatternStep::Kind::stay) {
      world.anchor(step.ref);
    } else {
      const Road& road = world.road(step.ref);
      if (road.from != pattern.steps[k - 1].ref || road.to != pattern.steps[k + 1].ref)
        throw config_error("road " + step.ref + " does not connect the adjacent stays");
    }
    bool final_step = (k + 1 == pattern.steps.size());
    if (!final_step) {
      if (!(step.eta_hours > 0.0)) throw config_error("non-final step needs eta > 0");
      if (step.q_hours < 0.0) throw config_error("step q must be >= 0");
      if (!(step.mu_hours > 0.0)) throw config_error("non-final step needs mu > 0");
      mu_sum += step.mu_hours;
    }
  }
  if (!(mu_sum < 24.0)) throw config_error("non-final expected durations must sum below 24 hours");
}

void validate_patterns(const World& world, const std::vector<ActionPattern>& patterns) {
  if (patterns.empty()) throw config_error("no patterns given");
  double total = 0.0;
  for (const auto& p : patterns) {
    validate_pattern(world, p);
    total += p.probability;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw config_error("pattern probabilities must sum to 1");
}

namespace {

WorldModel parse_model_json(const json& doc) {
  WorldModel model;
  for (const auto& a : doc.at("anchors")) {
    model.world.anchors.push_back({a.at("name").get<std::string>(),
                                   {a.at("x").get<double>(), a.at("y").get<double>()}});
  }
  for (const auto& r : doc.value("roads", json::array())) {
    std::vector<Point> vertices;
    for (const auto& v : r.at("vertices")) {
      vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    }
    model.world.roads.push_back({r.at("name").get<std::string>(), r.at("from").get<std::string>(),
                                 r.at("to").get<std::string>(), Polyline(std::move(vertices))});
  }
  model.world.validate();
  for (const auto& p : doc.value("patterns", json::array())) {
    ActionPattern pattern;
    pattern.probability = p.at("prob").get<double>();
    for (const auto& s : p.at("steps")) {
      PatternStep step;
      std::string type = s.at("type").get<std::string>();
      if (type == "stay")
        step.kind = PatternStep::Kind::stay;
      else if (type == "move")
        step.kind = PatternStep::Kind::move;
      else
        throw config_error("step type must be \"stay\" or \"move\"");
      step.ref = s.at("ref").get<std::string>();
      step.mu_hours = s.value("mu_h", 0.0);
      step.eta_hours = s.value("eta_h", 0.0);
      step.q_hours = s.value("q_h", 0.0);
      pattern.steps.push_back(std::move(step));
    }
    model.patterns.push_back(std::move(pattern));
  }
  if (!model.patterns.empty()) validate_patterns(model.world, model.patterns);
  return model;
}

}  // namespace

WorldModel parse_world_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("world JSON parse failure: ") + e.what());
  }
  try {
    return parse_model_json(doc);
  } catch (const json::exception& e) {
    throw config_error(std::string("world JSON schema failure: ") + e.what());
  }
}

WorldModel load_world_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open world file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_world_model(buf.str());
}

std::string world_model_to_json(const WorldModel& model) {
  json doc;
  doc["anchors"] = json::array();
  for (const auto& a : model.world.anchors) {
    doc["anchors"].push_back({{"name", a.name}, {"x", a.position.x}, {"y", a.position.y}});
  }
  doc["roads"] = json::array();
  for (const auto& r : model.world.roads) {
    json vertices = json::array();
    for (const auto& v : r.path.vertices()) vertices.push_back({v.x, v.y});
    doc["roads"].push_back({{"name", r.name}, {"from", r.from}, {"to", r.to}, {"vertices", vertices}});
  }
  doc["patterns"] = json::array();
  for (const auto& p : model.patterns) {
    json steps = json::array();
    for (std::size_t k = 0; k < p.steps.size(); ++k) {
      const PatternStep& s = p.steps[k];
      json step{{"type", s.kind == PatternStep::Kind::stay ? "stay" : "move"}, {"ref", s.ref}};
      if (k + 1 < p.steps.size()) {
        step["mu_h"] = s.mu_hours;
        step["eta_h"] = s.eta_hours;
        step["q_h"] = s.q_hours;
      }
      steps.push_back(std::move(step));
    }
    doc["patterns"].push_back({{"prob", p.probability}, {"steps", steps}});
  }
  return doc.dump(2);
}

namespace {

// Six named locations on a 24.2 x 19.8 canvas (0.2-unit evaluation cells) and
// the five day schedules. The park is a pass-through landmark on the evening
// loop; no schedule stays there.
const char* kDefaultWorldJson = R"json({
  "anchors": [
    {"name": "home",        "x": 6.0,  "y": 5.0},
    {"name": "office",      "x": 16.0, "y": 13.0},
    {"name": "restaurant",  "x": 19.5, "y": 14.5},
    {"name": "supermarket", "x": 4.0,  "y": 3.3},
    {"name": "beach",       "x": 19.0, "y": 2.5},
    {"name": "park",        "x": 5.0,  "y": 9.0}
  ],
  "roads": [
    {"name": "home-office", "from": "home", "to": "office",
     "vertices": [[6.0, 5.0], [9.0, 6.5], [12.0, 10.0], [16.0, 13.0]]},
    {"name": "office-home", "from": "office", "to": "home",
     "vertices": [[16.0, 13.0], [12.5, 9.0], [8.5, 5.5], [6.0, 5.0]]},
    {"name": "park-loop", "from": "home", "to": "home",
     "vertices": [[6.0, 5.0], [5.6, 7.1], [5.0, 9.0], [3.9, 7.3], [6.0, 5.0]]},
    {"name": "office-restaurant", "from": "office", "to": "restaurant",
     "vertices": [[16.0, 13.0], [19.5, 14.5]]},
    {"name": "restaurant-home", "from": "restaurant", "to": "home",
     "vertices": [[19.5, 14.5], [16.0, 15.5], [11.0, 12.0], [7.5, 7.5], [6.0, 5.0]]},
    {"name": "home-supermarket", "from": "home", "to": "supermarket",
     "vertices": [[6.0, 5.0], [6.2, 3.3], [5.0, 2.3], [3.4, 2.2], [2.6, 3.4], [4.0, 3.3]]},
    {"name": "supermarket-home", "from": "supermarket", "to": "home",
     "vertices": [[4.0, 3.3], [2.6, 3.4], [3.4, 2.2], [5.0, 2.3], [6.2, 3.3], [6.0, 5.0]]},
    {"name": "home-beach", "from": "home", "to": "beach",
     "vertices": [[6.0, 5.0], [10.0, 3.5], [14.5, 3.0], [19.0, 2.5]]},
    {"name": "beach-home", "from": "beach", "to": "home",
     "vertices": [[19.0, 2.5], [14.5, 3.0], [10.0, 3.5], [6.0, 5.0]]}
  ],
  "patterns": [
    {"prob": 0.5357142857142857, "steps": [
      {"type": "stay", "ref": "home",        "mu_h": 9.0, "eta_h": 0.15, "q_h": 0.5},
      {"type": "move", "ref": "home-office", "mu_h": 0.5, "eta_h": 0.08, "q_h": 0.25},
      {"type": "stay", "ref": "office",      "mu_h": 8.0, "eta_h": 0.15, "q_h": 0.5},
      {"type": "move", "ref": "office-home", "mu_h": 0.6, "eta_h": 0.08, "q_h": 0.25},
      {"type": "stay", "ref": "home",        "mu_h": 2.0, "eta_h": 0.2,  "q_h": 0.6},
      {"type": "move", "ref": "park-loop",   "mu_h": 1.0, "eta_h": 0.06, "q_h": 0.15},
      {"type": "stay", "ref": "home"}
    ]},
    {"prob": 0.17857142857142858, "steps": [
      {"type": "stay", "ref": "home",              "mu_h": 8.5,  "eta_h": 0.15, "q_h": 0.5},
      {"type": "move", "ref": "home-office",       "mu_h": 0.5,  "eta_h": 0.08, "q_h": 0.25},
      {"type": "stay", "ref": "office",            "mu_h": 8.0,  "eta_h": 0.15, "q_h": 0.5},
      {"type": "move", "ref": "office-restaurant", "mu_h": 0.75, "eta_h": 0.08, "q_h": 0.25},
      {"type": "stay", "ref": "restaurant",        "mu_h": 1.0,  "eta_h": 0.08, "q_h": 0.25},
      {"type": "move", "ref": "restaurant-home",   "mu_h": 0.4,  "eta_h": 0.08, "q_h": 0.25},
      {"type": "stay", "ref": "home",              "mu_h": 0.95, "eta_h": 0.1,  "q_h": 0.3},
      {"type": "move", "ref": "park-loop",         "mu_h": 1.0,  "eta_h": 0.06, "q_h": 0.15},
      {"type": "stay", "ref": "home"}
    ]},
    {"prob": 0.14285714285714285, "steps": [
      {"type": "stay", "ref": "home",             "mu_h": 11.0, "eta_h": 0.3,  "q_h": 1.0},
      {"type": "move", "ref": "home-supermarket", "mu_h": 0.75, "eta_h": 0.15, "q_h": 0.45},
      {"type": "stay", "ref": "supermarket",      "mu_h": 2.5,  "eta_h": 0.3,  "q_h": 1.0},
      {"type": "move", "ref": "supermarket-home", "mu_h": 0.75, "eta_h": 0.15, "q_h": 0.45},
      {"type": "stay", "ref": "home"}
    ]},
    {"prob": 0.03571428571428571, "steps": [
      {"type": "stay", "ref": "home",       "mu_h": 10.0, "eta_h": 0.3,  "q_h": 1.0},
      {"type": "move", "ref": "home-beach", "mu_h": 0.8,  "eta_h": 0.3,  "q_h": 0.7},
      {"type": "stay", "ref": "beach",      "mu_h": 5.7,  "eta_h": 0.35, "q_h": 1.0},
      {"type": "move", "ref": "beach-home", "mu_h": 0.8,  "eta_h": 0.3,  "q_h": 0.7},
      {"type": "stay", "ref": "home"}
    ]},
    {"prob": 0.10714285714285714, "steps": [
      {"type": "stay", "ref": "home"}
    ]}
  ]
})json";

}  // namespace

const WorldModel& default_world_model() {
  static const WorldModel model = parse_world_model(kDefaultWorldJson);
  return model;
}

}  // namespace mobscope
