#include "mobscope/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "mobscope/eval.hpp"

namespace mobscope {

namespace {

std::string format_double(double v) {
  // Shortest representation that parses back to the same double.
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw data_error("cannot format value");
  return std::string(buf, ptr);
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_int(const std::string& s, long long& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open output file: " + path);
  return out;
}

}  // namespace

GpsDataset ingest_csv(const std::string& path, const IngestOptions& options,
                      IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open input file: " + path);

  std::string line;
  std::size_t line_no = 0;
  int col_day = 0, col_t = 1, col_x = 2, col_y = 3;
  bool have_header = false;

  if (std::getline(in, line)) {
    ++line_no;
    bool alpha = std::any_of(line.begin(), line.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
    if (alpha) {
      have_header = true;
      auto header = split_csv_line(line);
      auto find_col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
      };
      col_day = find_col("day_id");
      col_t = options.epoch ? find_col("epoch_s") : find_col("t");
      col_x = find_col("x");
      col_y = find_col("y");
      std::vector<std::string> missing;
      if (col_day < 0) missing.push_back("day_id");
      if (col_t < 0) missing.push_back(options.epoch ? "epoch_s" : "t");
      if (col_x < 0) missing.push_back("x");
      if (col_y < 0) missing.push_back("y");
      if (!missing.empty()) {
        std::string msg = "missing columns in " + path + ":";
        for (const auto& m : missing) msg += " " + m;
        throw data_error(msg);
      }
    }
  }
  if (!have_header) {
    in.clear();
    in.seekg(0);
    line_no = 0;
  }

  struct Fix {
    double t, x, y;
  };
  std::map<long long, std::vector<Fix>> by_day;
  std::vector<std::size_t> bad_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    int max_col = std::max({col_day, col_t, col_x, col_y});
    long long day_id = 0;
    double t = 0.0, x = 0.0, y = 0.0;
    bool ok = static_cast<int>(fields.size()) > max_col &&
              parse_int(fields[static_cast<std::size_t>(col_day)], day_id) &&
              parse_double(fields[static_cast<std::size_t>(col_t)], t) &&
              parse_double(fields[static_cast<std::size_t>(col_x)], x) &&
              parse_double(fields[static_cast<std::size_t>(col_y)], y);
    if (ok) {
      if (options.epoch) {
        double shifted = t - options.day_start_hour * 3600.0;
        double frac = std::fmod(shifted, 86400.0);
        if (frac < 0.0) frac += 86400.0;
        t = frac / 86400.0;
      } else {
        ok = t >= 0.0 && t < 1.0;
      }
    }
    if (!ok) {
      bad_lines.push_back(line_no);
      continue;
    }
    if (t <= 0.0) t = 1e-9;  // midnight fixes moved just inside the day
    by_day[day_id].push_back({t, x, y});
  }
  if (!bad_lines.empty()) {
    std::string msg = "unparseable rows in " + path + " at lines:";
    for (std::size_t k = 0; k < bad_lines.size() && k < 10; ++k)
      msg += " " + std::to_string(bad_lines[k]);
    if (bad_lines.size() > 10) msg += " (+" + std::to_string(bad_lines.size() - 10) + " more)";
    throw data_error(msg);
  }

  GpsDataset data;
  IngestReport local;
  for (auto& [day_id, fixes] : by_day) {
    std::stable_sort(fixes.begin(), fixes.end(), [](const Fix& a, const Fix& b) { return a.t < b.t; });
    GpsDay day;
    std::size_t j = 0;
    while (j < fixes.size()) {
      std::size_t k = j;
      double sx = 0.0, sy = 0.0;
      while (k < fixes.size() && fixes[k].t == fixes[j].t) {
        sx += fixes[k].x;
        sy += fixes[k].y;
        ++k;
      }
      if (k - j > 1) local.duplicates_collapsed += k - j - 1;
      day.times.push_back(fixes[j].t);
      day.points.push_back({sx / static_cast<double>(k - j), sy / static_cast<double>(k - j)});
      j = k;
    }
    if (day.size() < 2) {
      ++local.days_dropped;
      continue;
    }
    local.day_ids.push_back(day_id);
    data.days.push_back(std::move(day));
  }
  if (data.days.empty()) throw data_error("no usable days in " + path);
  data.validate();
  if (!local.day_ids.empty()) {
    long long span = local.day_ids.back() - local.day_ids.front() + 1;
    local.missing_day_ids = static_cast<std::size_t>(span) - local.day_ids.size();
  }
  if (report != nullptr) *report = std::move(local);
  return data;
}

void export_dataset_csv(const GpsDataset& data, const std::string& path) {
  auto out = open_out(path);
  out << "day_id,t,x,y\n";
  for (std::size_t i = 0; i < data.n_days(); ++i) {
    const GpsDay& day = data.days[i];
    for (std::size_t j = 0; j < day.size(); ++j) {
      out << (i + 1) << ',' << format_double(day.times[j]) << ',' << format_double(day.points[j].x)
          << ',' << format_double(day.points[j].y) << '\n';
    }
  }
}

void export_metadata_csv(const GpsDataset& data, const std::string& path) {
  auto out = open_out(path);
  out << "day_id,pattern\n";
  for (std::size_t i = 0; i < data.n_days(); ++i) {
    out << (i + 1) << ',' << (data.days[i].pattern_id ? *data.days[i].pattern_id : 0) << '\n';
  }
}

void export_density_csv(const DensityField& field, const std::string& path) {
  auto out = open_out(path);
  out << "x_center,y_center,value\n";
  for (std::size_t ix = 0; ix < field.grid.n_x; ++ix) {
    for (std::size_t iy = 0; iy < field.grid.n_y; ++iy) {
      out << format_double(field.grid.center_x(ix)) << ',' << format_double(field.grid.center_y(iy))
          << ',' << format_double(field.at(ix, iy)) << '\n';
    }
  }
}

void export_mask_csv(const RegionMask& mask, const std::string& path) {
  auto out = open_out(path);
  out << "cell_index,x_center,y_center,in_region,level\n";
  for (std::size_t ix = 0; ix < mask.grid.n_x; ++ix) {
    for (std::size_t iy = 0; iy < mask.grid.n_y; ++iy) {
      std::size_t c = mask.grid.index(ix, iy);
      out << c << ',' << format_double(mask.grid.center_x(ix)) << ','
          << format_double(mask.grid.center_y(iy)) << ',' << int(mask.in_region[c]) << ','
          << format_double(mask.level) << '\n';
    }
  }
}

void export_anchors_csv(const std::vector<AnchorEstimate>& anchors, double lambda,
                        const std::string& path) {
  auto out = open_out(path);
  out << "x,y,density,lambda\n";
  for (const auto& a : anchors) {
    out << format_double(a.location.x) << ',' << format_double(a.location.y) << ','
        << format_double(a.density) << ',' << format_double(lambda) << '\n';
  }
}

void export_dendrogram_csv(const Dendrogram& dend, const std::string& path) {
  auto out = open_out(path);
  out << "id_a,id_b,height\n";
  for (const auto& m : dend.merges) {
    out << m.id_a << ',' << m.id_b << ',' << format_double(m.height) << '\n';
  }
}

void export_labels_csv(const ClusterLabels& labels, const std::string& path) {
  auto out = open_out(path);
  out << "day,label,singleton_flag\n";
  for (std::size_t v = 0; v < labels.label.size(); ++v) {
    out << (v + 1) << ',' << labels.label[v] << ',' << int(labels.singleton[v]) << '\n';
  }
}

void export_mise_csv(const MiseTable& table, const std::string& path) {
  auto out = open_out(path);
  out << "n,m,sigma,mode,estimator,target,mise_mean,mise_std,reps,seed\n";
  for (const auto& row : table.rows) {
    out << row.n << ',' << row.m << ',' << format_double(row.sigma) << ','
        << timestamp_mode_name(row.mode) << ',' << estimator_name(row.estimator) << ','
        << target_name(row.target) << ',' << format_double(row.mise_mean) << ','
        << format_double(row.mise_std) << ',' << row.repetitions << ',' << row.seed << '\n';
  }
}

void export_centers_csv(const std::vector<CenterRow>& rows, const std::string& path) {
  auto out = open_out(path);
  out << "cluster,t,x,y,supported\n";
  for (const auto& r : rows) {
    out << r.cluster << ',' << format_double(r.t) << ',' << format_double(r.location.x) << ','
        << format_double(r.location.y) << ',' << int(r.supported) << '\n';
  }
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  if (!reference_bandwidths) {
    if (!(h_x > 0.0)) problems.push_back("h_x must be > 0");
    if (!(h_t > 0.0) || h_t > 0.5) problems.push_back("h_t must be in (0, 0.5]");
  }
  if (!auto_grid) {
    try {
      grid.validate();
    } catch (const std::exception& e) {
      problems.push_back(e.what());
    }
  } else {
    if (grid_nx < 1 || grid_ny < 1) problems.push_back("grid cell counts must be >= 1");
  }
  if (time_grid_size < 2) problems.push_back("time_grid_size must be >= 2");
  if (!(xi > 0.0)) problems.push_back("xi must be > 0");
  if (!(sigma > 0.0)) problems.push_back("sigma must be > 0");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw config_error(msg);
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config JSON parse failure: ") + e.what());
  }
  RunConfig cfg;
  try {
    if (doc.contains("bandwidths")) {
      const auto& b = doc["bandwidths"];
      if (b.is_string() && b.get<std::string>() == "reference") {
        cfg.reference_bandwidths = true;
      } else {
        cfg.reference_bandwidths = false;
        cfg.h_x = b.at("h_x").get<double>();
        cfg.h_t = b.at("h_t").get<double>();
      }
    }
    if (doc.contains("grid")) {
      const auto& g = doc["grid"];
      if (g.is_string() && g.get<std::string>() == "auto") {
        cfg.auto_grid = true;
      } else {
        cfg.auto_grid = false;
        cfg.grid.x_min = g.at("x_min").get<double>();
        cfg.grid.y_min = g.at("y_min").get<double>();
        cfg.grid.n_x = g.at("n_x").get<std::size_t>();
        cfg.grid.n_y = g.at("n_y").get<std::size_t>();
        cfg.grid.cell_dx = g.at("cell_dx").get<double>();
        cfg.grid.cell_dy = g.at("cell_dy").get<double>();
      }
    }
    cfg.grid_margin = doc.value("grid_margin", cfg.grid_margin);
    cfg.grid_nx = doc.value("grid_nx", cfg.grid_nx);
    cfg.grid_ny = doc.value("grid_ny", cfg.grid_ny);
    cfg.time_grid_size = doc.value("time_grid_size", cfg.time_grid_size);
    cfg.xi = doc.value("xi", cfg.xi);
    cfg.sigma = doc.value("sigma", cfg.sigma);
    if (doc.contains("interval")) {
      const auto& iv = doc["interval"];
      cfg.interval = TimeInterval::from_to(iv.at("start").get<double>(), iv.at("end").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config JSON schema failure: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

GridSpec auto_grid_for(const GpsDataset& data, const RunConfig& cfg, double h_x) {
  Point lo, hi;
  data.bounding_box(lo, hi);
  double margin = cfg.grid_margin >= 0.0 ? cfg.grid_margin : 3.0 * cfg.sigma + 4.0 * h_x;
  GridSpec grid;
  grid.n_x = cfg.grid_nx;
  grid.n_y = cfg.grid_ny;
  grid.x_min = lo.x - margin;
  grid.y_min = lo.y - margin;
  grid.cell_dx = (hi.x - lo.x + 2.0 * margin) / static_cast<double>(grid.n_x);
  grid.cell_dy = (hi.y - lo.y + 2.0 * margin) / static_cast<double>(grid.n_y);
  if (!(grid.cell_dx > 0.0)) grid.cell_dx = 1e-3;
  if (!(grid.cell_dy > 0.0)) grid.cell_dy = 1e-3;
  return grid;
}

Bandwidths bandwidths_for(const GpsDataset& data, const RunConfig& cfg) {
  if (cfg.reference_bandwidths) return reference_bandwidths(data);
  Bandwidths bw;
  bw.h_x = cfg.h_x;
  bw.h_t = cfg.h_t;
  bw.validate();
  return bw;
}

void save_text(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
}

}  // namespace mobscope
