#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mobscope/io.hpp"
#include "mobscope/simulate.hpp"
#include "test_util.hpp"

using namespace mobscope;
using namespace testutil;

namespace {

std::filesystem::path tmp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

}  // namespace

TEST_CASE("dataset export/ingest round trip is exact") {
  const WorldModel& w = default_world_model();
  SimulationConfig cfg;
  cfg.n_days = 4;
  cfg.m = 37;
  cfg.sigma = 0.17;
  cfg.mode = TimestampMode::realistic;
  cfg.timestamp_template = &default_skewed_template();
  cfg.seed = 8;
  GpsDataset data = simulate_dataset(w.world, w.patterns, cfg);

  auto path = tmp_path("mobscope_roundtrip.csv");
  export_dataset_csv(data, path.string());
  GpsDataset back = ingest_csv(path.string());
  REQUIRE(back.n_days() == data.n_days());
  for (std::size_t i = 0; i < data.n_days(); ++i) {
    REQUIRE(back.days[i].size() == data.days[i].size());
    for (std::size_t j = 0; j < data.days[i].size(); ++j) {
      CHECK(back.days[i].times[j] == data.days[i].times[j]);
      CHECK(back.days[i].points[j].x == data.days[i].points[j].x);
      CHECK(back.days[i].points[j].y == data.days[i].points[j].y);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("ingest: grouping, dropped days, duplicate collapse") {
  auto path = tmp_path("mobscope_ingest.csv");
  write_file(path,
             "day_id,t,x,y\n"
             "1,0.2,1.0,2.0\n"
             "1,0.4,1.5,2.5\n"
             "1,0.6,2.0,3.0\n"
             "2,0.3,0.0,0.0\n"
             "2,0.5,1.0,1.0\n"
             "2,0.7,2.0,2.0\n"
             "3,0.5,9.0,9.0\n");
  IngestReport report;
  GpsDataset data = ingest_csv(path.string(), {}, &report);
  CHECK(data.n_days() == 2);
  CHECK(data.days[0].size() == 3);
  CHECK(data.days[1].size() == 3);
  CHECK(report.days_dropped == 1);  // the single-fix day
  CHECK(report.day_ids == std::vector<long long>{1, 2});

  // duplicates collapse to the coordinate mean
  write_file(path,
             "day_id,t,x,y\n"
             "1,0.2,1.0,2.0\n"
             "1,0.5,4.0,0.0\n"
             "1,0.5,2.0,2.0\n");
  GpsDataset dup = ingest_csv(path.string(), {}, &report);
  REQUIRE(dup.days[0].size() == 2);
  CHECK(dup.days[0].points[1].x == 3.0);
  CHECK(dup.days[0].points[1].y == 1.0);
  CHECK(report.duplicates_collapsed == 1);
  std::filesystem::remove(path);
}

TEST_CASE("ingest: epoch timestamps map to day fractions") {
  auto path = tmp_path("mobscope_epoch.csv");
  write_file(path,
             "day_id,epoch_s,x,y\n"
             "1,0,0.0,0.0\n"
             "1,43200,1.0,1.0\n"
             "1,64800,2.0,2.0\n");
  IngestOptions opts;
  opts.epoch = true;
  GpsDataset data = ingest_csv(path.string(), opts);
  REQUIRE(data.days[0].size() == 3);
  CHECK(data.days[0].times[0] == 1e-9);  // midnight nudged inside the day
  CHECK(data.days[0].times[1] == 0.5);
  CHECK(data.days[0].times[2] == 0.75);

  // day-start shift: 6am boundary moves midnight fixes to 0.75 of the day
  opts.day_start_hour = 6.0;
  GpsDataset shifted = ingest_csv(path.string(), opts);
  CHECK(shifted.days[0].times[0] == 0.25);   // noon
  CHECK(shifted.days[0].times[1] == 0.5);    // 6 pm
  CHECK(shifted.days[0].times[2] == 0.75);   // midnight
  std::filesystem::remove(path);
}

TEST_CASE("ingest errors: missing columns, bad rows, empty result") {
  auto path = tmp_path("mobscope_bad.csv");
  write_file(path, "day_id,t,x\n1,0.5,1.0\n");
  CHECK_THROWS_WITH_AS(ingest_csv(path.string()), doctest::Contains("missing columns"), data_error);

  write_file(path, "day_id,t,x,y\n1,0.5,oops,1.0\n1,0.6,1.0,1.0\n");
  CHECK_THROWS_WITH_AS(ingest_csv(path.string()), doctest::Contains("lines: 2"), data_error);

  write_file(path, "day_id,t,x,y\n");
  CHECK_THROWS_AS(ingest_csv(path.string()), data_error);

  CHECK_THROWS_AS(ingest_csv("/nonexistent/nowhere.csv"), config_error);
  std::filesystem::remove(path);
}

TEST_CASE("exporters write the documented headers") {
  auto path = tmp_path("mobscope_export.csv");

  GpsDataset data;
  data.days.push_back(day_at({1.0, 2.0}, {0.25, 0.75}));
  DayWeights w = midpoint_weights(data);
  DensityField f = weighted_kde(data, w, 0.3, square_grid(0.0, 0.0, 5, 1.0));

  export_density_csv(f, path.string());
  CHECK(read_file(path).rfind("x_center,y_center,value\n", 0) == 0);

  RegionMask mask = level_set(f, 0.01);
  export_mask_csv(mask, path.string());
  CHECK(read_file(path).rfind("cell_index,x_center,y_center,in_region,level\n", 0) == 0);

  export_anchors_csv({AnchorEstimate{{1.0, 2.0}, 0.5, 0.1}}, 0.0055, path.string());
  {
    std::string text = read_file(path);
    CHECK(text.rfind("x,y,density,lambda\n", 0) == 0);
    CHECK(text.find("0.0055") != std::string::npos);
  }

  Dendrogram dend;
  dend.n_leaves = 2;
  dend.merges.push_back({0, 1, 0.5});
  export_dendrogram_csv(dend, path.string());
  CHECK(read_file(path) == "id_a,id_b,height\n0,1,0.5\n");

  ClusterLabels labels;
  labels.label = {1, 2, 1};
  labels.singleton = {0, 1, 0};
  labels.n_clusters = 2;
  export_labels_csv(labels, path.string());
  CHECK(read_file(path) == "day,label,singleton_flag\n1,1,0\n2,2,1\n3,1,0\n");

  MiseTable table;
  MiseRow row;
  row.n = 7;
  row.m = 159;
  row.sigma = 0.2;
  row.mode = TimestampMode::realistic;
  row.estimator = EstimatorKind::integrated_conditional;
  row.target = EvalTarget::full_day;
  row.mise_mean = 0.05;
  row.mise_std = 0.001;
  row.repetitions = 20;
  row.seed = 9;
  table.rows.push_back(row);
  export_mise_csv(table, path.string());
  CHECK(read_file(path) ==
        "n,m,sigma,mode,estimator,target,mise_mean,mise_std,reps,seed\n"
        "7,159,0.2,realistic,fc,full,0.05,0.001,20,9\n");

  export_centers_csv({CenterRow{1, 0.5, {2.0, 3.0}, true}}, path.string());
  CHECK(read_file(path) == "cluster,t,x,y,supported\n1,0.5,2,3,1\n");

  std::filesystem::remove(path);
}

TEST_CASE("run config: JSON load and enumerated validation") {
  auto path = tmp_path("mobscope_config.json");
  write_file(path, R"({
    "bandwidths": {"h_x": 0.1, "h_t": 0.02},
    "grid": "auto",
    "time_grid_size": 720,
    "xi": 1.0,
    "sigma": 0.1,
    "interval": {"start": 0.3333333333333333, "end": 0.4166666666666667}
  })");
  RunConfig cfg = load_run_config(path.string());
  CHECK_FALSE(cfg.reference_bandwidths);
  CHECK(cfg.h_x == 0.1);
  CHECK(cfg.time_grid_size == 720);
  CHECK(cfg.xi == 1.0);
  REQUIRE(cfg.interval.has_value());
  CHECK(cfg.interval->length == doctest::Approx(1.0 / 12.0).epsilon(1e-9));

  RunConfig bad;
  bad.reference_bandwidths = false;
  bad.h_x = -1.0;
  bad.h_t = 2.0;
  bad.xi = 0.0;
  try {
    bad.validate();
    CHECK(false);
  } catch (const config_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("h_x") != std::string::npos);
    CHECK(msg.find("h_t") != std::string::npos);
    CHECK(msg.find("xi") != std::string::npos);
  }
  std::filesystem::remove(path);
}
