#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mobscope/activity.hpp"
#include "mobscope/cluster.hpp"
#include "mobscope/dataset.hpp"
#include "mobscope/eval.hpp"

namespace mobscope {

struct IngestOptions {
  bool epoch = false;          // time column holds epoch seconds
  double day_start_hour = 0.0; // day boundary used for epoch normalization
};

struct IngestReport {
  std::size_t days_dropped = 0;         // days with fewer than 2 usable fixes
  std::size_t duplicates_collapsed = 0; // same-day same-time rows merged
  std::size_t missing_day_ids = 0;      // gaps in the day-id range (not imputed)
  std::vector<long long> day_ids;       // day id per dataset day, ascending
};

/// Reads day_id,t,x,y (or day_id,epoch_s,x,y) rows into a dataset: rows are
/// grouped by day id, sorted in time, exact duplicate times collapsed to the
/// coordinate mean and days left with fewer than 2 fixes dropped.
GpsDataset ingest_csv(const std::string& path, const IngestOptions& options = {},
                      IngestReport* report = nullptr);

void export_dataset_csv(const GpsDataset& data, const std::string& path);
void export_metadata_csv(const GpsDataset& data, const std::string& path);
void export_density_csv(const DensityField& field, const std::string& path);
void export_mask_csv(const RegionMask& mask, const std::string& path);
void export_anchors_csv(const std::vector<AnchorEstimate>& anchors, double lambda,
                        const std::string& path);
void export_dendrogram_csv(const Dendrogram& dend, const std::string& path);
void export_labels_csv(const ClusterLabels& labels, const std::string& path);
void export_mise_csv(const MiseTable& table, const std::string& path);

struct CenterRow {
  int cluster = 0;
  double t = 0.0;
  Point location;
  bool supported = true;
};
void export_centers_csv(const std::vector<CenterRow>& rows, const std::string& path);

/// Run configuration shared by the CLI commands; can be loaded from JSON and
/// overridden by flags. validate() reports every problem at once.
struct RunConfig {
  bool reference_bandwidths = true;
  double h_x = 0.0;
  double h_t = 0.0;
  bool auto_grid = true;
  GridSpec grid;
  double grid_margin = -1.0;  // auto margin when negative: 3 sigma + 4 h_x
  std::size_t grid_nx = 121;
  std::size_t grid_ny = 99;
  std::size_t time_grid_size = 1440;
  double xi = 1e-4;
  double sigma = 0.2;
  std::optional<TimeInterval> interval;

  void validate() const;
};

RunConfig load_run_config(const std::string& path);

/// Grid from the data bounding box plus margin, with the configured cell
/// counts.
GridSpec auto_grid_for(const GpsDataset& data, const RunConfig& cfg, double h_x);

/// Bandwidths from the config (reference rule or explicit values).
Bandwidths bandwidths_for(const GpsDataset& data, const RunConfig& cfg);

void save_text(const std::string& path, const std::string& content);

}  // namespace mobscope
