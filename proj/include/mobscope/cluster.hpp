#pragma once

#include <vector>

#include "mobscope/dataset.hpp"
#include "mobscope/grid.hpp"
#include "mobscope/kde.hpp"

namespace mobscope {

/// One day's average density: the day's slice of the integrated-conditional
/// weights, renormalized to unit mass so the result is a shape (independent
/// of how many days the dataset holds).
DensityField per_day_density(const GpsDataset& data, std::size_t day_index, const Bandwidths& bw,
                             const GridSpec& grid, const TimeGrid& tg);

/// All per-day densities, computing the shared weights once.
std::vector<DensityField> per_day_densities(const GpsDataset& data, const Bandwidths& bw,
                                            const GridSpec& grid, const TimeGrid& tg);

/// Integrated squared difference of stabilized log densities:
/// integral of [log(fa + xi) - log(fb + xi)]^2 over the grid.
double log_density_distance(const DensityField& fa, const DensityField& fb, double xi);

struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> values;  // row-major n x n

  explicit DistanceMatrix(std::size_t size = 0) : n(size), values(size * size, 0.0) {}
  double& at(std::size_t a, std::size_t b) { return values[a * n + b]; }
  double at(std::size_t a, std::size_t b) const { return values[a * n + b]; }
  void validate() const;
};

DistanceMatrix distance_matrix(const GpsDataset& data, const Bandwidths& bw, const GridSpec& grid,
                               const TimeGrid& tg, double xi);
DistanceMatrix distance_matrix(const std::vector<DensityField>& fields, double xi);

struct Merge {
  int id_a = 0;  // cluster ids; leaves are 0..n-1, merge k creates id n+k
  int id_b = 0;
  double height = 0.0;
};

struct Dendrogram {
  std::size_t n_leaves = 0;
  std::vector<Merge> merges;  // n_leaves - 1 entries, non-decreasing heights
};

/// Single-linkage merge tree (minimum spanning tree order). Ties are broken
/// by the lowest leaf pair, so the dendrogram is deterministic.
Dendrogram single_linkage(const DistanceMatrix& d);

struct ClusterLabels {
  std::vector<int> label;              // per day, contiguous 1..n_clusters
  std::vector<std::uint8_t> singleton; // per day: cluster has a single member
  int n_clusters = 0;
};

/// Cuts to exactly k clusters (applies the first n-k merges).
ClusterLabels cut(const Dendrogram& dend, std::size_t k);
/// Applies every merge with height <= threshold.
ClusterLabels cut_at_height(const Dendrogram& dend, double threshold);

/// Days carrying the given label.
std::vector<std::size_t> cluster_members(const ClusterLabels& labels, int g);

/// Conditional density restricted to the days of cluster g.
DensityField cluster_conditional_density(const GpsDataset& data, const ClusterLabels& labels,
                                         int g, const Bandwidths& bw, const GridSpec& grid,
                                         double t);

struct ConditionalCenter {
  Point location;
  bool supported = true;
};

/// Kernel-regression center of cluster g at time t: time-kernel weighted mean
/// of the cluster's observations (per-day 1/m_i weighting). Unsupported when
/// the time-kernel mass underflows.
ConditionalCenter conditional_center(const GpsDataset& data, const ClusterLabels& labels, int g,
                                     double h_t, double t);
ConditionalCenter conditional_center(const GpsDataset& data,
                                     const std::vector<std::size_t>& day_indices, double h_t,
                                     double t);

}  // namespace mobscope
