#include "mobscope/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mobscope {

namespace {

DensityField one_day_field(const GpsDataset& data, std::size_t i,
                           const std::vector<double>& raw_weights, double h,
                           const GridSpec& grid) {
  double total = std::accumulate(raw_weights.begin(), raw_weights.end(), 0.0);
  if (!(total > 0.0)) throw data_error("per-day weights sum to zero");
  GpsDataset single = data.subset({i});
  DayWeights w;
  w.kind = DayWeights::Kind::integrated;
  w.w.push_back(raw_weights);
  for (double& v : w.w[0]) v /= total;
  return weighted_kde(single, w, h, grid);
}

}  // namespace

DensityField per_day_density(const GpsDataset& data, std::size_t day_index, const Bandwidths& bw,
                             const GridSpec& grid, const TimeGrid& tg) {
  if (day_index >= data.n_days()) throw data_error("per_day_density: day index out of range");
  DayWeights weights = integrated_conditional_weights(data, bw, tg);
  return one_day_field(data, day_index, weights.w[day_index], bw.h_x, grid);
}

std::vector<DensityField> per_day_densities(const GpsDataset& data, const Bandwidths& bw,
                                            const GridSpec& grid, const TimeGrid& tg) {
  DayWeights weights = integrated_conditional_weights(data, bw, tg);
  std::vector<DensityField> fields(data.n_days());
  const std::size_t n_chunks = 16;
  parallel_chunks(data.n_days(), n_chunks, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      fields[i] = one_day_field(data, i, weights.w[i], bw.h_x, grid);
  });
  return fields;
}

double log_density_distance(const DensityField& fa, const DensityField& fb, double xi) {
  require_same_grid(fa, fb);
  if (!(xi > 0.0)) throw config_error("log_density_distance: xi must be > 0");
  double acc = 0.0;
  for (std::size_t c = 0; c < fa.values.size(); ++c) {
    double d = std::log(fa.values[c] + xi) - std::log(fb.values[c] + xi);
    acc += d * d;
  }
  return acc * fa.grid.cell_area();
}

void DistanceMatrix::validate() const {
  if (values.size() != n * n) throw data_error("distance matrix: shape mismatch");
  for (std::size_t a = 0; a < n; ++a) {
    if (at(a, a) != 0.0) throw data_error("distance matrix: nonzero diagonal");
    for (std::size_t b = a + 1; b < n; ++b) {
      if (at(a, b) < 0.0) throw data_error("distance matrix: negative entry");
      if (std::fabs(at(a, b) - at(b, a)) > 1e-9) throw data_error("distance matrix: asymmetric");
    }
  }
}

DistanceMatrix distance_matrix(const std::vector<DensityField>& fields, double xi) {
  DistanceMatrix d(fields.size());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::size_t a = 0; a < fields.size(); ++a)
    for (std::size_t b = a + 1; b < fields.size(); ++b)
      pairs.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
  const std::size_t n_chunks = 32;
  parallel_chunks(pairs.size(), n_chunks, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      auto [a, b] = pairs[p];
      double v = log_density_distance(fields[a], fields[b], xi);
      d.at(a, b) = v;
      d.at(b, a) = v;
    }
  });
  return d;
}

DistanceMatrix distance_matrix(const GpsDataset& data, const Bandwidths& bw, const GridSpec& grid,
                               const TimeGrid& tg, double xi) {
  return distance_matrix(per_day_densities(data, bw, grid, tg), xi);
}

Dendrogram single_linkage(const DistanceMatrix& d) {
  const std::size_t n = d.n;
  if (n < 2) throw config_error("single_linkage: need at least 2 items");

  // Prim's algorithm on the complete graph gives the MST; single-linkage
  // merges are the MST edges in weight order.
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best_from(n, 0);
  struct Edge {
    std::size_t a, b;
    double w;
  };
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  in_tree[0] = true;
  for (std::size_t v = 1; v < n; ++v) {
    best[v] = d.at(0, v);
    best_from[v] = 0;
  }
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      if (pick == n || best[v] < best[pick]) pick = v;
    }
    in_tree[pick] = true;
    std::size_t a = std::min(best_from[pick], pick);
    std::size_t b = std::max(best_from[pick], pick);
    edges.push_back({a, b, best[pick]});
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      double w = d.at(pick, v);
      if (w < best[v]) {
        best[v] = w;
        best_from[v] = pick;
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    if (x.w != y.w) return x.w < y.w;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  Dendrogram dend;
  dend.n_leaves = n;
  std::vector<int> cluster_of(n);
  std::iota(cluster_of.begin(), cluster_of.end(), 0);
  int next_id = static_cast<int>(n);
  for (const Edge& e : edges) {
    int ca = cluster_of[e.a];
    int cb = cluster_of[e.b];
    Merge m;
    m.id_a = std::min(ca, cb);
    m.id_b = std::max(ca, cb);
    m.height = e.w;
    dend.merges.push_back(m);
    for (std::size_t v = 0; v < n; ++v)
      if (cluster_of[v] == ca || cluster_of[v] == cb) cluster_of[v] = next_id;
    ++next_id;
  }
  return dend;
}

namespace {

ClusterLabels labels_after_merges(const Dendrogram& dend, std::size_t n_merges) {
  const std::size_t n = dend.n_leaves;
  std::vector<int> cluster_of(n);
  std::iota(cluster_of.begin(), cluster_of.end(), 0);
  int next_id = static_cast<int>(n);
  for (std::size_t k = 0; k < n_merges; ++k) {
    const Merge& m = dend.merges[k];
    for (std::size_t v = 0; v < n; ++v)
      if (cluster_of[v] == m.id_a || cluster_of[v] == m.id_b) cluster_of[v] = next_id;
    ++next_id;
  }
  ClusterLabels out;
  out.label.assign(n, 0);
  out.singleton.assign(n, 0);
  std::vector<int> relabel;  // cluster ids in order of first appearance
  for (std::size_t v = 0; v < n; ++v) {
    auto it = std::find(relabel.begin(), relabel.end(), cluster_of[v]);
    if (it == relabel.end()) {
      relabel.push_back(cluster_of[v]);
      out.label[v] = static_cast<int>(relabel.size());
    } else {
      out.label[v] = static_cast<int>(it - relabel.begin()) + 1;
    }
  }
  out.n_clusters = static_cast<int>(relabel.size());
  std::vector<std::size_t> sizes(relabel.size(), 0);
  for (int l : out.label) ++sizes[static_cast<std::size_t>(l - 1)];
  for (std::size_t v = 0; v < n; ++v)
    out.singleton[v] = sizes[static_cast<std::size_t>(out.label[v] - 1)] == 1 ? 1 : 0;
  return out;
}

}  // namespace

ClusterLabels cut(const Dendrogram& dend, std::size_t k) {
  if (k < 1 || k > dend.n_leaves) throw config_error("cut: k must be in [1, n]");
  return labels_after_merges(dend, dend.n_leaves - k);
}

ClusterLabels cut_at_height(const Dendrogram& dend, double threshold) {
  std::size_t n_merges = 0;
  while (n_merges < dend.merges.size() && dend.merges[n_merges].height <= threshold) ++n_merges;
  return labels_after_merges(dend, n_merges);
}

std::vector<std::size_t> cluster_members(const ClusterLabels& labels, int g) {
  std::vector<std::size_t> members;
  for (std::size_t v = 0; v < labels.label.size(); ++v)
    if (labels.label[v] == g) members.push_back(v);
  return members;
}

DensityField cluster_conditional_density(const GpsDataset& data, const ClusterLabels& labels,
                                         int g, const Bandwidths& bw, const GridSpec& grid,
                                         double t) {
  if (labels.label.size() != data.n_days()) throw data_error("labels/dataset day count mismatch");
  auto members = cluster_members(labels, g);
  if (members.empty()) throw data_error("cluster_conditional_density: empty cluster");
  return conditional_kde(data.subset(members), bw, grid, t);
}

ConditionalCenter conditional_center(const GpsDataset& data,
                                     const std::vector<std::size_t>& day_indices, double h_t,
                                     double t) {
  if (day_indices.empty()) throw data_error("conditional_center: empty cluster");
  if (!(h_t > 0.0) || h_t > 0.5) throw config_error("conditional_center: h_t must be in (0, 0.5]");
  GpsDataset sub = data.subset(day_indices);
  auto order = sub.canonical_day_order();

  double max_log = -1e308;
  for (const auto& day : sub.days) {
    for (double tij : day.times) {
      double u = cyclic_time_distance(tij, t) / h_t;
      max_log = std::max(max_log, -0.5 * u * u);
    }
  }
  if (max_log < -690.7755278982137) return {{0.0, 0.0}, false};

  double wx = 0.0, wy = 0.0, wsum = 0.0;
  for (std::size_t i : order) {
    const GpsDay& day = sub.days[i];
    const double inv_m = 1.0 / static_cast<double>(day.size());
    for (std::size_t j = 0; j < day.size(); ++j) {
      double u = cyclic_time_distance(day.times[j], t) / h_t;
      double k = inv_m * std::exp(-0.5 * u * u - max_log);
      wx += k * day.points[j].x;
      wy += k * day.points[j].y;
      wsum += k;
    }
  }
  if (!(wsum > 0.0)) return {{0.0, 0.0}, false};
  return {{wx / wsum, wy / wsum}, true};
}

ConditionalCenter conditional_center(const GpsDataset& data, const ClusterLabels& labels, int g,
                                     double h_t, double t) {
  if (labels.label.size() != data.n_days()) throw data_error("labels/dataset day count mismatch");
  return conditional_center(data, cluster_members(labels, g), h_t, t);
}

}  // namespace mobscope
