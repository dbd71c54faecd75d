// mobscope command-line workflow: simulate GPS days, estimate densities,
// derive anchors / activity spaces / clusters / centers, and run the
// simulation benchmark. Every command writes plain CSV and is deterministic
// given its inputs, configuration and seed.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mobscope/activity.hpp"
#include "mobscope/cluster.hpp"
#include "mobscope/eval.hpp"
#include "mobscope/io.hpp"
#include "mobscope/oracle.hpp"
#include "mobscope/simulate.hpp"
#include "mobscope/world.hpp"

namespace {

using namespace mobscope;

struct CommonOpts {
  std::string config_path;
  std::string data_path;
  bool epoch = false;
  double day_start_hour = 0.0;
  double hx = 0.0;
  double ht = 0.0;
  std::size_t nt = 0;
  double sigma = -1.0;
  double xi = -1.0;
  std::string interval;  // "a:b" day fractions
  std::string grid_text; // "x_min,y_min,n_x,n_y,dx,dy"
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_data) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  if (needs_data) {
    cmd->add_option("--data", o.data_path, "input CSV (day_id,t,x,y)")->required();
    cmd->add_flag("--epoch", o.epoch, "time column holds epoch seconds (day_id,epoch_s,x,y)");
    cmd->add_option("--day-start-hour", o.day_start_hour, "day boundary for epoch normalization");
  }
  cmd->add_option("--hx", o.hx, "spatial bandwidth (default: reference rule)");
  cmd->add_option("--ht", o.ht, "temporal bandwidth (default: reference rule)");
  cmd->add_option("--nt", o.nt, "time grid size (default 1440)");
  cmd->add_option("--sigma", o.sigma, "measurement noise sd (default 0.2)");
  cmd->add_option("--xi", o.xi, "log-density stabilizer (default 1e-4)");
  cmd->add_option("--interval", o.interval, "time window a:b as day fractions, may wrap");
  cmd->add_option("--grid", o.grid_text, "explicit grid x_min,y_min,n_x,n_y,dx,dy");
}

RunConfig resolve_config(const CommonOpts& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = load_run_config(o.config_path);
  if (o.hx > 0.0 || o.ht > 0.0) {
    cfg.reference_bandwidths = false;
    if (o.hx > 0.0) cfg.h_x = o.hx;
    if (o.ht > 0.0) cfg.h_t = o.ht;
    if (!(cfg.h_x > 0.0) || !(cfg.h_t > 0.0))
      throw config_error("explicit bandwidths need both --hx and --ht (or config values)");
  }
  if (o.nt > 0) cfg.time_grid_size = o.nt;
  if (o.sigma >= 0.0) cfg.sigma = o.sigma;
  if (o.xi >= 0.0) cfg.xi = o.xi;
  if (!o.interval.empty()) {
    auto colon = o.interval.find(':');
    if (colon == std::string::npos) throw config_error("--interval expects a:b");
    cfg.interval = TimeInterval::from_to(std::stod(o.interval.substr(0, colon)),
                                         std::stod(o.interval.substr(colon + 1)));
  }
  if (!o.grid_text.empty()) {
    GridSpec g;
    if (std::sscanf(o.grid_text.c_str(), "%lf,%lf,%zu,%zu,%lf,%lf", &g.x_min, &g.y_min, &g.n_x,
                    &g.n_y, &g.cell_dx, &g.cell_dy) != 6)
      throw config_error("--grid expects x_min,y_min,n_x,n_y,dx,dy");
    cfg.auto_grid = false;
    cfg.grid = g;
  }
  cfg.validate();
  return cfg;
}

GridSpec pick_grid(const GpsDataset& data, const RunConfig& cfg, double h_x) {
  return cfg.auto_grid ? auto_grid_for(data, cfg, h_x) : cfg.grid;
}

GpsDataset load_data(const CommonOpts& o) {
  IngestOptions opts;
  opts.epoch = o.epoch;
  opts.day_start_hour = o.day_start_hour;
  IngestReport report;
  GpsDataset data = ingest_csv(o.data_path, opts, &report);
  if (report.days_dropped > 0)
    std::cerr << "warning: dropped " << report.days_dropped << " day(s) with fewer than 2 fixes\n";
  if (report.duplicates_collapsed > 0)
    std::cerr << "warning: collapsed " << report.duplicates_collapsed
              << " duplicate-time fix(es)\n";
  if (report.missing_day_ids > 0)
    std::cerr << "note: " << report.missing_day_ids
              << " day id(s) absent inside the observed range (days are treated independently)\n";
  return data;
}

WorldModel load_world_or_default(const std::string& path) {
  return path.empty() ? default_world_model() : load_world_model(path);
}

DayWeights weights_for_estimator(const GpsDataset& data, const std::string& estimator,
                                 const Bandwidths& bw, const TimeGrid& tg) {
  if (estimator == "fw") return midpoint_weights(data);
  if (estimator == "fc") return integrated_conditional_weights(data, bw, tg);
  throw config_error("estimator must be fw or fc");
}

int run(int argc, char** argv) {
  CLI::App app{"GPS activity-pattern analysis"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate synthetic GPS days");
  std::string sim_world, sim_out, sim_meta, sim_mode = "even", sim_template, sim_dump_world;
  std::size_t sim_n = 30, sim_m = 479;
  double sim_sigma = 0.2;
  std::uint64_t sim_seed = 1;
  sim->add_option("--world", sim_world, "world+patterns JSON (default: built-in)");
  sim->add_option("--n", sim_n, "days");
  sim->add_option("--m", sim_m, "fixes per day");
  sim->add_option("--sigma", sim_sigma, "noise sd");
  sim->add_option("--mode", sim_mode, "even | even-interior | realistic");
  sim->add_option("--template", sim_template, "timestamp template CSV (day_id,t)");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "output CSV")->required();
  sim->add_option("--meta", sim_meta, "write day_id,pattern CSV");
  sim->add_option("--dump-world", sim_dump_world, "also write the world JSON used");

  // estimate
  auto* est = app.add_subcommand("estimate", "average density field");
  CommonOpts est_o;
  std::string est_kind = "fc", est_out;
  add_common(est, est_o, true);
  est->add_option("--estimator", est_kind, "naive | fw | fc");
  est->add_option("--out", est_out, "density CSV")->required();

  // conditional
  auto* cond = app.add_subcommand("conditional", "density at a fixed time");
  CommonOpts cond_o;
  double cond_t = 0.5;
  std::string cond_out;
  add_common(cond, cond_o, true);
  cond->add_option("--t", cond_t, "time in [0,1]")->required();
  cond->add_option("--out", cond_out, "density CSV")->required();

  // anchors
  auto* anc = app.add_subcommand("anchors", "detect anchor locations");
  CommonOpts anc_o;
  std::string anc_est = "fc", anc_out;
  double anc_lambda = 0.0055;
  double anc_raw_level = -1.0;
  add_common(anc, anc_o, true);
  anc->add_option("--estimator", anc_est, "fw | fc");
  anc->add_option("--lambda", anc_lambda, "time-fraction threshold (through lambda/(2 pi sigma^2))");
  anc->add_option("--level", anc_raw_level, "raw density threshold (overrides --lambda)");
  anc->add_option("--out", anc_out, "anchors CSV")->required();

  // activity-space
  auto* asp = app.add_subcommand("activity-space", "probability-indexed level set");
  CommonOpts asp_o;
  std::string asp_est = "fc", asp_out;
  double asp_rho = 0.9;
  add_common(asp, asp_o, true);
  asp->add_option("--estimator", asp_est, "fw | fc (weight source)");
  asp->add_option("--rho", asp_rho, "time coverage in (0,1)");
  asp->add_option("--out", asp_out, "mask CSV")->required();

  // cluster
  auto* clu = app.add_subcommand("cluster", "day-level clustering");
  CommonOpts clu_o;
  std::size_t clu_k = 0;
  double clu_height = -1.0;
  std::string clu_out, clu_dend;
  add_common(clu, clu_o, true);
  clu->add_option("--k", clu_k, "number of clusters");
  clu->add_option("--height", clu_height, "cut height (alternative to --k)");
  clu->add_option("--out", clu_out, "labels CSV")->required();
  clu->add_option("--dendrogram", clu_dend, "merge list CSV");

  // centers
  auto* cen = app.add_subcommand("centers", "cluster conditional centers");
  CommonOpts cen_o;
  std::size_t cen_k = 2;
  std::string cen_times = "0.25,0.375,0.5,0.625,0.75,0.875", cen_out;
  add_common(cen, cen_o, true);
  cen->add_option("--k", cen_k, "number of clusters");
  cen->add_option("--times", cen_times, "comma-separated times");
  cen->add_option("--out", cen_out, "centers CSV")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "simulation benchmark (MISE table)");
  std::string ev_world, ev_out, ev_preset = "desk", ev_template;
  std::uint64_t ev_seed = 1;
  std::size_t ev_reps = 0;
  ev->add_option("--world", ev_world, "world+patterns JSON (default: built-in)");
  ev->add_option("--preset", ev_preset, "desk | full");
  ev->add_option("--reps", ev_reps, "override repetitions");
  ev->add_option("--seed", ev_seed, "RNG seed");
  ev->add_option("--template", ev_template, "realistic timestamp template CSV");
  ev->add_option("--out", ev_out, "MISE CSV")->required();

  app.parse(argc, argv);

  if (sim->parsed()) {
    WorldModel model = load_world_or_default(sim_world);
    SimulationConfig cfg;
    cfg.n_days = sim_n;
    cfg.m = sim_m;
    cfg.sigma = sim_sigma;
    cfg.seed = sim_seed;
    TimestampTemplate tmpl;
    if (sim_mode == "even") {
      cfg.mode = TimestampMode::even;
    } else if (sim_mode == "even-interior") {
      cfg.mode = TimestampMode::even_interior;
    } else if (sim_mode == "realistic") {
      cfg.mode = TimestampMode::realistic;
      if (sim_template.empty()) {
        cfg.timestamp_template = &default_skewed_template();
      } else {
        tmpl = load_timestamp_template(sim_template);
        cfg.timestamp_template = &tmpl;
      }
    } else {
      throw config_error("--mode must be even, even-interior or realistic");
    }
    GpsDataset data = simulate_dataset(model.world, model.patterns, cfg);
    export_dataset_csv(data, sim_out);
    if (!sim_meta.empty()) export_metadata_csv(data, sim_meta);
    if (!sim_dump_world.empty()) save_text(sim_dump_world, world_model_to_json(model));
    std::cerr << "simulated " << data.n_days() << " days, " << data.total_observations()
              << " fixes -> " << sim_out << "\n";
    return 0;
  }

  if (est->parsed()) {
    RunConfig cfg = resolve_config(est_o);
    GpsDataset data = load_data(est_o);
    Bandwidths bw = bandwidths_for(data, cfg);
    GridSpec grid = pick_grid(data, cfg, bw.h_x);
    TimeGrid tg(cfg.time_grid_size);
    DensityField f;
    if (cfg.interval.has_value()) {
      if (est_kind == "naive")
        f = interval_naive(data, bw.h_x, grid, *cfg.interval);
      else if (est_kind == "fw")
        f = interval_kde(data, bw, grid, *cfg.interval, IntervalEstimator::weighted, tg);
      else if (est_kind == "fc")
        f = interval_kde(data, bw, grid, *cfg.interval, IntervalEstimator::conditional, tg);
      else
        throw config_error("estimator must be naive, fw or fc");
    } else {
      if (est_kind == "naive")
        f = naive_kde(data, bw.h_x, grid);
      else if (est_kind == "fw")
        f = time_weighted_kde(data, bw.h_x, grid);
      else if (est_kind == "fc")
        f = integrated_conditional_kde(data, bw, grid, tg);
      else
        throw config_error("estimator must be naive, fw or fc");
    }
    export_density_csv(f, est_out);
    std::cerr << "estimate " << est_kind << " h_x=" << bw.h_x << " h_t=" << bw.h_t << " -> "
              << est_out << "\n";
    return 0;
  }

  if (cond->parsed()) {
    RunConfig cfg = resolve_config(cond_o);
    GpsDataset data = load_data(cond_o);
    Bandwidths bw = bandwidths_for(data, cfg);
    GridSpec grid = pick_grid(data, cfg, bw.h_x);
    DensityField f = conditional_kde(data, bw, grid, cond_t);
    export_density_csv(f, cond_out);
    std::cerr << "conditional density at t=" << cond_t << " -> " << cond_out << "\n";
    return 0;
  }

  if (anc->parsed()) {
    RunConfig cfg = resolve_config(anc_o);
    GpsDataset data = load_data(anc_o);
    Bandwidths bw = bandwidths_for(data, cfg);
    GridSpec grid = pick_grid(data, cfg, bw.h_x);
    TimeGrid tg(cfg.time_grid_size);
    DayWeights w = weights_for_estimator(data, anc_est, bw, tg);
    WeightedEdf sample = weighted_edf(data, w);
    DensityField f = weighted_kde(data, w, bw.h_x, grid);
    std::vector<AnchorEstimate> anchors;
    double lambda_out = anc_lambda;
    if (anc_raw_level >= 0.0) {
      anchors = detect_anchors_at_level(f, sample, bw.h_x, anc_raw_level);
      lambda_out = anc_raw_level;
    } else {
      anchors = detect_anchors(f, sample, bw.h_x, anc_lambda, cfg.sigma);
    }
    export_anchors_csv(anchors, lambda_out, anc_out);
    std::cerr << "detected " << anchors.size() << " anchors -> " << anc_out << "\n";
    return 0;
  }

  if (asp->parsed()) {
    RunConfig cfg = resolve_config(asp_o);
    if (!(asp_rho > 0.0 && asp_rho < 1.0)) throw config_error("--rho must be in (0,1)");
    GpsDataset data = load_data(asp_o);
    Bandwidths bw = bandwidths_for(data, cfg);
    GridSpec grid = pick_grid(data, cfg, bw.h_x);
    TimeGrid tg(cfg.time_grid_size);
    DayWeights w = weights_for_estimator(data, asp_est, bw, tg);
    WeightedEdf sample = weighted_edf(data, w);
    DensityField f = weighted_kde(data, w, bw.h_x, grid);
    std::vector<double> densities = weighted_kde_at(data, w, bw.h_x, sample.points);
    ActivitySpace space = activity_space(f, sample, densities, asp_rho);
    export_mask_csv(space.region, asp_out);
    std::cerr << "activity space rho=" << asp_rho << " level=" << space.level
              << " covered=" << space.covered_mass << " area=" << space.region.area() << " -> "
              << asp_out << "\n";
    return 0;
  }

  if (clu->parsed()) {
    RunConfig cfg = resolve_config(clu_o);
    GpsDataset data = load_data(clu_o);
    Bandwidths bw = bandwidths_for(data, cfg);
    GridSpec grid = pick_grid(data, cfg, bw.h_x);
    TimeGrid tg(cfg.time_grid_size);
    DistanceMatrix d = distance_matrix(data, bw, grid, tg, cfg.xi);
    Dendrogram dend = single_linkage(d);
    if (!clu_dend.empty()) export_dendrogram_csv(dend, clu_dend);
    ClusterLabels labels;
    if (clu_k >= 1)
      labels = cut(dend, clu_k);
    else if (clu_height >= 0.0)
      labels = cut_at_height(dend, clu_height);
    else
      throw config_error("cluster needs --k or --height");
    export_labels_csv(labels, clu_out);
    std::cerr << "clustered " << data.n_days() << " days into " << labels.n_clusters << " -> "
              << clu_out << "\n";
    return 0;
  }

  if (cen->parsed()) {
    RunConfig cfg = resolve_config(cen_o);
    GpsDataset data = load_data(cen_o);
    Bandwidths bw = bandwidths_for(data, cfg);
    GridSpec grid = pick_grid(data, cfg, bw.h_x);
    TimeGrid tg(cfg.time_grid_size);
    DistanceMatrix d = distance_matrix(data, bw, grid, tg, cfg.xi);
    ClusterLabels labels = cut(single_linkage(d), cen_k);
    std::vector<CenterRow> rows;
    std::string token;
    std::stringstream ss(cen_times);
    std::vector<double> times;
    while (std::getline(ss, token, ',')) times.push_back(std::stod(token));
    for (int g = 1; g <= labels.n_clusters; ++g) {
      for (double t : times) {
        ConditionalCenter c = conditional_center(data, labels, g, bw.h_t, t);
        rows.push_back({g, t, c.location, c.supported});
      }
    }
    export_centers_csv(rows, cen_out);
    std::cerr << "centers for " << labels.n_clusters << " clusters -> " << cen_out << "\n";
    return 0;
  }

  if (ev->parsed()) {
    WorldModel model = load_world_or_default(ev_world);
    ExperimentConfig cfg;
    cfg.seed = ev_seed;
    if (ev_preset == "desk") {
      cfg.n_values = {7, 30};
      cfg.m_values = {159, 479};
      cfg.targets = {EvalTarget::full_day, EvalTarget::interval};
      cfg.repetitions = 20;
    } else if (ev_preset == "full") {
      cfg.n_values = {7, 30, 90};
      cfg.m_values = {159, 479, 1439};
      cfg.sigma_values = {0.2, 0.1};
      cfg.targets = {EvalTarget::full_day, EvalTarget::interval};
      cfg.repetitions = 100;
    } else {
      throw config_error("--preset must be desk or full");
    }
    if (ev_reps > 0) cfg.repetitions = ev_reps;
    TimestampTemplate tmpl;
    if (!ev_template.empty()) {
      tmpl = load_timestamp_template(ev_template);
      cfg.timestamp_template = &tmpl;
    }
    MiseTable table = run_experiment(cfg, model.world, model.patterns);
    export_mise_csv(table, ev_out);
    std::cerr << "evaluate preset=" << ev_preset << " rows=" << table.rows.size() << " -> "
              << ev_out << "\n";
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError& e) {
    return CLI::App{}.exit(e);
  } catch (const mobscope::config_error& e) {
    std::cerr << "{\"error\":\"config\",\"message\":\"" << e.what() << "\"}\n";
    return 2;
  } catch (const mobscope::data_error& e) {
    std::cerr << "{\"error\":\"data\",\"message\":\"" << e.what() << "\"}\n";
    return 3;
  } catch (const mobscope::unsupported_time_error& e) {
    std::cerr << "{\"error\":\"unsupported-time\",\"message\":\"" << e.what() << "\"}\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"internal\",\"message\":\"" << e.what() << "\"}\n";
    return 5;
  }
}
