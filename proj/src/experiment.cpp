#include "mampc/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mampc/metrics.hpp"
#include "mampc/prbs.hpp"
#include "mampc/sofc.hpp"
#include "mampc/svg.hpp"
#include "mampc/sysid.hpp"
#include "mampc/tank.hpp"

namespace fs = std::filesystem;

namespace mampc {

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
}

std::string prepare_out_dir(const ExperimentConfig& cfg, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");
  write_text((fs::path(out_dir) / "config_resolved.cfg").string(),
             serialize_config(cfg));
  return out_dir;
}

// Channel c excites with the phase of the base sequence shifted by
// c * period / m, so no two channels look like short delays of each other.
std::uint32_t channel_seed(const ExperimentConfig& cfg, int channel, int channels) {
  const std::uint32_t mask = (1u << cfg.prbs_order) - 1u;
  std::uint32_t base = static_cast<std::uint32_t>(cfg.seed) & mask;
  if (base == 0u) base = 1u;
  PrbsConfig pc;
  pc.order = cfg.prbs_order;
  pc.seed = base;
  const int period = static_cast<int>(mask);
  return prbs_phase_seed(pc, channel * (period / channels));
}

const char* kDatasetFile = "dataset.csv";
const char* kModelFile = "model.csv";

}  // namespace

ExperimentSetup build_plant(const ExperimentConfig& cfg) {
  ExperimentSetup setup;
  if (cfg.plant == "tank") {
    TankParams params;
    params.gamma1 = cfg.tank_gamma1;
    params.gamma2 = cfg.tank_gamma2;
    const Eigen::Vector2d nu_ss(50.0, 50.0);
    const Eigen::Vector4d h_ss(16.3, 13.7, 6.0, 8.1);
    const PumpCalibration cal = calibrate_pump_gains(params, nu_ss, h_ss);
    params.k1 = cal.k1;
    params.k2 = cal.k2;
    auto plant = std::make_unique<TankPlant>(params);
    setup.u_ss = nu_ss;
    setup.x_ss = tank_equilibrium(params, nu_ss);
    setup.y_ss = plant->output(setup.x_ss, setup.u_ss);
    setup.plant = std::move(plant);
  } else if (cfg.plant == "sofc") {
    SofcParams params;
    params.T = cfg.sofc_temperature;
    params.I_nominal = cfg.sofc_current;
    params.V_an = cfg.sofc_anode_volume;
    params.V_cat = cfg.sofc_cathode_volume;
    params.A_cell = cfg.sofc_cell_area;
    params.D2_over_D1 = cfg.sofc_orifice_ratio;
    params.fuel_h2_fraction = cfg.sofc_fuel_h2_fraction;
    params.air_o2_fraction = cfg.sofc_air_o2_fraction;
    const double fuel_ss = 1.2, air_ss = 5.0;
    auto plant = std::make_unique<SofcPlant>(params);
    setup.u_ss = Eigen::Vector2d(fuel_ss, air_ss);
    setup.x_ss = sofc_steady_state(params, fuel_ss, air_ss);
    setup.y_ss = plant->output(setup.x_ss, setup.u_ss);
    setup.plant = std::move(plant);
  } else {
    throw ConfigError("unknown plant '" + cfg.plant + "'");
  }
  return setup;
}

HorizonConfig make_horizon_config(const ExperimentConfig& cfg,
                                  const Eigen::VectorXd& u_ss,
                                  const Eigen::VectorXd& y_ss) {
  HorizonConfig h;
  h.n_p = cfg.n_p;
  h.n_c = cfg.n_c;
  h.n_s = cfg.n_s;
  h.s = cfg.s;
  h.lambda = cfg.lambda;
  h.mu = cfg.mu;
  h.eps1 = cfg.eps1;
  h.max_alt_iter = cfg.max_alt_iter;
  h.qp_tol = cfg.qp_tol;
  h.qp_max_iter = cfg.qp_max_iter;
  h.warm_start_v_hat = cfg.alt_warm_start;
  h.exclude_past_differences = cfg.exclude_past_differences;
  const int m = static_cast<int>(u_ss.size());
  const int l = static_cast<int>(y_ss.size());
  h.u_min.resize(m);
  h.u_max.resize(m);
  for (int c = 0; c < m; ++c) {
    h.u_min(c) = cfg.u_min[c] - u_ss(c);
    h.u_max(c) = cfg.u_max[c] - u_ss(c);
  }
  h.y_min.resize(l);
  h.y_max.resize(l);
  for (int c = 0; c < l; ++c) {
    h.y_min(c) = cfg.y_min[c] - y_ss(c);
    h.y_max(c) = cfg.y_max[c] - y_ss(c);
  }
  return h;
}

Eigen::MatrixXd make_reference(const ExperimentConfig& cfg, const Eigen::VectorXd& y_ss) {
  const int l = static_cast<int>(y_ss.size());
  Eigen::MatrixXd r(cfg.run_steps, l);
  r.rowwise() = y_ss.transpose();
  std::vector<ReferenceSegment> segments = cfg.reference;
  std::sort(segments.begin(), segments.end(),
            [](const ReferenceSegment& a, const ReferenceSegment& b) {
              return a.start < b.start;
            });
  for (const auto& seg : segments) {
    for (int k = std::max(seg.start, 0); k < cfg.run_steps; ++k)
      for (int c = 0; c < l; ++c) r(k, c) = y_ss(c) + seg.level[c];
  }
  return r;
}

void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
  if (cfg.sim_samples < 1)
    throw ConfigError("sim.samples must be >= 1 (empty experiments are rejected)");
  prepare_out_dir(cfg, out_dir);
  ExperimentSetup setup = build_plant(cfg);
  const int m = setup.plant->input_dim();
  const int l = setup.plant->output_dim();

  Eigen::MatrixXd u(cfg.sim_samples, m);
  for (int c = 0; c < m; ++c) {
    PrbsConfig pc;
    pc.order = cfg.prbs_order;
    pc.seed = channel_seed(cfg, c, m);
    pc.hold = cfg.prbs_hold;
    pc.low = cfg.prbs_low[c];
    pc.high = cfg.prbs_high[c];
    u.col(c) = prbs(pc, cfg.sim_samples);
  }

  Eigen::VectorXd x = setup.x_ss;
  for (int k = 0; k < cfg.settle_samples; ++k)
    x = integrate_plant(*setup.plant, x, setup.u_ss, cfg.sample_dt, cfg.plant_substeps);

  Dataset ds;
  ds.t.resize(cfg.sim_samples);
  ds.u = u;
  ds.y.resize(cfg.sim_samples, l);
  Eigen::VectorXd u_prev = setup.u_ss;
  for (int k = 0; k < cfg.sim_samples; ++k) {
    ds.t(k) = k * cfg.sample_dt;
    ds.y.row(k) = setup.plant->output(x, u_prev).transpose();
    u_prev = u.row(k).transpose();
    x = integrate_plant(*setup.plant, x, u_prev, cfg.sample_dt, cfg.plant_substeps);
  }
  write_dataset_csv((fs::path(out_dir) / kDatasetFile).string(), ds);
}

void cmd_identify(const ExperimentConfig& cfg, const std::string& out_dir) {
  const std::string dataset_path = (fs::path(out_dir) / kDatasetFile).string();
  if (!fs::exists(dataset_path))
    throw ConfigError("identify: dataset '" + dataset_path +
                      "' not found (run `simulate` first)");
  prepare_out_dir(cfg, out_dir);
  const Dataset ds = read_dataset_csv(dataset_path);
  if (ds.t.size() < 2) throw ConfigError("identify: dataset too short");
  const double dt = ds.t(1) - ds.t(0);

  IoDataset data = detrend(ds.u, ds.y, dt);
  SubspaceOptions opts;
  opts.order = cfg.id_order;
  opts.block_rows = cfg.id_block_rows;
  const SubspaceResult result = subspace_identify(data, opts);

  IdentifiedModel out{result.model, data.mean_u, data.mean_y};
  write_model_csv((fs::path(out_dir) / kModelFile).string(), out);
}

std::vector<MetricsRow> run_metrics(const ClosedLoopLog& log, int n_s, int s,
                                    double threshold, int drop) {
  std::vector<MetricsRow> rows;
  const std::string tag =
      std::any_of(log.steps.begin(), log.steps.end(),
                  [](const LogStep& st) { return st.controller == "mampc"; })
          ? "mampc"
          : "mpc";
  for (int d : {0, drop}) {
    if (d > 0 && d >= log.length()) continue;
    MetricsRow row;
    row.controller = tag;
    row.n_s = tag == "mampc" ? n_s : 0;
    row.s = tag == "mampc" ? s : 0;
    row.threshold = threshold;
    row.drop = d;
    for (int c = 0; c < log.input_dim(); ++c)
      row.density.push_back(sparse_density(log, c, threshold, d));
    row.error = tracking_error(log, d);
    rows.push_back(std::move(row));
    if (drop == 0) break;  // avoid a duplicate drop=0 row
  }
  return rows;
}

void merge_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows,
                       int input_dim) {
  std::vector<MetricsRow> all;
  if (fs::exists(path)) {
    const CsvTable existing = read_csv(path);
    for (const auto& r : existing.rows) {
      MetricsRow row;
      row.controller = r.at(0);
      row.n_s = std::stoi(r.at(1));
      row.s = std::stoi(r.at(2));
      row.threshold = std::stod(r.at(3));
      row.drop = std::stoi(r.at(4));
      for (int c = 0; c < input_dim; ++c) row.density.push_back(std::stod(r.at(5 + c)));
      row.error = std::stod(r.at(5 + input_dim));
      all.push_back(std::move(row));
    }
  }
  for (const auto& row : rows) {
    auto same = [&](const MetricsRow& other) {
      return other.controller == row.controller && other.n_s == row.n_s &&
             other.drop == row.drop;
    };
    all.erase(std::remove_if(all.begin(), all.end(), same), all.end());
    all.push_back(row);
  }
  std::sort(all.begin(), all.end(), [](const MetricsRow& a, const MetricsRow& b) {
    if (a.controller != b.controller) return a.controller < b.controller;
    if (a.n_s != b.n_s) return a.n_s < b.n_s;
    return a.drop < b.drop;
  });

  CsvTable table;
  table.header = {"controller", "n_s", "s", "threshold", "drop"};
  for (int c = 0; c < input_dim; ++c)
    table.header.push_back("density_u" + std::to_string(c + 1));
  table.header.push_back("tracking_error");
  for (const auto& row : all) {
    std::vector<std::string> out{row.controller, std::to_string(row.n_s),
                                 std::to_string(row.s), format_num(row.threshold),
                                 std::to_string(row.drop)};
    for (double d : row.density) out.push_back(format_num(d));
    out.push_back(format_num(row.error));
    table.rows.push_back(std::move(out));
  }
  write_csv(path, table);
}

namespace {

void write_run_plots(const std::string& out_dir, const ClosedLoopLog& log) {
  const int m = log.input_dim();
  const int l = log.output_dim();
  const std::vector<std::string> palette = {"#1f6fb4", "#d1495b", "#3a9d23",
                                            "#8a4fbf", "#c98a00"};
  std::vector<SvgSeries> inputs;
  for (int c = 0; c < m; ++c) {
    SvgSeries s;
    s.label = "u" + std::to_string(c + 1);
    s.color = palette[c % palette.size()];
    s.staircase = true;
    for (const auto& step : log.steps) {
      s.x.push_back(step.k);
      s.y.push_back(step.input(c));
    }
    inputs.push_back(std::move(s));
  }
  write_line_plot_svg((fs::path(out_dir) / "inputs.svg").string(), "Applied inputs",
                      "step", "input", inputs);

  std::vector<SvgSeries> outputs;
  for (int c = 0; c < l; ++c) {
    SvgSeries s;
    s.label = "y" + std::to_string(c + 1);
    s.color = palette[c % palette.size()];
    SvgSeries ref;
    ref.label = "r" + std::to_string(c + 1);
    ref.color = palette[c % palette.size()];
    ref.dashed = true;
    for (const auto& step : log.steps) {
      s.x.push_back(step.k);
      s.y.push_back(step.output(c));
      ref.x.push_back(step.k);
      ref.y.push_back(step.reference(c));
    }
    outputs.push_back(std::move(s));
    outputs.push_back(std::move(ref));
  }
  write_line_plot_svg((fs::path(out_dir) / "outputs.svg").string(),
                      "Outputs and references", "step", "output", outputs);
}

}  // namespace

void cmd_run(const ExperimentConfig& cfg, const std::string& out_dir,
             ControllerKind kind, int drop, double threshold) {
  const std::string model_path = (fs::path(out_dir) / kModelFile).string();
  if (!fs::exists(model_path))
    throw ConfigError("run: model '" + model_path + "' not found (run `identify` first)");
  prepare_out_dir(cfg, out_dir);
  const IdentifiedModel identified = read_model_csv(model_path);
  ExperimentSetup setup = build_plant(cfg);

  const HorizonConfig horizon = make_horizon_config(cfg, setup.u_ss, setup.y_ss);
  const Eigen::MatrixXd reference = make_reference(cfg, setup.y_ss);

  ClosedLoopOptions options;
  options.kind = kind;
  options.x0 = setup.x_ss;
  options.input_offset = setup.u_ss;
  options.output_offset = setup.y_ss;
  options.plant_substeps = cfg.plant_substeps;
  options.output_bias_correction = cfg.bias_correction;

  ClosedLoopLog log = closed_loop(*setup.plant, identified.model, horizon, reference,
                                  cfg.run_steps, cfg.bootstrap, options);
  const std::string cfg_text = serialize_config(cfg);
  std::stringstream cfg_stream(cfg_text);
  std::string line;
  while (std::getline(cfg_stream, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos)
      log.header.emplace_back(line.substr(0, eq - 1), line.substr(eq + 2));
  }

  write_log_csv((fs::path(out_dir) / "log.csv").string(), log);
  merge_metrics_csv((fs::path(out_dir) / "metrics.csv").string(),
                    run_metrics(log, cfg.n_s, cfg.s, threshold, drop), log.input_dim());
  write_run_plots(out_dir, log);
}

void cmd_compare(const std::vector<std::string>& log_paths, const std::string& out_dir,
                 int drop, double threshold) {
  if (log_paths.empty()) throw ConfigError("compare: no log files given");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");

  CsvTable table;
  int m = -1;
  for (const auto& path : log_paths) {
    if (!fs::exists(path)) throw ConfigError("compare: log '" + path + "' not found");
    const ClosedLoopLog log = read_log_csv(path);
    if (m < 0) {
      m = log.input_dim();
      table.header = {"log", "controller", "threshold", "drop"};
      for (int c = 0; c < m; ++c)
        table.header.push_back("density_u" + std::to_string(c + 1));
      table.header.push_back("tracking_error");
    } else if (m != log.input_dim()) {
      throw ConfigError("compare: logs have different input dimensions");
    }
    const std::string tag =
        std::any_of(log.steps.begin(), log.steps.end(),
                    [](const LogStep& st) { return st.controller == "mampc"; })
            ? "mampc"
            : "mpc";
    std::vector<std::string> row{fs::path(path).filename().string(), tag,
                                 format_num(threshold), std::to_string(drop)};
    for (int c = 0; c < m; ++c)
      row.push_back(format_num(sparse_density(log, c, threshold, drop)));
    row.push_back(format_num(tracking_error(log, drop)));
    table.rows.push_back(std::move(row));
  }
  write_csv((fs::path(out_dir) / "comparison.csv").string(), table);

  // mirror the table on stdout
  for (size_t i = 0; i < table.header.size(); ++i)
    std::printf("%s%s", i ? "," : "", table.header[i].c_str());
  std::printf("\n");
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i)
      std::printf("%s%s", i ? "," : "", row[i].c_str());
    std::printf("\n");
  }
}

}  // namespace mampc
