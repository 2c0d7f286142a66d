#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mampc/closed_loop.hpp"
#include "mampc/config.hpp"
#include "mampc/csv.hpp"
#include "mampc/plant.hpp"

namespace mampc {

/// Plant instance plus its operating point; derived from an
/// ExperimentConfig, never serialized.
struct ExperimentSetup {
  std::unique_ptr<PlantModel> plant;
  Eigen::VectorXd u_ss;  // steady input, absolute units
  Eigen::VectorXd x_ss;  // plant state at the operating point
  Eigen::VectorXd y_ss;  // steady output
};

ExperimentSetup build_plant(const ExperimentConfig& cfg);

/// HorizonConfig in the model's deviation frame (limits shifted by u_ss/y_ss).
HorizonConfig make_horizon_config(const ExperimentConfig& cfg,
                                  const Eigen::VectorXd& u_ss,
                                  const Eigen::VectorXd& y_ss);

/// Absolute reference trajectory (run_steps x l) from the piecewise-constant
/// segments in the config.
Eigen::MatrixXd make_reference(const ExperimentConfig& cfg, const Eigen::VectorXd& y_ss);

/// PRBS excitation experiment; writes <out>/dataset.csv and the resolved
/// config echo.
void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir);

/// Subspace identification of <out>/dataset.csv; writes <out>/model.csv.
void cmd_identify(const ExperimentConfig& cfg, const std::string& out_dir);

/// Closed-loop run against <out>/model.csv; writes log.csv, merges the run's
/// rows into metrics.csv, and renders inputs.svg / outputs.svg.
void cmd_run(const ExperimentConfig& cfg, const std::string& out_dir,
             ControllerKind kind, int drop, double threshold);

/// Metrics of several logs merged into one table (stdout + comparison.csv).
void cmd_compare(const std::vector<std::string>& log_paths, const std::string& out_dir,
                 int drop, double threshold);

/// Metric rows exactly as written to metrics.csv (exposed for tests).
struct MetricsRow {
  std::string controller;
  int n_s = 0;
  int s = 0;
  double threshold = 0.0;
  int drop = 0;
  std::vector<double> density;  // per input channel
  double error = 0.0;
};
std::vector<MetricsRow> run_metrics(const ClosedLoopLog& log, int n_s, int s,
                                    double threshold, int drop);
void merge_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows,
                       int input_dim);

}  // namespace mampc
