#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mampc {

/// One controller sample of a closed-loop run. Reference, output and input
/// are recorded in plant (absolute) units.
struct LogStep {
  int k = 0;
  Eigen::VectorXd reference;  // l
  Eigen::VectorXd output;     // l
  Eigen::VectorXd input;      // m
  std::string controller;     // "mpc" or "mampc"
  int alt_iterations = 0;
  double objective = 0.0;
};

/// Unit of persistence and metric computation: the per-step records plus
/// the resolved configuration the run was produced from.
struct ClosedLoopLog {
  std::vector<LogStep> steps;
  std::vector<std::pair<std::string, std::string>> header;  // resolved config

  int length() const { return static_cast<int>(steps.size()); }
  int input_dim() const { return steps.empty() ? 0 : static_cast<int>(steps[0].input.size()); }
  int output_dim() const { return steps.empty() ? 0 : static_cast<int>(steps[0].output.size()); }
};

/// Fraction of retained steps whose input change on `channel` exceeds the
/// threshold in magnitude. The change at the first retained step uses the
/// previous logged input; with drop = 0 the count starts at step 1, so the
/// denominator is always the number of difference samples in the window.
double sparse_density(const ClosedLoopLog& log, int channel, double threshold,
                      int drop = 0);

/// Mean over retained steps of the squared output-error norm.
double tracking_error(const ClosedLoopLog& log, int drop = 0);

}  // namespace mampc
