#pragma once

#include <Eigen/Dense>

#include "mampc/controller.hpp"
#include "mampc/lti.hpp"
#include "mampc/metrics.hpp"
#include "mampc/plant.hpp"

namespace mampc {

enum class ControllerKind { mpc, mampc };

struct ClosedLoopOptions {
  ControllerKind kind = ControllerKind::mampc;
  Eigen::VectorXd x0;          // plant initial state
  Eigen::VectorXd input_offset;   // steady input added to model inputs
  Eigen::VectorXd output_offset;  // steady output subtracted before the model
  int plant_substeps = 1;         // RK4 substeps per controller sample
  // Feed the current model-output mismatch back into the reference window
  // (offset-free tracking without a state observer).
  bool output_bias_correction = true;
};

/// Receding-horizon run: MPC for the first `bootstrap` steps, then the
/// alternating minimization with the past-input window populated from the
/// applied inputs. The prediction model runs in deviation variables
/// alongside the plant; r_trajectory rows are absolute references, one per
/// step (the last row is held beyond its end).
ClosedLoopLog closed_loop(const PlantModel& plant, const LtiModel& model,
                          const HorizonConfig& cfg, const Eigen::MatrixXd& r_trajectory,
                          int N, int bootstrap, const ClosedLoopOptions& options);

}  // namespace mampc
