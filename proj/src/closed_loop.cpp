#include "mampc/closed_loop.hpp"

#include <deque>
#include <stdexcept>
#include <string>

namespace mampc {

ClosedLoopLog closed_loop(const PlantModel& plant, const LtiModel& model,
                          const HorizonConfig& cfg, const Eigen::MatrixXd& r_trajectory,
                          int N, int bootstrap, const ClosedLoopOptions& options) {
  const int m = model.input_dim();
  const int l = model.output_dim();
  if (plant.input_dim() != m || plant.output_dim() != l)
    throw std::invalid_argument("closed_loop: plant and model dimensions differ");
  if (r_trajectory.cols() != l || r_trajectory.rows() < 1)
    throw std::invalid_argument("closed_loop: reference trajectory must be N x l");
  if (options.x0.size() != plant.state_dim())
    throw std::invalid_argument("closed_loop: plant initial state has wrong size");
  if (bootstrap < cfg.n_s)
    throw std::invalid_argument("closed_loop: bootstrap must cover the sparsity horizon");

  const Eigen::VectorXd u_off =
      options.input_offset.size() ? options.input_offset : Eigen::VectorXd::Zero(m);
  const Eigen::VectorXd y_off =
      options.output_offset.size() ? options.output_offset : Eigen::VectorXd::Zero(l);
  const int mpc_until = options.kind == ControllerKind::mpc ? N : bootstrap;

  MampcController controller(model, cfg);
  ClosedLoopLog log;

  Eigen::VectorXd x_plant = options.x0;
  Eigen::VectorXd x_model = Eigen::VectorXd::Zero(model.state_dim());
  Eigen::VectorXd u_prev = Eigen::VectorXd::Zero(m);  // deviation frame
  std::deque<Eigen::VectorXd> past;
  for (int i = 0; i < cfg.n_s; ++i) past.emplace_back(Eigen::VectorXd::Zero(m));

  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd y_abs = plant.output(x_plant, u_off + u_prev);
    const Eigen::VectorXd y_dev = y_abs - y_off;

    Eigen::VectorXd bias = Eigen::VectorXd::Zero(l);
    if (options.output_bias_correction)
      bias = y_dev - (model.C * x_model + model.D * u_prev);

    // reference rows for k+1 .. k+n_p, deviation frame, bias folded in
    Eigen::MatrixXd r_window(cfg.n_p, l);
    for (int i = 0; i < cfg.n_p; ++i) {
      const int row = std::min<int>(k + 1 + i, static_cast<int>(r_trajectory.rows()) - 1);
      r_window.row(i) = r_trajectory.row(row) - y_off.transpose() - bias.transpose();
    }

    LogStep step;
    step.k = k;
    step.reference = r_trajectory.row(std::min<int>(k, r_trajectory.rows() - 1));
    step.output = y_abs;

    Eigen::VectorXd u_dev;
    try {
      if (k < mpc_until) {
        u_dev = controller.baseline_step(x_model, r_window, u_prev);
        step.controller = "mpc";
        step.alt_iterations = 0;
        step.objective = controller.last_baseline_objective();
      } else {
        Eigen::MatrixXd past_mat(cfg.n_s, m);
        for (int i = 0; i < cfg.n_s; ++i) past_mat.row(i) = past[i].transpose();
        AttentionStepResult res = controller.step(x_model, r_window, past_mat, u_prev);
        u_dev = res.u_applied;
        step.controller = "mampc";
        step.alt_iterations = res.alt_iterations;
        step.objective = res.objective_trace.back();
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("closed_loop: controller failed at step " +
                               std::to_string(k) + ": " + e.what());
    }

    step.input = u_off + u_dev;
    log.steps.push_back(step);

    try {
      x_plant = integrate_plant(plant, x_plant, step.input, model.dt,
                                options.plant_substeps);
    } catch (const std::exception& e) {
      throw std::runtime_error("closed_loop: plant integration failed at step " +
                               std::to_string(k) + ": " + e.what());
    }
    if (!x_plant.allFinite())
      throw std::runtime_error("closed_loop: non-finite plant state at step " +
                               std::to_string(k));

    x_model = model.A * x_model + model.B * u_dev;
    if (cfg.n_s > 0) {
      past.pop_front();
      past.push_back(u_dev);
    }
    u_prev = u_dev;
  }
  return log;
}

}  // namespace mampc
