#pragma once

#include <Eigen/Dense>

namespace mampc {

/// Continuous-time nonlinear simulator interface: a state derivative and an
/// output map, both pure functions of (x, u).
class PlantModel {
 public:
  virtual ~PlantModel() = default;
  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual Eigen::VectorXd derivative(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u) const = 0;
  virtual Eigen::VectorXd output(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u) const = 0;
};

/// One classical 4-stage Runge-Kutta step with u held constant.
Eigen::VectorXd rk4_step(const PlantModel& plant, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double dt);

/// Advances the plant over one sample period of length dt using `substeps`
/// internal RK4 steps.
Eigen::VectorXd integrate_plant(const PlantModel& plant, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& u, double dt, int substeps);

}  // namespace mampc
