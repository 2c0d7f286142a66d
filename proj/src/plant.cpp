#include "mampc/plant.hpp"

#include <stdexcept>

namespace mampc {

Eigen::VectorXd rk4_step(const PlantModel& plant, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  const Eigen::VectorXd k1 = plant.derivative(x, u);
  const Eigen::VectorXd k2 = plant.derivative(x + 0.5 * dt * k1, u);
  const Eigen::VectorXd k3 = plant.derivative(x + 0.5 * dt * k2, u);
  const Eigen::VectorXd k4 = plant.derivative(x + dt * k3, u);
  Eigen::VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite())
    throw std::runtime_error("rk4_step: non-finite state after step");
  return next;
}

Eigen::VectorXd integrate_plant(const PlantModel& plant, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& u, double dt, int substeps) {
  if (substeps < 1) throw std::invalid_argument("integrate_plant: substeps must be >= 1");
  const double h = dt / substeps;
  Eigen::VectorXd state = x;
  for (int i = 0; i < substeps; ++i) state = rk4_step(plant, state, u, h);
  return state;
}

}  // namespace mampc
