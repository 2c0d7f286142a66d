#pragma once

#include <Eigen/Dense>

#include "mampc/plant.hpp"

namespace mampc {

/// Quadruple-tank physical constants. Areas in cm^2, g in cm/s^2, pump
/// gains k1/k2 in cm^3/(s * %valve). The flow from valve i splits with
/// ratio gamma_i into its lower tank, the remainder feeding the diagonal
/// upper tank.
struct TankParams {
  Eigen::Vector4d A{730.0, 730.0, 730.0, 730.0};       // tank cross-sections
  Eigen::Vector4d a{2.05, 2.26, 2.37, 2.07};           // outlet cross-sections
  double g = 981.0;
  double k_c = 2.0;                                    // level sensor gain
  double gamma1 = 0.3;
  double gamma2 = 0.3;
  double k1 = 0.0;
  double k2 = 0.0;

  void validate() const;
  bool minimum_phase() const { return gamma1 + gamma2 < 1.0; }
};

/// dh/dt of the four levels at valve openings nu (percent). Levels are
/// clamped at zero inside the square roots.
Eigen::Vector4d tank_derivative(const Eigen::Vector4d& h, const Eigen::Vector2d& nu,
                                const TankParams& p);

struct PumpCalibration {
  double k1 = 0.0;
  double k2 = 0.0;
  /// max |dh/dt| over the four tanks at (h_ss, nu_ss) with the fitted gains
  double residual = 0.0;
  bool consistent = true;  // residual within tolerance
};

/// Gains from the drain balances of tanks 3 and 4 alone, e.g.
/// k2 = a3*sqrt(2 g h3) / ((1-gamma2) nu2).
PumpCalibration pump_gains_from_drain_balance(const TankParams& p,
                                              const Eigen::Vector2d& nu_ss,
                                              const Eigen::Vector4d& h_ss);

/// Least-squares fit of (k1, k2) so the model equilibrium matches all four
/// target heights (Gauss-Newton on the height residuals, started from the
/// drain-balance gains). The recorded steady state overdetermines the two
/// gains; `consistent` is false when the remaining residual exceeds
/// 0.01 cm/s.
PumpCalibration calibrate_pump_gains(const TankParams& p, const Eigen::Vector2d& nu_ss,
                                     const Eigen::Vector4d& h_ss);

/// Equilibrium heights under constant valve openings.
Eigen::Vector4d tank_equilibrium(const TankParams& p, const Eigen::Vector2d& nu);

/// PlantModel wrapper; output is k_c * (h1, h2).
class TankPlant : public PlantModel {
 public:
  explicit TankPlant(TankParams params) : params_(std::move(params)) {
    params_.validate();
  }
  int state_dim() const override { return 4; }
  int input_dim() const override { return 2; }
  int output_dim() const override { return 2; }
  Eigen::VectorXd derivative(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) const override;
  Eigen::VectorXd output(const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) const override;
  const TankParams& params() const { return params_; }

 private:
  TankParams params_;
};

}  // namespace mampc
