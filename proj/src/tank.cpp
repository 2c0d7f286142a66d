#include "mampc/tank.hpp"

#include <cmath>
#include <stdexcept>

namespace mampc {

void TankParams::validate() const {
  for (int i = 0; i < 4; ++i)
    if (!(A(i) > 0.0) || !(a(i) > 0.0))
      throw std::invalid_argument("TankParams: all areas must be positive");
  if (!(g > 0.0)) throw std::invalid_argument("TankParams: g must be positive");
  if (!(gamma1 > 0.0 && gamma1 < 1.0 && gamma2 > 0.0 && gamma2 < 1.0))
    throw std::invalid_argument("TankParams: flow splits must lie in (0, 1)");
  if (k1 < 0.0 || k2 < 0.0)
    throw std::invalid_argument("TankParams: pump gains must be non-negative");
}

Eigen::Vector4d tank_derivative(const Eigen::Vector4d& h, const Eigen::Vector2d& nu,
                                const TankParams& p) {
  if (nu(0) < 0.0 || nu(1) < 0.0)
    throw std::invalid_argument("tank_derivative: valve openings must be non-negative");
  auto drain = [&](int i) {
    return p.a(i) * std::sqrt(2.0 * p.g * std::max(h(i), 0.0));
  };
  const double f1 = p.k1 * nu(0);
  const double f2 = p.k2 * nu(1);
  Eigen::Vector4d dh;
  dh(0) = (-drain(0) + drain(2) + p.gamma1 * f1) / p.A(0);
  dh(1) = (-drain(1) + drain(3) + p.gamma2 * f2) / p.A(1);
  dh(2) = (-drain(2) + (1.0 - p.gamma2) * f2) / p.A(2);
  dh(3) = (-drain(3) + (1.0 - p.gamma1) * f1) / p.A(3);
  return dh;
}

namespace {

double calibration_residual(const TankParams& p, const Eigen::Vector2d& nu_ss,
                            const Eigen::Vector4d& h_ss) {
  return tank_derivative(h_ss, nu_ss, p).lpNorm<Eigen::Infinity>();
}

// inflow matrix: equilibrium outflows F = M * (k1 nu1, k2 nu2)
Eigen::Matrix<double, 4, 2> inflow_matrix(const TankParams& p) {
  Eigen::Matrix<double, 4, 2> M;
  M << p.gamma1, 1.0 - p.gamma2,
       1.0 - p.gamma1, p.gamma2,
       0.0, 1.0 - p.gamma2,
       1.0 - p.gamma1, 0.0;
  return M;
}

}  // namespace

PumpCalibration pump_gains_from_drain_balance(const TankParams& p,
                                              const Eigen::Vector2d& nu_ss,
                                              const Eigen::Vector4d& h_ss) {
  if (!(nu_ss(0) > 0.0 && nu_ss(1) > 0.0))
    throw std::invalid_argument("pump calibration: steady valve openings must be positive");
  PumpCalibration cal;
  cal.k1 = p.a(3) * std::sqrt(2.0 * p.g * h_ss(3)) / ((1.0 - p.gamma1) * nu_ss(0));
  cal.k2 = p.a(2) * std::sqrt(2.0 * p.g * h_ss(2)) / ((1.0 - p.gamma2) * nu_ss(1));
  TankParams fitted = p;
  fitted.k1 = cal.k1;
  fitted.k2 = cal.k2;
  cal.residual = calibration_residual(fitted, nu_ss, h_ss);
  cal.consistent = std::isfinite(cal.residual) && cal.residual <= 0.01;
  return cal;
}

PumpCalibration calibrate_pump_gains(const TankParams& p, const Eigen::Vector2d& nu_ss,
                                     const Eigen::Vector4d& h_ss) {
  PumpCalibration cal = pump_gains_from_drain_balance(p, nu_ss, h_ss);
  const Eigen::Matrix<double, 4, 2> M = inflow_matrix(p);
  Eigen::Vector2d q(cal.k1 * nu_ss(0), cal.k2 * nu_ss(1));

  // Gauss-Newton on the equilibrium-height residuals; the steady state
  // overdetermines (k1, k2), so this spreads the mismatch across tanks.
  for (int pass = 0; pass < 20; ++pass) {
    const Eigen::Vector4d F = M * q;
    Eigen::Vector4d r;
    Eigen::Matrix<double, 4, 2> J;
    for (int i = 0; i < 4; ++i) {
      const double denom = p.a(i) * p.a(i) * 2.0 * p.g;
      r(i) = F(i) * F(i) / denom - h_ss(i);
      J.row(i) = 2.0 * F(i) / denom * M.row(i);
    }
    const Eigen::Vector2d step =
        (J.transpose() * J).ldlt().solve(J.transpose() * r);
    q -= step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-12) break;
  }

  cal.k1 = q(0) / nu_ss(0);
  cal.k2 = q(1) / nu_ss(1);
  TankParams fitted = p;
  fitted.k1 = cal.k1;
  fitted.k2 = cal.k2;
  cal.residual = calibration_residual(fitted, nu_ss, h_ss);
  cal.consistent = std::isfinite(cal.residual) && cal.residual <= 0.01;
  return cal;
}

Eigen::Vector4d tank_equilibrium(const TankParams& p, const Eigen::Vector2d& nu) {
  const Eigen::Vector2d q(p.k1 * nu(0), p.k2 * nu(1));
  const Eigen::Vector4d F = inflow_matrix(p) * q;
  Eigen::Vector4d h;
  for (int i = 0; i < 4; ++i) {
    const double v = F(i) / p.a(i);
    h(i) = v * v / (2.0 * p.g);
  }
  return h;
}

Eigen::VectorXd TankPlant::derivative(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u) const {
  return tank_derivative(x.head<4>(), u.head<2>(), params_);
}

Eigen::VectorXd TankPlant::output(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& /*u*/) const {
  return params_.k_c * x.head<2>();
}

}  // namespace mampc
