#include "mampc/sofc.hpp"

#include <cmath>
#include <stdexcept>

namespace mampc {

void SofcParams::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("SofcParams: T must be positive");
  if (!(j_0 > 0.0) || !(j_L > 0.0))
    throw std::invalid_argument("SofcParams: current densities must be positive");
  if (!(V_an > 0.0) || !(V_cat > 0.0))
    throw std::invalid_argument("SofcParams: channel volumes must be positive");
  if (!(A_a > 0.0) || !(A_c > 0.0) || !(A_cell > 0.0))
    throw std::invalid_argument("SofcParams: areas must be positive");
  if (!(C_d > 0.0 && C_d <= 1.0))
    throw std::invalid_argument("SofcParams: discharge coefficient must lie in (0, 1]");
  if (!(D2_over_D1 > 0.0 && D2_over_D1 < 1.0))
    throw std::invalid_argument("SofcParams: orifice must be narrower than the manifold");
  if (!(fuel_h2_fraction > 0.0 && fuel_h2_fraction < 1.0) ||
      !(air_o2_fraction > 0.0 && air_o2_fraction < 1.0))
    throw std::invalid_argument("SofcParams: inlet molar fractions must lie in (0, 1)");
}

double SofcParams::orifice_constant() const {
  const double r4 = std::pow(D2_over_D1, 4);
  return C_d / std::sqrt(1.0 - r4);
}

ActivationBranches sofc_activation_branches(double j, const SofcParams& p) {
  const double rt4f = p.R * p.T / (4.0 * p.F);
  const double rt2f = p.R * p.T / (2.0 * p.F);
  return {rt4f * (j / p.j_0), rt2f * std::log(j / p.j_0) + rt4f * (j / p.j_0)};
}

double sofc_activation_loss(double j, const SofcParams& p) {
  const ActivationBranches b = sofc_activation_branches(j, p);
  return j <= p.j_0 ? b.low : b.high;
}

double sofc_output(const Eigen::Vector4d& x, double I, const SofcParams& p) {
  if (!(x.minCoeff() > 0.0))
    throw std::runtime_error("sofc_output: partial pressures must be positive");
  const double j = I / p.A_cell;
  if (j >= p.j_L)
    throw std::runtime_error("sofc_output: current density reached the limiting value");

  const double P_H2 = x(0), P_H2O = x(1), P_O2 = x(2);
  const double minus_dgf = 188600.0 - 56.0 * (p.T - 1073.15);
  const double E = p.N_o / (2.0 * p.F) *
                   (minus_dgf + p.R * p.T * std::log(P_H2 * std::sqrt(P_O2) /
                                                     (P_H2O * std::sqrt(p.P_atm))));
  const double r = 0.2 * std::exp(-2870.0 * (1.0 / 1196.15 - 1.0 / p.T));
  const double eta_ohm = r * I;
  const double eta_conc = -(p.R * p.T / (4.0 * p.F)) * std::log(1.0 - j / p.j_L);
  const double eta_act = sofc_activation_loss(j, p);
  return E - eta_ohm - eta_conc - eta_act;
}

Eigen::Vector4d sofc_derivative(const Eigen::Vector4d& x, const Eigen::Vector3d& u,
                                const SofcParams& p) {
  const double P_H2 = x(0), P_H2O = x(1), P_O2 = x(2), P_N2 = x(3);
  const double fuel = u(0), air = u(1), I = u(2);

  const double anode_head = P_H2 + P_H2O - p.P_atm;
  if (!(anode_head > 0.0))
    throw std::runtime_error("sofc_derivative: anode pressure fell to ambient "
                             "(outlet square root undefined)");
  const double cathode_head = P_O2 + P_N2 - p.P_atm;
  if (!(cathode_head > 0.0))
    throw std::runtime_error("sofc_derivative: cathode pressure fell to ambient "
                             "(outlet square root undefined)");

  const double C = p.orifice_constant();
  const double anode_flux =
      std::sqrt(2.0 * anode_head / (p.R * p.T * (P_H2 * p.M_H2 + P_H2O * p.M_H2O)));
  const double cathode_flux =
      std::sqrt(2.0 * cathode_head / (p.R * p.T * (P_O2 * p.M_O2 + P_N2 * p.M_N2)));
  const double out_H2 = C * p.A_a * P_H2 * anode_flux;
  const double out_H2O = C * p.A_a * P_H2O * anode_flux;
  const double out_O2 = C * p.A_c * P_O2 * cathode_flux;
  const double out_N2 = C * p.A_c * P_N2 * cathode_flux;

  const double in_H2 = p.fuel_h2_fraction * fuel;
  const double in_H2O = (1.0 - p.fuel_h2_fraction) * fuel;
  const double in_O2 = p.air_o2_fraction * air;
  const double in_N2 = (1.0 - p.air_o2_fraction) * air;

  const double Kr = p.K_r();
  Eigen::Vector4d dx;
  dx(0) = p.R * p.T / p.V_an * (in_H2 - out_H2 - 2.0 * Kr * I);
  dx(1) = p.R * p.T / p.V_an * (in_H2O - out_H2O + 2.0 * Kr * I);
  dx(2) = p.R * p.T / p.V_cat * (in_O2 - out_O2 - Kr * I);
  dx(3) = p.R * p.T / p.V_cat * (in_N2 - out_N2);
  return dx;
}

Eigen::VectorXd SofcPlant::derivative(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u) const {
  return sofc_derivative(x.head<4>(),
                         Eigen::Vector3d(u(0), u(1), params_.I_nominal), params_);
}

Eigen::VectorXd SofcPlant::output(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& /*u*/) const {
  Eigen::VectorXd y(1);
  y(0) = sofc_output(x.head<4>(), params_.I_nominal, params_);
  return y;
}

Eigen::Vector4d sofc_steady_state(const SofcParams& p, double fuel, double air,
                                  double duration, double substep) {
  SofcPlant plant(p);
  Eigen::VectorXd x(4);
  x << 0.3 * p.P_atm, 0.8 * p.P_atm, 0.2 * p.P_atm, 1.0 * p.P_atm;
  Eigen::VectorXd u(2);
  u << fuel, air;
  const int steps = static_cast<int>(duration / substep);
  for (int i = 0; i < steps; ++i) {
    x = rk4_step(plant, x, u, substep);
    if (i % 1000 == 0) {
      const Eigen::VectorXd dx = plant.derivative(x, u);
      if (dx.lpNorm<Eigen::Infinity>() < 1e-7) break;
    }
  }
  return x.head<4>();
}

}  // namespace mampc
