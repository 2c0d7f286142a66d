#pragma once

#include <Eigen/Dense>

#include "mampc/plant.hpp"

namespace mampc {

/// Solid-oxide fuel-cell stack parameters. State is the vector of partial
/// pressures (P_H2, P_H2O, P_O2, P_N2) in Pa; inputs are inlet molar flow
/// rates of fuel (H2 + H2O) and air (O2 + N2) in mol/s plus the stack
/// current in A. Output is the stack voltage.
struct SofcParams {
  double N_o = 384.0;       // cells in the stack
  double A_a = 0.0025;      // anode orifice area, m^2
  double A_c = 0.0025;      // cathode orifice area, m^2
  double C_d = 0.75;        // orifice discharge coefficient
  double T = 1273.15;       // operating temperature, K
  double j_L = 1500.0;      // limiting current density, A/m^2
  double j_0 = 10000.0;     // exchange current density, A/m^2
  double I_nominal = 400.0; // stack current, A
  double F = 96485.0;       // Faraday constant, C/mol
  double R = 8.314;         // gas constant, J/(mol K)

  // Quantities the stack tables leave open; defaults recorded in every log.
  double V_an = 0.01;        // anode channel volume, m^3
  double V_cat = 0.01;       // cathode channel volume, m^3
  double A_cell = 0.4;       // cell area, m^2 (keeps j = I/A below j_L at 400 A)
  double D2_over_D1 = 0.5;   // orifice/manifold diameter ratio
  double fuel_h2_fraction = 0.9;
  double air_o2_fraction = 0.21;
  double P_atm = 101325.0;
  double M_H2 = 0.002, M_H2O = 0.018, M_O2 = 0.032, M_N2 = 0.028;  // kg/mol

  void validate() const;
  double K_r() const { return N_o / (4.0 * F); }
  double orifice_constant() const;  // C_d / sqrt(1 - (D2/D1)^4)
};

/// Both activation-loss branch expressions evaluated at current density j;
/// they coincide at j = j_0.
struct ActivationBranches {
  double low;   // (RT/4F) (j/j_0)
  double high;  // (RT/2F) ln(j/j_0) + (RT/4F) (j/j_0)
};
ActivationBranches sofc_activation_branches(double j, const SofcParams& p);
double sofc_activation_loss(double j, const SofcParams& p);

/// Stack voltage V = E - eta_ohm - eta_conc - eta_act at pressures x and
/// stack current I. Requires positive pressures and j = I/A_cell < j_L.
double sofc_output(const Eigen::Vector4d& x, double I, const SofcParams& p);

/// Species balances of the four partial pressures. u = (fuel flow, air
/// flow, stack current). Fails if an outlet square root becomes imaginary,
/// naming the offending compartment.
Eigen::Vector4d sofc_derivative(const Eigen::Vector4d& x, const Eigen::Vector3d& u,
                                const SofcParams& p);

/// Control-facing wrapper: two manipulated inputs (fuel, air), the stack
/// current held at its nominal value.
class SofcPlant : public PlantModel {
 public:
  explicit SofcPlant(SofcParams params) : params_(std::move(params)) {
    params_.validate();
  }
  int state_dim() const override { return 4; }
  int input_dim() const override { return 2; }
  int output_dim() const override { return 1; }
  Eigen::VectorXd derivative(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) const override;
  Eigen::VectorXd output(const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) const override;
  const SofcParams& params() const { return params_; }

 private:
  SofcParams params_;
};

/// Settles the stack at constant (fuel, air) flows from a generic starting
/// point; used to locate the operating point before experiments.
Eigen::Vector4d sofc_steady_state(const SofcParams& p, double fuel, double air,
                                  double duration = 40.0, double substep = 2e-4);

}  // namespace mampc
