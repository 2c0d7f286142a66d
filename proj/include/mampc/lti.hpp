#pragma once

#include <Eigen/Dense>

namespace mampc {

/// Discrete-time linear state-space model
///   x_{k+1} = A x_k + B u_k
///   y_k     = C x_k + D u_k
/// with sample time dt (seconds). Dimensions: A is n x n, B is n x m,
/// C is l x n, D is l x m. All checks happen at construction.
struct LtiModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;
  double dt = 1.0;

  LtiModel() = default;
  LtiModel(Eigen::MatrixXd A_in, Eigen::MatrixXd B_in, Eigen::MatrixXd C_in,
           Eigen::MatrixXd D_in, double dt_in);

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  int output_dim() const { return static_cast<int>(C.rows()); }
};

/// Affine map from initial state and free input moves to the stacked
/// output prediction y_{k+1} .. y_{k+n_p}:
///
///   y_stacked = Phi * x0 + Gamma * u_free
///
/// u_free holds the n_c free moves u_k .. u_{k+n_c-1} stacked time-major;
/// the last free move is held for prediction steps n_c .. n_p.
struct LiftedPrediction {
  Eigen::MatrixXd Phi;    // (n_p*l) x n
  Eigen::MatrixXd Gamma;  // (n_p*l) x (n_c*m)
  int n_p = 0;
  int n_c = 0;
};

/// Zero-order-hold discretization of a continuous-time model (Ac, Bc, Cc, Dc).
/// A = exp(Ac*dt); B is the convolution integral, both obtained from the
/// matrix exponential of the augmented matrix [[Ac, Bc], [0, 0]]*dt.
LtiModel zoh_discretize(const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& Bc,
                        const Eigen::MatrixXd& Cc, const Eigen::MatrixXd& Dc,
                        double dt);

/// Runs the state recursion for T steps. u has one row per step (T x m).
/// Returns states (T x n, the state *at* each step, starting with x0) and
/// outputs (T x l).
struct SimulationResult {
  Eigen::MatrixXd states;
  Eigen::MatrixXd outputs;
};
SimulationResult simulate(const LtiModel& model, const Eigen::VectorXd& x0,
                          const Eigen::MatrixXd& u);

/// Builds the lifted prediction maps for horizons 1 <= n_c <= n_p.
LiftedPrediction lift(const LtiModel& model, int n_p, int n_c);

}  // namespace mampc
