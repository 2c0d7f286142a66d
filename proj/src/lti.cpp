#include "mampc/lti.hpp"

#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace mampc {

LtiModel::LtiModel(Eigen::MatrixXd A_in, Eigen::MatrixXd B_in,
                   Eigen::MatrixXd C_in, Eigen::MatrixXd D_in, double dt_in)
    : A(std::move(A_in)), B(std::move(B_in)), C(std::move(C_in)),
      D(std::move(D_in)), dt(dt_in) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("LtiModel: A must be square, got " +
                                std::to_string(A.rows()) + "x" +
                                std::to_string(A.cols()));
  if (B.rows() != A.rows())
    throw std::invalid_argument("LtiModel: B.rows() != A.rows()");
  if (C.cols() != A.cols())
    throw std::invalid_argument("LtiModel: C.cols() != A.cols()");
  if (D.rows() != C.rows() || D.cols() != B.cols())
    throw std::invalid_argument("LtiModel: D must be l x m");
  if (!(dt > 0.0))
    throw std::invalid_argument("LtiModel: dt must be positive");
}

LtiModel zoh_discretize(const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& Bc,
                        const Eigen::MatrixXd& Cc, const Eigen::MatrixXd& Dc,
                        double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("zoh_discretize: dt must be positive");
  if (!Ac.allFinite() || !Bc.allFinite())
    throw std::invalid_argument("zoh_discretize: non-finite entries in Ac/Bc");
  const auto n = Ac.rows();
  const auto m = Bc.cols();
  if (Ac.rows() != Ac.cols() || Bc.rows() != n)
    throw std::invalid_argument("zoh_discretize: dimension mismatch in Ac/Bc");

  // exp([[Ac, Bc],[0, 0]] * dt) = [[A, B],[0, I]]
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = Ac * dt;
  aug.topRightCorner(n, m) = Bc * dt;
  Eigen::MatrixXd e = aug.exp();

  return LtiModel(e.topLeftCorner(n, n), e.topRightCorner(n, m), Cc, Dc, dt);
}

SimulationResult simulate(const LtiModel& model, const Eigen::VectorXd& x0,
                          const Eigen::MatrixXd& u) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int l = model.output_dim();
  if (x0.size() != n) throw std::invalid_argument("simulate: x0 size mismatch");
  if (u.cols() != m) throw std::invalid_argument("simulate: u has wrong column count");
  const auto T = u.rows();

  SimulationResult out;
  out.states.resize(T, n);
  out.outputs.resize(T, l);
  Eigen::VectorXd x = x0;
  for (Eigen::Index t = 0; t < T; ++t) {
    out.states.row(t) = x.transpose();
    out.outputs.row(t) = (model.C * x + model.D * u.row(t).transpose()).transpose();
    x = model.A * x + model.B * u.row(t).transpose();
  }
  return out;
}

LiftedPrediction lift(const LtiModel& model, int n_p, int n_c) {
  if (n_c < 1 || n_c > n_p)
    throw std::invalid_argument("lift: need 1 <= n_c <= n_p, got n_c=" +
                                std::to_string(n_c) + " n_p=" + std::to_string(n_p));
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int l = model.output_dim();

  LiftedPrediction lp;
  lp.n_p = n_p;
  lp.n_c = n_c;
  lp.Phi.resize(n_p * l, n);
  lp.Gamma.setZero(n_p * l, n_c * m);

  // P = sensitivity of x_{k+t} to x0, X = sensitivity to the free moves.
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, n_c * m);
  for (int t = 0; t < n_p; ++t) {
    const int ju = std::min(t, n_c - 1);  // input applied over [k+t, k+t+1)
    X = model.A * X;
    X.middleCols(ju * m, m) += model.B;
    P = model.A * P;
    // row block t is the prediction y_{k+t+1}
    lp.Phi.middleRows(t * l, l) = model.C * P;
    lp.Gamma.middleRows(t * l, l) = model.C * X;
    const int jy = std::min(t + 1, n_c - 1);  // feedthrough input at k+t+1
    lp.Gamma.block(t * l, jy * m, l, m) += model.D;
  }
  return lp;
}

}  // namespace mampc
