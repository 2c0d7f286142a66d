#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mampc/lti.hpp"
#include "mampc/qp.hpp"

namespace mampc {

/// Full controller tuning record. Bounds are componentwise and may be
/// +/-infinity; they apply in the same (deviation) frame as the model.
struct HorizonConfig {
  int n_p = 10;  // prediction horizon, steps
  int n_c = 5;   // control horizon, steps
  int n_s = 0;   // sparsity horizon: past inputs pinned into the window
  int s = 0;     // max nonzero input changes over the window
  double lambda = 1.0;  // input-change weight
  double mu = 10.0;     // coupling penalty on (v_hat - Psi v)
  Eigen::VectorXd u_min, u_max;  // m-vectors
  Eigen::VectorXd y_min, y_max;  // l-vectors
  double eps1 = 1e-4;            // alternating-loop convergence tolerance
  int max_alt_iter = 50;
  double qp_tol = 1e-9;
  int qp_max_iter = 200000;
  // When false (the default, matching the formulation) differences lying
  // wholly inside the pinned past consume sparsity budget.
  bool exclude_past_differences = false;
  // Start each step's alternation from v_hat = Psi * (shifted previous v).
  bool warm_start_v_hat = false;

  int window() const { return n_c + n_s; }
  void validate(int m, int l) const;
};

/// Decision vector over the window [k-n_s, k+n_c-1], stacked channel-major:
/// entries [c*(n_c+n_s), (c+1)*(n_c+n_s)) hold channel c at times
/// k-n_s, ..., k+n_c-1.
struct StackedInput {
  Eigen::VectorXd v;
  int channels = 0;
  int window = 0;  // n_c + n_s

  double entry(int channel, int t) const { return v(channel * window + t); }
  /// Input applied at time k (first free move per channel).
  Eigen::VectorXd applied(int n_s) const;
};

/// Block-diagonal first-difference operator: one (w-1) x w bidiagonal block
/// per channel, mapping the stacked input to its successive differences.
struct DifferenceMatrix {
  Eigen::MatrixXd Psi;  // m*(w-1) x m*w
  int channels = 0;
  int window = 0;
};

DifferenceMatrix build_difference_matrix(int m, int n_c, int n_s);

/// Euclidean projection onto vectors with at most s nonzeros: keeps the s
/// largest-magnitude entries (ties resolved toward the lowest index).
Eigen::VectorXd best_s_sparse(const Eigen::VectorXd& w, int s);

/// Everything about the first-step QP that is fixed once (model, cfg) are
/// known. Only the vectors (f, beq, bineq) change along a closed loop.
struct FirstStepForm {
  int n = 0, m = 0, l = 0;
  HorizonConfig cfg;
  LiftedPrediction lifted;
  Eigen::MatrixXd G;      // stacked outputs = G v + Phi x
  Eigen::MatrixXd Dlam;   // input-change rows entering the lambda term
  Eigen::MatrixXd Psi;
  Eigen::MatrixXd H;      // constant Hessian of the QP
  Eigen::MatrixXd Aeq;    // past-pinning rows
  Eigen::MatrixXd Aineq;  // finite box rows (inputs then outputs)
  // bookkeeping for assembling bineq
  std::vector<int> out_upper_rows, out_lower_rows;  // stacked-output indices
  Eigen::VectorXd bineq_const;                      // input-box part
  int n_input_rows = 0;
};

FirstStepForm make_first_step_form(const LtiModel& model, const HorizonConfig& cfg);

/// Data of the first-step QP (objective of P1 for fixed v_hat, plus the
/// prediction, box and past-pinning constraints) as an explicit QpProblem.
/// past has n_s rows (times k-n_s .. k-1); u_prev is u*_{k-1}, used by the
/// j=0 input-change term when n_s = 0.
QpProblem assemble_first_step(const FirstStepForm& form, const Eigen::VectorXd& x,
                              const Eigen::MatrixXd& r, const Eigen::MatrixXd& past,
                              const Eigen::VectorXd& u_prev,
                              const Eigen::VectorXd& v_hat);
QpProblem assemble_first_step(const LtiModel& model, const HorizonConfig& cfg,
                              const Eigen::VectorXd& x, const Eigen::MatrixXd& r,
                              const Eigen::MatrixXd& past, const Eigen::VectorXd& u_prev,
                              const Eigen::VectorXd& v_hat);

/// Objective value J(v, v_hat): tracking + lambda * input changes +
/// mu * ||v_hat - Psi v||^2.
double mampc_objective(const FirstStepForm& form, const Eigen::VectorXd& x,
                       const Eigen::MatrixXd& r, const Eigen::VectorXd& u_prev,
                       const Eigen::VectorXd& v, const Eigen::VectorXd& v_hat);

struct AttentionStepResult {
  Eigen::VectorXd u_applied;
  StackedInput v_star;
  Eigen::VectorXd v_hat;  // m*(w-1), at most s nonzeros
  int alt_iterations = 0;
  std::vector<double> objective_trace;  // after each half-step
  bool converged = false;
};

/// Receding-horizon controller for one loop: caches the lifted form and the
/// QP factorization, and warm-starts successive solves.
class MampcController {
 public:
  MampcController(const LtiModel& model, const HorizonConfig& cfg);

  /// One alternating-minimization step. r is n_p x l (rows are the
  /// references for k+1 .. k+n_p), past is n_s x m.
  AttentionStepResult step(const Eigen::VectorXd& x, const Eigen::MatrixXd& r,
                           const Eigen::MatrixXd& past, const Eigen::VectorXd& u_prev);

  /// Baseline MPC step on the same model (no coupling, no sparsity).
  Eigen::VectorXd baseline_step(const Eigen::VectorXd& x, const Eigen::MatrixXd& r,
                                const Eigen::VectorXd& u_prev);
  double last_baseline_objective() const { return last_baseline_objective_; }

  const FirstStepForm& form() const { return form_; }
  /// The degenerate (n_s = 0, mu = 0) form the baseline solves.
  const FirstStepForm& baseline_form() const { return mpc_form_; }

 private:
  FirstStepForm form_;       // mampc form (cfg as given)
  FirstStepForm mpc_form_;   // same cfg with n_s = 0, mu = 0
  QpSolver solver_;
  QpSolver mpc_solver_;
  Eigen::VectorXd prev_v_star_;  // for optional v_hat warm start
  bool have_prev_v_ = false;
  double last_baseline_objective_ = 0.0;
};

/// One-shot forms of the two controller steps (contract-level interface;
/// closed loops should hold a MampcController instead).
AttentionStepResult mampc_step(const LtiModel& model, const HorizonConfig& cfg,
                               const Eigen::VectorXd& x, const Eigen::MatrixXd& r,
                               const Eigen::MatrixXd& past,
                               const Eigen::VectorXd& u_prev);
Eigen::VectorXd mpc_step(const LtiModel& model, const HorizonConfig& cfg,
                         const Eigen::VectorXd& x, const Eigen::MatrixXd& r,
                         const Eigen::VectorXd& u_prev);

}  // namespace mampc
