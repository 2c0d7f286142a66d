#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <vector>

namespace mampc {

/// Dense convex quadratic program
///   min 1/2 v'Hv + f'v   s.t.  Aineq v <= bineq,  Aeq v = beq.
/// H is symmetrized on construction; empty constraint blocks are allowed.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd Aineq;
  Eigen::VectorXd bineq;
  Eigen::MatrixXd Aeq;
  Eigen::VectorXd beq;

  QpProblem() = default;
  QpProblem(Eigen::MatrixXd H_in, Eigen::VectorXd f_in,
            Eigen::MatrixXd Aineq_in = {}, Eigen::VectorXd bineq_in = {},
            Eigen::MatrixXd Aeq_in = {}, Eigen::VectorXd beq_in = {});

  int dim() const { return static_cast<int>(f.size()); }
};

enum class QpStatus { optimal, max_iter, infeasible };

struct QpSolution {
  Eigen::VectorXd v;
  Eigen::VectorXd dual_eq;    // multipliers of Aeq v = beq
  Eigen::VectorXd dual_ineq;  // multipliers of Aineq v <= bineq (>= 0)
  double objective = 0.0;
  double kkt_residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  QpStatus status = QpStatus::max_iter;
  bool polished = false;
};

struct QpIterate {
  int iteration;
  double objective;
  double primal_residual;
  double dual_residual;
};

/// Operator-splitting settings. rho applies to inequality rows, equality
/// rows use rho_eq; alpha is the over-relaxation factor.
struct QpSettings {
  double rho = 1.0;
  double rho_eq = 1e3;
  double sigma = 1e-6;
  double alpha = 1.6;
  double tol = 1e-8;
  int max_iter = 100000;
  bool polish = true;
  // Divergence heuristic: declared infeasible once the dual residual blows
  // past this bound after diverge_check_iter iterations.
  double diverge_threshold = 1e6;
  int diverge_check_iter = 1000;
  std::function<void(const QpIterate&)> on_iteration;
};

/// Reusable solver: the factorization depends only on (H, Aeq, Aineq), so a
/// receding-horizon loop can update the vectors (f, beq, bineq) and re-solve
/// cheaply, optionally warm-started from the previous solution.
class QpSolver {
 public:
  QpSolver() = default;
  QpSolver(const QpProblem& p, QpSettings settings = {});

  void setup(const QpProblem& p, QpSettings settings = {});

  /// Solves with the vectors stored at setup time.
  QpSolution solve();
  /// Solves with updated vectors (matrices unchanged since setup).
  QpSolution solve(const Eigen::VectorXd& f, const Eigen::VectorXd& beq,
                   const Eigen::VectorXd& bineq);

  /// Next solve starts from the previous solution instead of zero.
  void set_warm_start(bool enabled) { warm_start_ = enabled; }

 private:
  QpSolution run();
  bool polish(QpSolution& sol) const;

  Eigen::MatrixXd H_;
  Eigen::VectorXd f_;
  Eigen::MatrixXd A_;      // [Aeq; Aineq]
  Eigen::VectorXd lo_, up_;  // row bounds: eq rows lo=up, ineq rows lo=-inf
  int n_eq_ = 0;
  int n_ineq_ = 0;
  Eigen::VectorXd rho_;    // per-row penalty
  Eigen::LLT<Eigen::MatrixXd> kkt_;
  QpSettings settings_;
  bool warm_start_ = false;
  bool have_previous_ = false;
  Eigen::VectorXd x_prev_, z_prev_, y_prev_;
};

/// One-shot interface.
QpSolution qp_solve(const QpProblem& p, double tol = 1e-8, int max_iter = 100000);
QpSolution qp_solve(const QpProblem& p, const QpSettings& settings);

}  // namespace mampc
