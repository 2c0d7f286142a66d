#include "mampc/qp.hpp"

#include <cmath>
#include <stdexcept>

namespace mampc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

}  // namespace

QpProblem::QpProblem(Eigen::MatrixXd H_in, Eigen::VectorXd f_in,
                     Eigen::MatrixXd Aineq_in, Eigen::VectorXd bineq_in,
                     Eigen::MatrixXd Aeq_in, Eigen::VectorXd beq_in)
    : H(std::move(H_in)), f(std::move(f_in)), Aineq(std::move(Aineq_in)),
      bineq(std::move(bineq_in)), Aeq(std::move(Aeq_in)), beq(std::move(beq_in)) {
  const auto d = f.size();
  if (H.rows() != d || H.cols() != d)
    throw std::invalid_argument("QpProblem: H must be d x d");
  if (Aineq.rows() != bineq.size() || (Aineq.rows() > 0 && Aineq.cols() != d))
    throw std::invalid_argument("QpProblem: inequality block dimension mismatch");
  if (Aeq.rows() != beq.size() || (Aeq.rows() > 0 && Aeq.cols() != d))
    throw std::invalid_argument("QpProblem: equality block dimension mismatch");
  // lifted-form assembly can leave asymmetric round-off
  H = 0.5 * (H + H.transpose()).eval();
}

QpSolver::QpSolver(const QpProblem& p, QpSettings settings) {
  setup(p, std::move(settings));
}

void QpSolver::setup(const QpProblem& p, QpSettings settings) {
  settings_ = std::move(settings);
  H_ = p.H;
  f_ = p.f;
  n_eq_ = static_cast<int>(p.Aeq.rows());
  n_ineq_ = static_cast<int>(p.Aineq.rows());
  const int d = p.dim();
  const int rows = n_eq_ + n_ineq_;

  A_.resize(rows, d);
  if (n_eq_ > 0) A_.topRows(n_eq_) = p.Aeq;
  if (n_ineq_ > 0) A_.bottomRows(n_ineq_) = p.Aineq;

  lo_.resize(rows);
  up_.resize(rows);
  rho_.resize(rows);
  for (int i = 0; i < n_eq_; ++i) {
    lo_(i) = up_(i) = p.beq(i);
    rho_(i) = settings_.rho_eq;
  }
  for (int i = 0; i < n_ineq_; ++i) {
    lo_(n_eq_ + i) = -kInf;
    up_(n_eq_ + i) = p.bineq(i);
    rho_(n_eq_ + i) = settings_.rho;
  }

  Eigen::MatrixXd K = H_;
  K.diagonal().array() += settings_.sigma;
  if (rows > 0) K += A_.transpose() * rho_.asDiagonal() * A_;
  kkt_.compute(K);
  if (kkt_.info() != Eigen::Success)
    throw std::runtime_error("QpSolver: KKT factorization failed (H not PSD?)");
  have_previous_ = false;
}

QpSolution QpSolver::solve() { return run(); }

QpSolution QpSolver::solve(const Eigen::VectorXd& f, const Eigen::VectorXd& beq,
                           const Eigen::VectorXd& bineq) {
  if (f.size() != f_.size() || beq.size() != n_eq_ || bineq.size() != n_ineq_)
    throw std::invalid_argument("QpSolver::solve: vector size mismatch");
  f_ = f;
  for (int i = 0; i < n_eq_; ++i) lo_(i) = up_(i) = beq(i);
  for (int i = 0; i < n_ineq_; ++i) up_(n_eq_ + i) = bineq(i);
  return run();
}

QpSolution QpSolver::run() {
  const int d = static_cast<int>(f_.size());
  const int rows = n_eq_ + n_ineq_;
  const double alpha = settings_.alpha;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
  if (warm_start_ && have_previous_) {
    x = x_prev_;
    z = z_prev_;
    y = y_prev_;
  }

  QpSolution sol;
  sol.v = x;
  sol.dual_eq.setZero(n_eq_);
  sol.dual_ineq.setZero(n_ineq_);

  double best_res = kInf;
  Eigen::VectorXd best_x = x, best_y = y;

  int iter = 0;
  for (; iter < settings_.max_iter; ++iter) {
    // x-update via the reduced SPD system
    Eigen::VectorXd rhs = settings_.sigma * x - f_;
    if (rows > 0) rhs.noalias() += A_.transpose() * (rho_.cwiseProduct(z) - y);
    Eigen::VectorXd x_tilde = kkt_.solve(rhs);

    Eigen::VectorXd x_next = alpha * x_tilde + (1.0 - alpha) * x;
    if (rows > 0) {
      Eigen::VectorXd z_tilde = A_ * x_tilde;
      Eigen::VectorXd z_relaxed = alpha * z_tilde + (1.0 - alpha) * z;
      Eigen::VectorXd z_next =
          (z_relaxed + y.cwiseQuotient(rho_)).cwiseMax(lo_).cwiseMin(up_);
      y += rho_.cwiseProduct(z_relaxed - z_next);
      z = z_next;
    }
    x = x_next;

    Eigen::VectorXd Ax = rows > 0 ? (A_ * x).eval() : Eigen::VectorXd();
    const double r_prim = rows > 0 ? inf_norm(Ax - z) : 0.0;
    Eigen::VectorXd grad = H_ * x + f_;
    if (rows > 0) grad.noalias() += A_.transpose() * y;
    const double r_dual = inf_norm(grad);

    if (settings_.on_iteration) {
      const double obj = 0.5 * x.dot(H_ * x) + f_.dot(x);
      settings_.on_iteration({iter + 1, obj, r_prim, r_dual});
    }

    const double res = std::max(r_prim, r_dual);
    if (res < best_res && x.allFinite()) {
      best_res = res;
      best_x = x;
      best_y = y;
    }

    if (!x.allFinite() || !y.allFinite()) {
      sol.status = QpStatus::infeasible;
      sol.kkt_residual = kInf;
      sol.iterations = iter + 1;
      return sol;
    }
    if (r_prim <= settings_.tol && r_dual <= settings_.tol) {
      sol.status = QpStatus::optimal;
      ++iter;
      break;
    }
    // Contradictory constraints drive the multipliers apart even where their
    // contributions cancel inside the stationarity residual, so the dual
    // vector itself is watched as well.
    if (iter + 1 >= settings_.diverge_check_iter &&
        std::max(r_dual, inf_norm(y)) > settings_.diverge_threshold) {
      sol.status = QpStatus::infeasible;
      sol.v = x;
      sol.kkt_residual = res;
      sol.iterations = iter + 1;
      return sol;
    }
  }

  if (sol.status != QpStatus::optimal) {
    sol.status = QpStatus::max_iter;
    x = best_x;
    y = best_y;
  }

  x_prev_ = x;
  z_prev_ = z;
  y_prev_ = y;
  have_previous_ = true;

  sol.v = x;
  sol.dual_eq = y.head(n_eq_);
  sol.dual_ineq = y.tail(n_ineq_);
  sol.iterations = iter;
  sol.objective = 0.5 * x.dot(H_ * x) + f_.dot(x);

  // residuals of the returned iterate
  {
    Eigen::VectorXd grad = H_ * x + f_;
    double r_prim = 0.0, r_comp = 0.0;
    if (rows > 0) {
      grad.noalias() += A_.transpose() * y;
      Eigen::VectorXd Ax = A_ * x;
      for (int i = 0; i < n_eq_; ++i)
        r_prim = std::max(r_prim, std::abs(Ax(i) - up_(i)));
      for (int i = n_eq_; i < rows; ++i) {
        r_prim = std::max(r_prim, std::max(0.0, Ax(i) - up_(i)));
        r_comp = std::max(r_comp, std::max(0.0, -y(i)));
        r_comp = std::max(r_comp, std::abs(y(i) * (up_(i) - Ax(i))));
      }
    }
    sol.kkt_residual = std::max({r_prim, inf_norm(grad), r_comp});
  }

  if (settings_.polish && polish(sol)) {
    sol.polished = true;
    if (sol.kkt_residual <= settings_.tol) sol.status = QpStatus::optimal;
  }
  return sol;
}

bool QpSolver::polish(QpSolution& sol) const {
  const int d = static_cast<int>(f_.size());

  // active set guess from the inequality multipliers
  const double y_thresh = 1e-8 * std::max(1.0, inf_norm(sol.dual_ineq));
  std::vector<int> active;
  for (int i = 0; i < n_ineq_; ++i)
    if (sol.dual_ineq(i) > y_thresh) active.push_back(i);
  const int na = n_eq_ + static_cast<int>(active.size());

  Eigen::MatrixXd Ah(na, d);
  Eigen::VectorXd bh(na);
  if (n_eq_ > 0) {
    Ah.topRows(n_eq_) = A_.topRows(n_eq_);
    bh.head(n_eq_) = up_.head(n_eq_);
  }
  for (size_t k = 0; k < active.size(); ++k) {
    Ah.row(n_eq_ + k) = A_.row(n_eq_ + active[k]);
    bh(n_eq_ + k) = up_(n_eq_ + active[k]);
  }

  const double delta = 1e-9;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d + na, d + na);
  K.topLeftCorner(d, d) = H_;
  K.topLeftCorner(d, d).diagonal().array() += delta;
  if (na > 0) {
    K.topRightCorner(d, na) = Ah.transpose();
    K.bottomLeftCorner(na, d) = Ah;
    K.bottomRightCorner(na, na).diagonal().array() -= delta;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);

  Eigen::VectorXd rhs(d + na);
  rhs.head(d) = -f_;
  rhs.tail(na) = bh;
  Eigen::VectorXd w = lu.solve(rhs);

  // two rounds of iterative refinement against the unregularized system
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd r(d + na);
    r.head(d) = -f_ - H_ * w.head(d);
    if (na > 0) {
      r.head(d).noalias() -= Ah.transpose() * w.tail(na);
      r.tail(na) = bh - Ah * w.head(d);
    }
    w += lu.solve(r);
  }
  if (!w.allFinite()) return false;

  Eigen::VectorXd x = w.head(d);
  Eigen::VectorXd y_act = w.tail(na);

  // validate feasibility and multiplier signs before accepting
  const double feas_tol = 1e-8;
  if (n_eq_ + n_ineq_ > 0) {
    Eigen::VectorXd Ax = A_ * x;
    for (int i = 0; i < n_eq_; ++i)
      if (std::abs(Ax(i) - up_(i)) > feas_tol * (1.0 + std::abs(up_(i)))) return false;
    for (int i = 0; i < n_ineq_; ++i)
      if (Ax(n_eq_ + i) - up_(n_eq_ + i) > feas_tol * (1.0 + std::abs(up_(n_eq_ + i))))
        return false;
  }
  for (int k = 0; k < static_cast<int>(active.size()); ++k)
    if (y_act(n_eq_ + k) < -feas_tol) return false;

  Eigen::VectorXd dual_ineq = Eigen::VectorXd::Zero(n_ineq_);
  for (size_t k = 0; k < active.size(); ++k)
    dual_ineq(active[k]) = std::max(0.0, y_act(n_eq_ + k));
  Eigen::VectorXd dual_eq = y_act.head(n_eq_);

  // recompute the KKT residual at the polished point
  Eigen::VectorXd grad = H_ * x + f_;
  double r_prim = 0.0, r_comp = 0.0;
  if (n_eq_ + n_ineq_ > 0) {
    if (n_eq_ > 0) grad.noalias() += A_.topRows(n_eq_).transpose() * dual_eq;
    if (n_ineq_ > 0) grad.noalias() += A_.bottomRows(n_ineq_).transpose() * dual_ineq;
    Eigen::VectorXd Ax = A_ * x;
    for (int i = 0; i < n_eq_; ++i)
      r_prim = std::max(r_prim, std::abs(Ax(i) - up_(i)));
    for (int i = 0; i < n_ineq_; ++i) {
      r_prim = std::max(r_prim, std::max(0.0, Ax(n_eq_ + i) - up_(n_eq_ + i)));
      r_comp = std::max(r_comp,
                        std::abs(dual_ineq(i) * (up_(n_eq_ + i) - Ax(n_eq_ + i))));
    }
  }
  const double res = std::max({r_prim, inf_norm(grad), r_comp});
  if (!(res < sol.kkt_residual)) return false;

  sol.v = x;
  sol.dual_eq = dual_eq;
  sol.dual_ineq = dual_ineq;
  sol.kkt_residual = res;
  sol.objective = 0.5 * x.dot(H_ * x) + f_.dot(x);
  return true;
}

QpSolution qp_solve(const QpProblem& p, double tol, int max_iter) {
  QpSettings s;
  s.tol = tol;
  s.max_iter = max_iter;
  return qp_solve(p, s);
}

QpSolution qp_solve(const QpProblem& p, const QpSettings& settings) {
  QpSolver solver(p, settings);
  return solver.solve();
}

}  // namespace mampc
