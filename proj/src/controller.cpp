#include "mampc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mampc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd bound_or(const Eigen::VectorXd& b, int size, double fill) {
  if (b.size() == 0) return Eigen::VectorXd::Constant(size, fill);
  return b;
}

// Stacks r (n_p x l, row per step) time-major into a single vector.
Eigen::VectorXd stack_rows(const Eigen::MatrixXd& r) {
  Eigen::VectorXd out(r.size());
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    out.segment(i * r.cols(), r.cols()) = r.row(i).transpose();
  return out;
}

}  // namespace

void HorizonConfig::validate(int m, int l) const {
  if (n_c < 1 || n_c > n_p)
    throw std::invalid_argument("HorizonConfig: need 1 <= n_c <= n_p");
  if (n_s < 0) throw std::invalid_argument("HorizonConfig: n_s must be >= 0");
  const int d_hat = m * (window() - 1);
  if (s < 0 || s > d_hat)
    throw std::invalid_argument("HorizonConfig: s must lie in [0, m*(n_c+n_s-1)]");
  if (lambda < 0.0) throw std::invalid_argument("HorizonConfig: lambda must be >= 0");
  if (mu < 0.0) throw std::invalid_argument("HorizonConfig: mu must be >= 0");
  if (!(eps1 > 0.0)) throw std::invalid_argument("HorizonConfig: eps1 must be > 0");
  if (max_alt_iter < 1) throw std::invalid_argument("HorizonConfig: max_alt_iter must be >= 1");
  auto check_bounds = [](const Eigen::VectorXd& bmin, const Eigen::VectorXd& bmax,
                         int dim, const char* what) {
    if (bmin.size() > 0 && bmin.size() != dim)
      throw std::invalid_argument(std::string("HorizonConfig: ") + what + " lower bound size mismatch");
    if (bmax.size() > 0 && bmax.size() != dim)
      throw std::invalid_argument(std::string("HorizonConfig: ") + what + " upper bound size mismatch");
    if (bmin.size() == dim && bmax.size() == dim)
      for (int i = 0; i < dim; ++i)
        if (!(bmin(i) < bmax(i)))
          throw std::invalid_argument(std::string("HorizonConfig: ") + what + " bounds must satisfy min < max");
  };
  check_bounds(u_min, u_max, m, "input");
  check_bounds(y_min, y_max, l, "output");
}

Eigen::VectorXd StackedInput::applied(int n_s) const {
  Eigen::VectorXd u(channels);
  for (int c = 0; c < channels; ++c) u(c) = v(c * window + n_s);
  return u;
}

DifferenceMatrix build_difference_matrix(int m, int n_c, int n_s) {
  const int w = n_c + n_s;
  if (w < 2)
    throw std::invalid_argument("build_difference_matrix: need n_c + n_s >= 2");
  if (m < 1) throw std::invalid_argument("build_difference_matrix: need m >= 1");
  DifferenceMatrix d;
  d.channels = m;
  d.window = w;
  d.Psi.setZero(m * (w - 1), m * w);
  for (int c = 0; c < m; ++c)
    for (int t = 0; t + 1 < w; ++t) {
      d.Psi(c * (w - 1) + t, c * w + t) = -1.0;
      d.Psi(c * (w - 1) + t, c * w + t + 1) = 1.0;
    }
  return d;
}

Eigen::VectorXd best_s_sparse(const Eigen::VectorXd& w, int s) {
  const int d = static_cast<int>(w.size());
  if (s < 0 || s > d)
    throw std::invalid_argument("best_s_sparse: s out of range");
  if (s == d) return w;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  if (s == 0) return out;
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double ma = std::abs(w(a)), mb = std::abs(w(b));
    if (ma != mb) return ma > mb;
    return a < b;  // equal magnitudes keep the lowest index
  });
  for (int k = 0; k < s; ++k) out(idx[k]) = w(idx[k]);
  return out;
}

FirstStepForm make_first_step_form(const LtiModel& model, const HorizonConfig& cfg) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int l = model.output_dim();
  cfg.validate(m, l);

  FirstStepForm form;
  form.n = n;
  form.m = m;
  form.l = l;
  form.cfg = cfg;
  form.cfg.u_min = bound_or(cfg.u_min, m, -kInf);
  form.cfg.u_max = bound_or(cfg.u_max, m, kInf);
  form.cfg.y_min = bound_or(cfg.y_min, l, -kInf);
  form.cfg.y_max = bound_or(cfg.y_max, l, kInf);
  form.lifted = lift(model, cfg.n_p, cfg.n_c);

  const int w = cfg.window();
  const int dim = m * w;

  // channel-major stacked input -> time-major free moves
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(cfg.n_c * m, dim);
  for (int t = 0; t < cfg.n_c; ++t)
    for (int c = 0; c < m; ++c) S(t * m + c, c * w + cfg.n_s + t) = 1.0;
  form.G = form.lifted.Gamma * S;

  // input-change rows for the lambda term, one per free move
  form.Dlam.setZero(m * cfg.n_c, dim);
  for (int c = 0; c < m; ++c)
    for (int j = 0; j < cfg.n_c; ++j) {
      const int row = c * cfg.n_c + j;
      const int cur = c * w + cfg.n_s + j;
      form.Dlam(row, cur) = 1.0;
      if (cfg.n_s + j >= 1) form.Dlam(row, cur - 1) = -1.0;
      // n_s = 0, j = 0: the previous input is the constant u_prev
    }

  form.Psi = (w >= 2) ? build_difference_matrix(m, cfg.n_c, cfg.n_s).Psi
                      : Eigen::MatrixXd::Zero(0, dim);

  form.H = 2.0 * (form.G.transpose() * form.G +
                  cfg.lambda * form.Dlam.transpose() * form.Dlam +
                  cfg.mu * form.Psi.transpose() * form.Psi);

  // equality rows pin the recorded past inputs
  form.Aeq.setZero(m * cfg.n_s, dim);
  for (int c = 0; c < m; ++c)
    for (int p = 0; p < cfg.n_s; ++p) form.Aeq(c * cfg.n_s + p, c * w + p) = 1.0;

  // box rows: free inputs first, then predicted outputs (finite bounds only)
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int c = 0; c < m; ++c)
    for (int t = 0; t < cfg.n_c; ++t) {
      const int col = c * w + cfg.n_s + t;
      if (std::isfinite(form.cfg.u_max(c))) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dim);
        row(col) = 1.0;
        rows.push_back(row);
        rhs.push_back(form.cfg.u_max(c));
      }
      if (std::isfinite(form.cfg.u_min(c))) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dim);
        row(col) = -1.0;
        rows.push_back(row);
        rhs.push_back(-form.cfg.u_min(c));
      }
    }
  form.n_input_rows = static_cast<int>(rows.size());
  for (int i = 0; i < cfg.n_p * l; ++i) {
    const int ch = i % l;
    if (std::isfinite(form.cfg.y_max(ch))) form.out_upper_rows.push_back(i);
    if (std::isfinite(form.cfg.y_min(ch))) form.out_lower_rows.push_back(i);
  }

  const int total = form.n_input_rows + static_cast<int>(form.out_upper_rows.size() +
                                                         form.out_lower_rows.size());
  form.Aineq.setZero(total, dim);
  form.bineq_const.resize(form.n_input_rows);
  for (int i = 0; i < form.n_input_rows; ++i) {
    form.Aineq.row(i) = rows[i];
    form.bineq_const(i) = rhs[i];
  }
  int at = form.n_input_rows;
  for (int i : form.out_upper_rows) form.Aineq.row(at++) = form.G.row(i);
  for (int i : form.out_lower_rows) form.Aineq.row(at++) = -form.G.row(i);
  return form;
}

namespace {

void check_step_arguments(const FirstStepForm& form, const Eigen::VectorXd& x,
                          const Eigen::MatrixXd& r, const Eigen::MatrixXd& past,
                          const Eigen::VectorXd& u_prev, const Eigen::VectorXd& v_hat) {
  const auto& cfg = form.cfg;
  if (x.size() != form.n || !x.allFinite())
    throw std::invalid_argument("first step: state must be a finite n-vector");
  if (r.rows() != cfg.n_p || r.cols() != form.l)
    throw std::invalid_argument("first step: reference must be n_p x l");
  if (past.rows() != cfg.n_s || (cfg.n_s > 0 && past.cols() != form.m))
    throw std::invalid_argument("first step: past must have exactly n_s rows");
  if (u_prev.size() != form.m)
    throw std::invalid_argument("first step: u_prev must be an m-vector");
  if (v_hat.size() != form.Psi.rows())
    throw std::invalid_argument("first step: v_hat must have m*(n_c+n_s-1) entries");
}

// f, beq and bineq of the first-step QP at the given data.
void build_vectors(const FirstStepForm& form, const Eigen::VectorXd& x,
                   const Eigen::MatrixXd& r, const Eigen::MatrixXd& past,
                   const Eigen::VectorXd& u_prev, const Eigen::VectorXd& v_hat,
                   Eigen::VectorXd& f, Eigen::VectorXd& beq, Eigen::VectorXd& bineq) {
  const auto& cfg = form.cfg;
  const int m = form.m;
  const int w = cfg.window();

  Eigen::VectorXd phi = form.lifted.Phi * x;
  Eigen::VectorXd r_stacked = stack_rows(r);

  Eigen::VectorXd d0 = Eigen::VectorXd::Zero(m * cfg.n_c);
  if (cfg.n_s == 0)
    for (int c = 0; c < m; ++c) d0(c * cfg.n_c) = u_prev(c);

  f = 2.0 * (form.G.transpose() * (phi - r_stacked) -
             cfg.lambda * form.Dlam.transpose() * d0 -
             cfg.mu * form.Psi.transpose() * v_hat);

  beq.resize(m * cfg.n_s);
  for (int c = 0; c < m; ++c)
    for (int p = 0; p < cfg.n_s; ++p) beq(c * cfg.n_s + p) = past(p, c);

  bineq.resize(form.Aineq.rows());
  bineq.head(form.n_input_rows) = form.bineq_const;
  int at = form.n_input_rows;
  for (int i : form.out_upper_rows) bineq(at++) = form.cfg.y_max(i % form.l) - phi(i);
  for (int i : form.out_lower_rows) bineq(at++) = phi(i) - form.cfg.y_min(i % form.l);
  (void)w;
}

// Threshold step: by default every difference in the window (including those
// wholly inside the pinned past) competes for the budget; the optional
// exclusion keeps past-only differences out of it and reproduces them
// verbatim in v_hat.
Eigen::VectorXd threshold_step(const FirstStepForm& form, const Eigen::VectorXd& psi_v) {
  const auto& cfg = form.cfg;
  if (!cfg.exclude_past_differences || cfg.n_s < 2)
    return best_s_sparse(psi_v, std::min<int>(cfg.s, static_cast<int>(psi_v.size())));
  const int w1 = cfg.window() - 1;  // difference slots per channel
  std::vector<int> budgeted;
  for (int c = 0; c < form.m; ++c)
    for (int t = cfg.n_s - 1; t < w1; ++t) budgeted.push_back(c * w1 + t);
  Eigen::VectorXd sub(budgeted.size());
  for (size_t i = 0; i < budgeted.size(); ++i) sub(i) = psi_v(budgeted[i]);
  const Eigen::VectorXd sub_sparse =
      best_s_sparse(sub, std::min<int>(cfg.s, static_cast<int>(sub.size())));
  Eigen::VectorXd v_hat = psi_v;  // past-only differences pass through
  for (size_t i = 0; i < budgeted.size(); ++i) v_hat(budgeted[i]) = sub_sparse(i);
  return v_hat;
}

Eigen::VectorXd initial_v_hat(const FirstStepForm& form, const Eigen::VectorXd& prev_v,
                              bool have_prev) {
  const auto& cfg = form.cfg;
  if (!cfg.warm_start_v_hat || !have_prev)
    return Eigen::VectorXd::Zero(form.Psi.rows());
  // shift the previous window one step forward, holding the last move
  const int w = cfg.window();
  Eigen::VectorXd shifted(prev_v.size());
  for (int c = 0; c < form.m; ++c)
    for (int t = 0; t < w; ++t)
      shifted(c * w + t) = prev_v(c * w + std::min(t + 1, w - 1));
  return threshold_step(form, form.Psi * shifted);
}

}  // namespace

QpProblem assemble_first_step(const FirstStepForm& form, const Eigen::VectorXd& x,
                              const Eigen::MatrixXd& r, const Eigen::MatrixXd& past,
                              const Eigen::VectorXd& u_prev,
                              const Eigen::VectorXd& v_hat) {
  check_step_arguments(form, x, r, past, u_prev, v_hat);
  Eigen::VectorXd f, beq, bineq;
  build_vectors(form, x, r, past, u_prev, v_hat, f, beq, bineq);
  return QpProblem(form.H, f, form.Aineq, bineq, form.Aeq, beq);
}

QpProblem assemble_first_step(const LtiModel& model, const HorizonConfig& cfg,
                              const Eigen::VectorXd& x, const Eigen::MatrixXd& r,
                              const Eigen::MatrixXd& past, const Eigen::VectorXd& u_prev,
                              const Eigen::VectorXd& v_hat) {
  return assemble_first_step(make_first_step_form(model, cfg), x, r, past, u_prev, v_hat);
}

double mampc_objective(const FirstStepForm& form, const Eigen::VectorXd& x,
                       const Eigen::MatrixXd& r, const Eigen::VectorXd& u_prev,
                       const Eigen::VectorXd& v, const Eigen::VectorXd& v_hat) {
  const auto& cfg = form.cfg;
  Eigen::VectorXd phi = form.lifted.Phi * x;
  Eigen::VectorXd d0 = Eigen::VectorXd::Zero(form.m * cfg.n_c);
  if (cfg.n_s == 0)
    for (int c = 0; c < form.m; ++c) d0(c * cfg.n_c) = u_prev(c);
  const double track = (form.G * v + phi - stack_rows(r)).squaredNorm();
  const double change = (form.Dlam * v - d0).squaredNorm();
  const double couple = (form.Psi * v - v_hat).squaredNorm();
  return track + cfg.lambda * change + cfg.mu * couple;
}

MampcController::MampcController(const LtiModel& model, const HorizonConfig& cfg)
    : form_(make_first_step_form(model, cfg)) {
  HorizonConfig mpc_cfg = cfg;
  mpc_cfg.n_s = 0;
  mpc_cfg.mu = 0.0;
  mpc_cfg.s = 0;
  mpc_form_ = make_first_step_form(model, mpc_cfg);

  QpSettings qs;
  qs.tol = cfg.qp_tol;
  qs.max_iter = cfg.qp_max_iter;
  const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(form_.H.rows());
  solver_.setup(QpProblem(form_.H, z0, form_.Aineq,
                          Eigen::VectorXd::Zero(form_.Aineq.rows()), form_.Aeq,
                          Eigen::VectorXd::Zero(form_.Aeq.rows())),
                qs);
  solver_.set_warm_start(true);
  const Eigen::VectorXd z1 = Eigen::VectorXd::Zero(mpc_form_.H.rows());
  mpc_solver_.setup(QpProblem(mpc_form_.H, z1, mpc_form_.Aineq,
                              Eigen::VectorXd::Zero(mpc_form_.Aineq.rows()),
                              mpc_form_.Aeq, Eigen::VectorXd::Zero(mpc_form_.Aeq.rows())),
                    qs);
  mpc_solver_.set_warm_start(true);
}

AttentionStepResult MampcController::step(const Eigen::VectorXd& x,
                                          const Eigen::MatrixXd& r,
                                          const Eigen::MatrixXd& past,
                                          const Eigen::VectorXd& u_prev) {
  const auto& cfg = form_.cfg;
  Eigen::VectorXd v_hat = initial_v_hat(form_, prev_v_star_, have_prev_v_);
  check_step_arguments(form_, x, r, past, u_prev, v_hat);

  AttentionStepResult res;
  Eigen::VectorXd v_star;
  Eigen::VectorXd f, beq, bineq;
  bool have_prev_iterate = false;
  Eigen::VectorXd v_prev_iter;

  for (int i = 0; i < cfg.max_alt_iter; ++i) {
    build_vectors(form_, x, r, past, u_prev, v_hat, f, beq, bineq);
    QpSolution sol = solver_.solve(f, beq, bineq);
    if (sol.status == QpStatus::infeasible)
      throw std::runtime_error("mampc_step: first-step QP infeasible at alternation " +
                               std::to_string(i + 1));
    v_star = sol.v;
    res.alt_iterations = i + 1;
    res.objective_trace.push_back(mampc_objective(form_, x, r, u_prev, v_star, v_hat));

    v_hat = threshold_step(form_, form_.Psi * v_star);
    res.objective_trace.push_back(mampc_objective(form_, x, r, u_prev, v_star, v_hat));

    if (have_prev_iterate && (v_star - v_prev_iter).lpNorm<1>() <= cfg.eps1) {
      res.converged = true;
      break;
    }
    v_prev_iter = v_star;
    have_prev_iterate = true;
  }

  res.v_star.v = v_star;
  res.v_star.channels = form_.m;
  res.v_star.window = cfg.window();
  res.v_hat = v_hat;
  res.u_applied = res.v_star.applied(cfg.n_s);
  prev_v_star_ = v_star;
  have_prev_v_ = true;
  return res;
}

Eigen::VectorXd MampcController::baseline_step(const Eigen::VectorXd& x,
                                               const Eigen::MatrixXd& r,
                                               const Eigen::VectorXd& u_prev) {
  const Eigen::MatrixXd past(0, form_.m);
  const Eigen::VectorXd v_hat = Eigen::VectorXd::Zero(mpc_form_.Psi.rows());
  check_step_arguments(mpc_form_, x, r, past, u_prev, v_hat);
  Eigen::VectorXd f, beq, bineq;
  build_vectors(mpc_form_, x, r, past, u_prev, v_hat, f, beq, bineq);
  QpSolution sol = mpc_solver_.solve(f, beq, bineq);
  if (sol.status == QpStatus::infeasible)
    throw std::runtime_error("mpc_step: QP infeasible");
  last_baseline_objective_ = mampc_objective(mpc_form_, x, r, u_prev, sol.v, v_hat);
  StackedInput si{sol.v, form_.m, mpc_form_.cfg.window()};
  return si.applied(0);
}

AttentionStepResult mampc_step(const LtiModel& model, const HorizonConfig& cfg,
                               const Eigen::VectorXd& x, const Eigen::MatrixXd& r,
                               const Eigen::MatrixXd& past,
                               const Eigen::VectorXd& u_prev) {
  MampcController controller(model, cfg);
  return controller.step(x, r, past, u_prev);
}

Eigen::VectorXd mpc_step(const LtiModel& model, const HorizonConfig& cfg,
                         const Eigen::VectorXd& x, const Eigen::MatrixXd& r,
                         const Eigen::VectorXd& u_prev) {
  MampcController controller(model, cfg);
  return controller.baseline_step(x, r, u_prev);
}

}  // namespace mampc
