#include "mampc/sysid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mampc {

namespace {

// Block-Hankel matrix with `rows` block rows starting at sample `first`;
// data rows are samples, columns channels.
Eigen::MatrixXd block_hankel(const Eigen::MatrixXd& data, int first, int rows, int cols) {
  const int ch = static_cast<int>(data.cols());
  Eigen::MatrixXd H(rows * ch, cols);
  for (int b = 0; b < rows; ++b)
    for (int c = 0; c < cols; ++c)
      H.block(b * ch, c, ch, 1) = data.row(first + b + c).transpose();
  return H;
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-12 * sv(0) * std::max(M.rows(), M.cols());
  Eigen::VectorXd inv = sv;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    inv(k) = sv(k) > tol ? 1.0 / sv(k) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

IoDataset detrend(const Eigen::MatrixXd& u, const Eigen::MatrixXd& y, double dt) {
  if (u.rows() != y.rows())
    throw std::invalid_argument("detrend: u and y must have equal row counts");
  if (u.rows() < 1) throw std::invalid_argument("detrend: empty dataset");
  IoDataset d;
  d.dt = dt;
  d.mean_u = u.colwise().mean();
  d.mean_y = y.colwise().mean();
  d.u = u.rowwise() - d.mean_u.transpose();
  d.y = y.rowwise() - d.mean_y.transpose();
  return d;
}

SubspaceResult subspace_identify(const IoDataset& data, const SubspaceOptions& opts) {
  const int T = static_cast<int>(data.u.rows());
  const int m = static_cast<int>(data.u.cols());
  const int l = static_cast<int>(data.y.cols());
  if (T != data.y.rows()) throw std::invalid_argument("subspace_identify: row mismatch");

  const int base_order = opts.order > 0 ? opts.order : opts.max_order;
  const int i = opts.block_rows > 0 ? opts.block_rows : 2 * base_order + 2;
  if (opts.order > 0 && i <= opts.order)
    throw std::invalid_argument("subspace_identify: block_rows must exceed the order");
  const int j = T - 2 * i + 1;
  if (j < 2 * i * (m + l))
    throw std::invalid_argument("subspace_identify: not enough data for " +
                                std::to_string(i) + " block rows");

  const double scale = 1.0 / std::sqrt(static_cast<double>(j));
  Eigen::MatrixXd Uf = scale * block_hankel(data.u, i, i, j);
  Eigen::MatrixXd Up = scale * block_hankel(data.u, 0, i, j);
  Eigen::MatrixXd Yp = scale * block_hankel(data.y, 0, i, j);
  Eigen::MatrixXd Yf = scale * block_hankel(data.y, i, i, j);

  const int r1 = i * m, r2 = i * (m + l), r3 = i * l;
  Eigen::MatrixXd stacked(r1 + r2 + r3, j);
  stacked.topRows(r1) = Uf;
  stacked.middleRows(r1, i * m) = Up;
  stacked.middleRows(r1 + i * m, i * l) = Yp;
  stacked.bottomRows(r3) = Yf;

  // LQ factorization via QR of the transpose
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked.transpose());
  Eigen::MatrixXd L = qr.matrixQR()
                          .topRows(r1 + r2 + r3)
                          .triangularView<Eigen::Upper>()
                          .transpose();

  // persistence of excitation shows up as a full-rank input Hankel block
  const Eigen::VectorXd d11 = L.topLeftCorner(r1, r1).diagonal().cwiseAbs();
  if (d11.maxCoeff() <= 0.0 || d11.minCoeff() < 1e-10 * d11.maxCoeff())
    throw std::runtime_error(
        "subspace_identify: input is not persistently exciting (rank-deficient "
        "input Hankel matrix)");

  const Eigen::MatrixXd L21 = L.block(r1, 0, r2, r1);
  const Eigen::MatrixXd L22 = L.block(r1, r1, r2, r2);
  const Eigen::MatrixXd L31 = L.block(r1 + r2, 0, r3, r1);
  const Eigen::MatrixXd L32 = L.block(r1 + r2, r1, r3, r2);

  // oblique projection of the future outputs, in LQ coordinates
  Eigen::MatrixXd Wp(r2, r1 + r2);
  Wp.leftCols(r1) = L21;
  Wp.rightCols(r2) = L22;
  Eigen::MatrixXd Ob = L32 * pinv(L22) * Wp;
  (void)L31;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ob, Eigen::ComputeThinU);
  const Eigen::VectorXd sv = svd.singularValues();

  int n = opts.order;
  if (n <= 0) {
    // largest gap in the leading singular values
    double best_ratio = 0.0;
    const int search = std::min<int>(opts.max_order, static_cast<int>(sv.size()) - 1);
    for (int k = 1; k <= search; ++k) {
      const double next = std::max(sv(k), 1e-300);
      const double ratio = sv(k - 1) / next;
      if (ratio > best_ratio) {
        best_ratio = ratio;
        n = k;
      }
    }
  }
  if (n <= 0 || n >= static_cast<int>(sv.size()) || sv(n - 1) <= 1e-10 * sv(0))
    throw std::runtime_error(
        "subspace_identify: order " + std::to_string(n) +
        " exceeds the numerical rank (singular-value gap s" + std::to_string(n) +
        "/s1 = " + std::to_string(n >= 1 && n <= sv.size() ? sv(n - 1) / sv(0) : 0.0) + ")");
  if ((i - 1) * l < n)
    throw std::invalid_argument("subspace_identify: block_rows too small for order " +
                                std::to_string(n));

  Eigen::MatrixXd gamma =
      svd.matrixU().leftCols(n) * sv.head(n).cwiseSqrt().asDiagonal();
  Eigen::MatrixXd C = gamma.topRows(l);
  // shift invariance of the extended observability matrix
  Eigen::MatrixXd A = gamma.topRows((i - 1) * l)
                          .colPivHouseholderQr()
                          .solve(gamma.bottomRows((i - 1) * l));

  // B, D and the initial state by least squares over the simulated response
  const int nb = n * m, nd = l * m;
  Eigen::MatrixXd reg(T * l, n + nb + nd);
  Eigen::VectorXd target(T * l);
  Eigen::MatrixXd CAk = C;                            // C A^k
  Eigen::MatrixXd Mk = Eigen::MatrixXd::Zero(l, nb);  // forced-response regressor
  Eigen::MatrixXd ImA = Eigen::MatrixXd::Zero(nb, nb);
  for (int c = 0; c < m; ++c) ImA.block(c * n, c * n, n, n) = A;
  reg.setZero();
  for (int k = 0; k < T; ++k) {
    reg.block(k * l, 0, l, n) = CAk;
    reg.block(k * l, n, l, nb) = Mk;
    for (int c = 0; c < m; ++c)
      reg.block(k * l, n + nb + c * l, l, l) =
          data.u(k, c) * Eigen::MatrixXd::Identity(l, l);
    target.segment(k * l, l) = data.y.row(k).transpose();

    // advance the recursions
    Eigen::MatrixXd Mk_next = Mk * ImA;
    for (int c = 0; c < m; ++c) Mk_next.block(0, c * n, l, n) += data.u(k, c) * C;
    Mk = std::move(Mk_next);
    CAk = CAk * A;
  }
  Eigen::VectorXd theta = reg.colPivHouseholderQr().solve(target);

  Eigen::MatrixXd B(n, m), D(l, m);
  for (int c = 0; c < m; ++c) B.col(c) = theta.segment(n + c * n, n);
  for (int c = 0; c < m; ++c) D.col(c) = theta.segment(n + nb + c * l, l);

  SubspaceResult result;
  result.model = LtiModel(A, B, C, D, data.dt);
  result.singular_values = sv;
  result.order = n;
  return result;
}

Eigen::MatrixXd markov_parameters(const LtiModel& model, int count) {
  const int l = model.output_dim();
  const int m = model.input_dim();
  Eigen::MatrixXd params(count * l, m);
  params.topRows(l) = model.D;
  Eigen::MatrixXd CA = model.C;
  for (int k = 1; k < count; ++k) {
    params.middleRows(k * l, l) = CA * model.B;
    CA = CA * model.A;
  }
  return params;
}

double simulation_fit(const LtiModel& model, const Eigen::MatrixXd& u,
                      const Eigen::MatrixXd& y) {
  const int T = static_cast<int>(u.rows());
  const int n = model.state_dim();
  const int l = model.output_dim();
  if (y.rows() != T) throw std::invalid_argument("simulation_fit: row mismatch");

  // forced response from zero initial state
  SimulationResult forced = simulate(model, Eigen::VectorXd::Zero(n), u);

  // fit the initial state to the residual
  Eigen::MatrixXd reg(T * l, n);
  Eigen::VectorXd target(T * l);
  Eigen::MatrixXd CAk = model.C;
  for (int k = 0; k < T; ++k) {
    reg.middleRows(k * l, l) = CAk;
    target.segment(k * l, l) = (y.row(k) - forced.outputs.row(k)).transpose();
    CAk = CAk * model.A;
  }
  Eigen::VectorXd x0 = reg.colPivHouseholderQr().solve(target);

  SimulationResult sim = simulate(model, x0, u);
  const Eigen::MatrixXd err = y - sim.outputs;
  const Eigen::MatrixXd centered = y.rowwise() - y.colwise().mean();
  const double denom = centered.squaredNorm();
  if (denom < 1e-30) return err.squaredNorm() < 1e-30 ? 100.0 : 0.0;
  return 100.0 * (1.0 - err.squaredNorm() / denom);
}

}  // namespace mampc
