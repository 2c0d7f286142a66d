#pragma once

// Independent reference computations used by the unit and acceptance
// suites. Everything here is deliberately written from the definitions,
// not via the library's own code paths.

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace oracles {

// Long-run projected gradient descent for min 1/2 v'Hv + f'v with box
// constraints lo <= v <= hi.
inline Eigen::VectorXd projected_gradient_box(const Eigen::MatrixXd& H,
                                              const Eigen::VectorXd& f,
                                              const Eigen::VectorXd& lo,
                                              const Eigen::VectorXd& hi,
                                              long max_iter = 1000000) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const double L = es.eigenvalues().maxCoeff();
  const double step = 1.0 / L;
  Eigen::VectorXd v = (lo.cwiseMax(Eigen::VectorXd::Zero(f.size()))).cwiseMin(hi);
  for (long i = 0; i < max_iter; ++i) {
    Eigen::VectorXd next = (v - step * (H * v + f)).cwiseMax(lo).cwiseMin(hi);
    const double change = (next - v).lpNorm<Eigen::Infinity>();
    v = next;
    if (change <= 1e-16) break;
  }
  return v;
}

// Best s-sparse approximation objective by exhaustive support enumeration:
// minimal ||w - z||^2 over all z with at most s nonzeros.
inline double exhaustive_sparse_objective(const Eigen::VectorXd& w, int s) {
  const int d = static_cast<int>(w.size());
  double best = w.squaredNorm();  // empty support
  std::vector<int> support(s);
  // iterate over all subsets of size s via combinations
  if (s == 0) return best;
  std::vector<int> idx(s);
  for (int i = 0; i < s; ++i) idx[i] = i;
  while (true) {
    double kept = 0.0;
    for (int i : idx) kept += w(i) * w(i);
    best = std::min(best, w.squaredNorm() - kept);
    int k = s - 1;
    while (k >= 0 && idx[k] == d - s + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

struct RandomBoxQp {
  Eigen::MatrixXd H;
  Eigen::VectorXd f, lo, hi;
};

inline RandomBoxQp random_box_qp(int d, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = dist(rng);
  RandomBoxQp qp;
  qp.H = M.transpose() * M + 0.1 * Eigen::MatrixXd::Identity(d, d);
  qp.f.resize(d);
  qp.lo.resize(d);
  qp.hi.resize(d);
  for (int i = 0; i < d; ++i) {
    qp.f(i) = 2.0 * dist(rng);
    const double a = dist(rng), b = dist(rng);
    qp.lo(i) = std::min(a, b) - 0.2;
    qp.hi(i) = std::max(a, b) + 0.2;
  }
  return qp;
}

}  // namespace oracles
