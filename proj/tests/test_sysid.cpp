#include <doctest.h>

#include <random>

#include "mampc/prbs.hpp"
#include "mampc/sysid.hpp"

using namespace mampc;

namespace {

Eigen::MatrixXd random_matrix(int r, int c, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::MatrixXd M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = dist(rng);
  return M;
}

LtiModel random_stable_model(int n, int m, int l, std::mt19937& rng) {
  // scale a random matrix to a spectral radius around 0.85
  Eigen::MatrixXd A = random_matrix(n, n, rng);
  const double radius = A.eigenvalues().cwiseAbs().maxCoeff();
  A *= 0.85 / radius;
  return LtiModel(A, random_matrix(n, m, rng), random_matrix(l, n, rng),
                  Eigen::MatrixXd::Zero(l, m), 1.0);
}

Eigen::MatrixXd prbs_inputs(int T, int m, int hold, std::mt19937& rng) {
  Eigen::MatrixXd u(T, m);
  std::uniform_int_distribution<int> seed_dist(1, 250);
  PrbsConfig base;
  base.order = 9;
  base.seed = static_cast<std::uint32_t>(seed_dist(rng));
  const int period = (1 << base.order) - 1;
  for (int c = 0; c < m; ++c) {
    PrbsConfig cfg = base;
    cfg.seed = prbs_phase_seed(base, c * (period / m));  // channels far apart in phase
    cfg.hold = hold;
    cfg.low = -1.0;
    cfg.high = 1.0;
    u.col(c) = prbs(cfg, T);
  }
  return u;
}

}  // namespace

TEST_CASE("detrend: constant columns become zero with the means recorded") {
  Eigen::MatrixXd u = Eigen::MatrixXd::Constant(10, 2, 3.0);
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(10, 1, -1.5);
  IoDataset d = detrend(u, y, 0.5);
  CHECK(d.u.norm() == 0.0);
  CHECK(d.y.norm() == 0.0);
  CHECK(d.mean_u(0) == 3.0);
  CHECK(d.mean_y(0) == -1.5);
  CHECK(d.dt == 0.5);
}

TEST_CASE("detrend: zero-mean data is unchanged and the round trip is exact") {
  std::mt19937 rng(3);
  Eigen::MatrixXd u = random_matrix(50, 2, rng);
  u.rowwise() -= u.colwise().mean();
  Eigen::MatrixXd y = random_matrix(50, 2, rng);
  IoDataset d = detrend(u, y, 1.0);
  CHECK((d.u - u).lpNorm<Eigen::Infinity>() < 1e-14);
  Eigen::MatrixXd y_back = d.y.rowwise() + d.mean_y.transpose();
  CHECK((y_back - y).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("subspace_identify: noise-free round trip recovers the Markov parameters") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 4; ++trial) {
    LtiModel truth = random_stable_model(2, 2, 2, rng);
    const int T = 600;
    Eigen::MatrixXd u = prbs_inputs(T, 2, 2, rng);
    SimulationResult sim = simulate(truth, Eigen::VectorXd::Zero(2), u);

    IoDataset data{u, sim.outputs, 1.0, Eigen::VectorXd::Zero(2),
                   Eigen::VectorXd::Zero(2)};
    SubspaceOptions opts;
    opts.order = 2;
    SubspaceResult result = subspace_identify(data, opts);

    const Eigen::MatrixXd mk_true = markov_parameters(truth, 20);
    const Eigen::MatrixXd mk_est = markov_parameters(result.model, 20);
    CHECK((mk_true - mk_est).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("subspace_identify: the singular-value gap finds the true order") {
  std::mt19937 rng(11);
  LtiModel truth = random_stable_model(3, 1, 2, rng);
  const int T = 900;
  Eigen::MatrixXd u = prbs_inputs(T, 1, 2, rng);
  SimulationResult sim = simulate(truth, Eigen::VectorXd::Zero(3), u);
  IoDataset data{u, sim.outputs, 1.0, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(2)};
  SubspaceOptions opts;
  opts.order = 0;  // automatic
  opts.block_rows = 8;
  SubspaceResult result = subspace_identify(data, opts);
  CHECK(result.order == 3);
}

TEST_CASE("subspace_identify: zero input is rejected as unexciting") {
  IoDataset data{Eigen::MatrixXd::Zero(400, 1), Eigen::MatrixXd::Zero(400, 1), 1.0,
                 Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  SubspaceOptions opts;
  opts.order = 2;
  CHECK_THROWS_AS(subspace_identify(data, opts), std::runtime_error);
}

TEST_CASE("subspace_identify: order beyond the numerical rank is rejected") {
  std::mt19937 rng(13);
  LtiModel truth = random_stable_model(1, 1, 1, rng);
  const int T = 500;
  Eigen::MatrixXd u = prbs_inputs(T, 1, 1, rng);
  SimulationResult sim = simulate(truth, Eigen::VectorXd::Zero(1), u);
  IoDataset data{u, sim.outputs, 1.0, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  SubspaceOptions opts;
  opts.order = 6;  // data has rank one
  CHECK_THROWS(subspace_identify(data, opts));
}

TEST_CASE("subspace_identify: too little data is rejected") {
  IoDataset data{Eigen::MatrixXd::Ones(30, 1), Eigen::MatrixXd::Ones(30, 1), 1.0,
                 Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  SubspaceOptions opts;
  opts.order = 2;
  CHECK_THROWS_AS(subspace_identify(data, opts), std::invalid_argument);
}

TEST_CASE("simulation_fit: identified model explains held-out data") {
  std::mt19937 rng(17);
  LtiModel truth = random_stable_model(4, 2, 2, rng);
  const int T = 1400;
  Eigen::MatrixXd u = prbs_inputs(T, 2, 3, rng);
  SimulationResult sim = simulate(truth, Eigen::VectorXd::Zero(4), u);

  const int T_fit = 1000;
  IoDataset data{u.topRows(T_fit), sim.outputs.topRows(T_fit), 1.0,
                 Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)};
  SubspaceOptions opts;
  opts.order = 4;
  SubspaceResult result = subspace_identify(data, opts);

  const double fit = simulation_fit(result.model, u.bottomRows(T - T_fit),
                                    sim.outputs.bottomRows(T - T_fit));
  CHECK(fit >= 99.0);
}

TEST_CASE("markov_parameters: first block is D, second is CB") {
  std::mt19937 rng(19);
  LtiModel model = random_stable_model(3, 2, 2, rng);
  Eigen::MatrixXd mk = markov_parameters(model, 3);
  CHECK((mk.topRows(2) - model.D).norm() == 0.0);
  CHECK((mk.middleRows(2, 2) - model.C * model.B).norm() < 1e-14);
  CHECK((mk.bottomRows(2) - model.C * model.A * model.B).norm() < 1e-14);
}
