#include <doctest.h>

#include <random>

#include "mampc/metrics.hpp"

using namespace mampc;

namespace {

ClosedLoopLog log_from_inputs(const std::vector<double>& u,
                              const std::vector<double>& y = {},
                              const std::vector<double>& r = {}) {
  ClosedLoopLog log;
  for (size_t k = 0; k < u.size(); ++k) {
    LogStep step;
    step.k = static_cast<int>(k);
    step.input = Eigen::VectorXd::Constant(1, u[k]);
    step.output = Eigen::VectorXd::Constant(1, k < y.size() ? y[k] : 0.0);
    step.reference = Eigen::VectorXd::Constant(1, k < r.size() ? r[k] : 0.0);
    step.controller = "mpc";
    log.steps.push_back(step);
  }
  return log;
}

}  // namespace

TEST_CASE("sparse_density: two of four changes exceed the threshold") {
  // inputs chosen so the successive differences are 0.05, 0.2, 0.3, 0.0
  ClosedLoopLog log = log_from_inputs({0.0, 0.05, 0.25, 0.55, 0.55});
  CHECK(sparse_density(log, 0, 0.1, 0) == doctest::Approx(0.5));
}

TEST_CASE("sparse_density: constant input has density zero") {
  ClosedLoopLog log = log_from_inputs({1.0, 1.0, 1.0, 1.0});
  CHECK(sparse_density(log, 0, 0.1, 0) == 0.0);
}

TEST_CASE("sparse_density: dropping steps uses the previous logged input") {
  // big change exactly at the first retained step
  ClosedLoopLog log = log_from_inputs({0.0, 0.0, 1.0, 1.0, 1.0, 1.0});
  CHECK(sparse_density(log, 0, 0.1, 2) == doctest::Approx(0.25));
  CHECK(sparse_density(log, 0, 0.1, 3) == 0.0);
}

TEST_CASE("sparse_density: lies in [0,1] and is non-increasing in the threshold") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> u(40);
  for (auto& v : u) v = dist(rng);
  ClosedLoopLog log = log_from_inputs(u);
  double prev = 1.0;
  for (double thr : {0.0, 0.2, 0.5, 1.0, 3.0}) {
    const double d = sparse_density(log, 0, thr, 0);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(d <= prev + 1e-15);
    prev = d;
  }
}

TEST_CASE("sparse_density: appended zero-change steps only renormalize the count") {
  ClosedLoopLog log = log_from_inputs({0.0, 1.0, 1.0});
  const double d3 = sparse_density(log, 0, 0.1, 0);  // 1 of 2
  ClosedLoopLog longer = log_from_inputs({0.0, 1.0, 1.0, 1.0, 1.0});
  const double d5 = sparse_density(longer, 0, 0.1, 0);  // 1 of 4
  CHECK(d3 == doctest::Approx(0.5));
  CHECK(d5 == doctest::Approx(0.25));
}

TEST_CASE("sparse_density: rejects an empty window") {
  ClosedLoopLog log = log_from_inputs({0.0, 1.0});
  CHECK_THROWS_AS(sparse_density(log, 0, 0.1, 2), std::invalid_argument);
  CHECK_THROWS_AS(sparse_density(log, 1, 0.1, 0), std::invalid_argument);
}

TEST_CASE("tracking_error: perfect tracking gives zero") {
  ClosedLoopLog log = log_from_inputs({0, 0, 0}, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
  CHECK(tracking_error(log, 0) == 0.0);
}

TEST_CASE("tracking_error: constant offset squares") {
  ClosedLoopLog log =
      log_from_inputs({0, 0, 0, 0}, {1.5, 1.5, 1.5, 1.5}, {1.0, 1.0, 1.0, 1.0});
  CHECK(tracking_error(log, 0) == doctest::Approx(0.25));
}

TEST_CASE("tracking_error: dropping the transient reduces the error") {
  ClosedLoopLog log =
      log_from_inputs({0, 0, 0, 0, 0}, {9.0, 1.0, 1.0, 1.0, 1.0},
                      {1.0, 1.0, 1.0, 1.0, 1.0});
  CHECK(tracking_error(log, 1) < tracking_error(log, 0));
  CHECK(tracking_error(log, 1) == 0.0);
}

TEST_CASE("tracking_error: matches an independent one-liner on random logs") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  ClosedLoopLog log;
  const int T = 30, l = 2;
  for (int k = 0; k < T; ++k) {
    LogStep step;
    step.k = k;
    step.input = Eigen::VectorXd::Zero(1);
    step.output = Eigen::VectorXd::NullaryExpr(l, [&](int) { return dist(rng); });
    step.reference = Eigen::VectorXd::NullaryExpr(l, [&](int) { return dist(rng); });
    log.steps.push_back(step);
  }
  const int drop = 4;
  double expected = 0.0;
  for (int k = drop; k < T; ++k)
    expected += (log.steps[k].output - log.steps[k].reference).squaredNorm();
  expected /= (T - drop);
  CHECK(std::abs(tracking_error(log, drop) - expected) <= 1e-12);
}
