#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mampc/closed_loop.hpp"
#include "mampc/experiment.hpp"

using namespace mampc;
namespace fs = std::filesystem;

namespace {

class ContinuousLinearPlant : public PlantModel {
 public:
  ContinuousLinearPlant(Eigen::MatrixXd Ac, Eigen::MatrixXd Bc, Eigen::MatrixXd C)
      : Ac_(std::move(Ac)), Bc_(std::move(Bc)), C_(std::move(C)) {}
  int state_dim() const override { return static_cast<int>(Ac_.rows()); }
  int input_dim() const override { return static_cast<int>(Bc_.cols()); }
  int output_dim() const override { return static_cast<int>(C_.rows()); }
  Eigen::VectorXd derivative(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) const override {
    return Ac_ * x + Bc_ * u;
  }
  Eigen::VectorXd output(const Eigen::VectorXd& x,
                         const Eigen::VectorXd&) const override {
    return C_ * x;
  }

 private:
  Eigen::MatrixXd Ac_, Bc_, C_;
};

std::string fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mampc_exp_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// small, fast tank experiment used throughout
ExperimentConfig small_tank_config() {
  ExperimentConfig cfg = default_config("tank");
  cfg.sim_samples = 700;
  cfg.run_steps = 40;
  cfg.bootstrap = 6;
  cfg.n_s = 2;
  cfg.s = 3;
  cfg.drop = 5;
  cfg.reference = {{0, {0.0, 0.0}}, {8, {2.0, 2.0}}};
  return cfg;
}

HorizonConfig loop_config() {
  HorizonConfig cfg;
  cfg.n_p = 8;
  cfg.n_c = 4;
  cfg.n_s = 2;
  cfg.s = 2;
  cfg.lambda = 0.5;
  cfg.mu = 5.0;
  return cfg;
}

}  // namespace

TEST_CASE("closed_loop: perfect model tracks a reachable constant reference") {
  Eigen::MatrixXd Ac(2, 2), Bc(2, 1), C(1, 2);
  Ac << -0.6, 0.2, 0.0, -0.4;
  Bc << 0.5, 0.3;
  C << 1.0, 0.5;
  ContinuousLinearPlant plant(Ac, Bc, C);
  LtiModel model = zoh_discretize(Ac, Bc, C, Eigen::MatrixXd::Zero(1, 1).eval(), 0.5);

  HorizonConfig cfg = loop_config();
  ClosedLoopOptions options;
  options.kind = ControllerKind::mpc;
  options.x0 = Eigen::VectorXd::Zero(2);
  options.plant_substeps = 20;

  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(80, 1, 1.0);
  ClosedLoopLog log = closed_loop(plant, model, cfg, r, 80, 10, options);
  REQUIRE(log.length() == 80);
  for (int k = 70; k < 80; ++k)
    CHECK(std::abs(log.steps[k].output(0) - 1.0) < 1e-4);
}

TEST_CASE("closed_loop: a run that is all bootstrap equals the pure baseline loop") {
  Eigen::MatrixXd Ac(2, 2), Bc(2, 2), C(2, 2);
  Ac << -0.5, 0.1, -0.1, -0.7;
  Bc << 1.0, 0.0, 0.2, 0.8;
  C.setIdentity();
  ContinuousLinearPlant plant(Ac, Bc, C);
  LtiModel model = zoh_discretize(Ac, Bc, C, Eigen::MatrixXd::Zero(2, 2).eval(), 0.5);

  HorizonConfig cfg = loop_config();
  ClosedLoopOptions options;
  options.x0 = Eigen::VectorXd::Zero(2);
  options.plant_substeps = 10;

  Eigen::MatrixXd r(30, 2);
  r.col(0).setConstant(0.5);
  r.col(1).setConstant(-0.25);

  options.kind = ControllerKind::mampc;
  ClosedLoopLog all_bootstrap = closed_loop(plant, model, cfg, r, 30, 30, options);
  options.kind = ControllerKind::mpc;
  ClosedLoopLog pure_mpc = closed_loop(plant, model, cfg, r, 30, 2, options);

  REQUIRE(all_bootstrap.length() == pure_mpc.length());
  for (int k = 0; k < 30; ++k) {
    CHECK(all_bootstrap.steps[k].controller == "mpc");
    CHECK((all_bootstrap.steps[k].input - pure_mpc.steps[k].input).norm() == 0.0);
    CHECK((all_bootstrap.steps[k].output - pure_mpc.steps[k].output).norm() == 0.0);
  }
}

TEST_CASE("closed_loop: bootstrap must cover the sparsity horizon") {
  Eigen::MatrixXd Ac(1, 1), Bc(1, 1), C(1, 1);
  Ac << -1.0;
  Bc << 1.0;
  C << 1.0;
  ContinuousLinearPlant plant(Ac, Bc, C);
  LtiModel model = zoh_discretize(Ac, Bc, C, Eigen::MatrixXd::Zero(1, 1).eval(), 0.5);
  HorizonConfig cfg = loop_config();
  cfg.n_s = 3;
  ClosedLoopOptions options;
  options.x0 = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(10, 1);
  CHECK_THROWS_AS(closed_loop(plant, model, cfg, r, 10, 2, options),
                  std::invalid_argument);
}

TEST_CASE("experiment: simulate writes a PRBS dataset at the excitation levels") {
  const std::string dir = fresh_dir("sim");
  ExperimentConfig cfg = small_tank_config();
  cmd_simulate(cfg, dir);
  REQUIRE(fs::exists(dir + "/dataset.csv"));
  REQUIRE(fs::exists(dir + "/config_resolved.cfg"));

  Dataset ds = read_dataset_csv(dir + "/dataset.csv");
  REQUIRE(ds.t.size() == cfg.sim_samples);
  for (int k = 0; k < ds.u.rows(); ++k)
    for (int c = 0; c < 2; ++c) CHECK((ds.u(k, c) == 37.5 || ds.u(k, c) == 62.5));
  // the two channels use different register seeds
  CHECK((ds.u.col(0) - ds.u.col(1)).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("experiment: empty runs are rejected") {
  ExperimentConfig cfg = small_tank_config();
  cfg.sim_samples = 0;
  CHECK_THROWS_AS(cmd_simulate(cfg, fresh_dir("sim_empty")), ConfigError);
}

TEST_CASE("experiment: simulate twice gives byte-identical artifacts") {
  ExperimentConfig cfg = small_tank_config();
  const std::string a = fresh_dir("det_a");
  const std::string b = fresh_dir("det_b");
  cmd_simulate(cfg, a);
  cmd_simulate(cfg, b);
  CHECK(slurp(a + "/dataset.csv") == slurp(b + "/dataset.csv"));
  CHECK(slurp(a + "/config_resolved.cfg") == slurp(b + "/config_resolved.cfg"));
}

TEST_CASE("experiment: identify requires the dataset") {
  CHECK_THROWS_AS(cmd_identify(small_tank_config(), fresh_dir("no_data")), ConfigError);
}

TEST_CASE("experiment: full pipeline produces a model and closed-loop artifacts") {
  const std::string dir = fresh_dir("pipeline");
  ExperimentConfig cfg = small_tank_config();
  cmd_simulate(cfg, dir);
  cmd_identify(cfg, dir);
  REQUIRE(fs::exists(dir + "/model.csv"));

  IdentifiedModel m = read_model_csv(dir + "/model.csv");
  CHECK(m.model.state_dim() == cfg.id_order);
  CHECK(m.model.dt == doctest::Approx(cfg.sample_dt));
  // identified dynamics are stable for this plant
  CHECK(m.model.A.eigenvalues().cwiseAbs().maxCoeff() < 1.0);

  cmd_run(cfg, dir, ControllerKind::mpc, cfg.drop, cfg.threshold);
  cmd_run(cfg, dir, ControllerKind::mampc, cfg.drop, cfg.threshold);
  REQUIRE(fs::exists(dir + "/log.csv"));
  REQUIRE(fs::exists(dir + "/metrics.csv"));
  REQUIRE(fs::exists(dir + "/inputs.svg"));
  REQUIRE(fs::exists(dir + "/outputs.svg"));

  // bootstrap rows precede the sparse controller's rows
  ClosedLoopLog log = read_log_csv(dir + "/log.csv");
  REQUIRE(log.length() == cfg.run_steps);
  for (int k = 0; k < cfg.bootstrap; ++k) CHECK(log.steps[k].controller == "mpc");
  for (int k = cfg.bootstrap; k < cfg.run_steps; ++k)
    CHECK(log.steps[k].controller == "mampc");

  // metrics.csv holds both controllers' rows after the two runs
  CsvTable metrics = read_csv(dir + "/metrics.csv");
  int mpc_rows = 0, mampc_rows = 0;
  for (const auto& row : metrics.rows) {
    if (row[0] == "mpc") ++mpc_rows;
    if (row[0] == "mampc") ++mampc_rows;
  }
  CHECK(mpc_rows == 2);    // with and without the transient drop
  CHECK(mampc_rows == 2);
}

TEST_CASE("experiment: rerun from the echoed config is byte-identical") {
  const std::string dir = fresh_dir("echo");
  ExperimentConfig cfg = small_tank_config();
  cmd_simulate(cfg, dir);
  cmd_identify(cfg, dir);
  cmd_run(cfg, dir, ControllerKind::mampc, cfg.drop, cfg.threshold);
  const std::string log_bytes = slurp(dir + "/log.csv");
  const std::string metrics_bytes = slurp(dir + "/metrics.csv");

  ExperimentConfig echoed = load_config(dir + "/config_resolved.cfg");
  const std::string dir2 = fresh_dir("echo2");
  cmd_simulate(echoed, dir2);
  cmd_identify(echoed, dir2);
  cmd_run(echoed, dir2, ControllerKind::mampc, echoed.drop, echoed.threshold);
  CHECK(slurp(dir2 + "/dataset.csv") == slurp(dir + "/dataset.csv"));
  CHECK(slurp(dir2 + "/model.csv") == slurp(dir + "/model.csv"));
  CHECK(slurp(dir2 + "/log.csv") == log_bytes);
  CHECK(slurp(dir2 + "/metrics.csv") == metrics_bytes);
}

TEST_CASE("experiment: compare merges metrics of several logs") {
  const std::string dir = fresh_dir("cmp_base");
  ExperimentConfig cfg = small_tank_config();
  cmd_simulate(cfg, dir);
  cmd_identify(cfg, dir);
  cmd_run(cfg, dir, ControllerKind::mpc, cfg.drop, cfg.threshold);
  fs::copy_file(dir + "/log.csv", dir + "/log_mpc.csv");
  cmd_run(cfg, dir, ControllerKind::mampc, cfg.drop, cfg.threshold);

  const std::string out = fresh_dir("cmp_out");
  cmd_compare({dir + "/log_mpc.csv", dir + "/log.csv"}, out, cfg.drop, cfg.threshold);
  CsvTable table = read_csv(out + "/comparison.csv");
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][1] == "mpc");
  CHECK(table.rows[1][1] == "mampc");
}
