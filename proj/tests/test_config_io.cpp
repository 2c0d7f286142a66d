#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "mampc/config.hpp"
#include "mampc/csv.hpp"

using namespace mampc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "mampc_io_test";
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("config: defaults for both plants are self-consistent") {
  for (const char* plant : {"tank", "sofc"}) {
    ExperimentConfig cfg = default_config(plant);
    CHECK(cfg.plant == plant);
    CHECK(cfg.prbs_low.size() == 2);
    CHECK(static_cast<int>(cfg.y_min.size()) == cfg.output_dim());
    CHECK(cfg.bootstrap >= cfg.n_s);
  }
}

TEST_CASE("config: serialize-parse round trip is exact") {
  ExperimentConfig cfg = default_config("tank");
  cfg.lambda = 0.125;
  cfg.n_s = 1;
  cfg.reference = {{0, {0.0, 0.0}}, {25, {1.5, -2.0}}};
  const std::string text = serialize_config(cfg);
  ExperimentConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(back.lambda == 0.125);
  CHECK(back.reference.size() == 2);
  CHECK(back.reference[1].level[1] == -2.0);
}

TEST_CASE("config: unknown keys are rejected") {
  CHECK_THROWS_AS(parse_config("plant = tank\nnot.a.key = 3\n"), ConfigError);
}

TEST_CASE("config: malformed values are rejected") {
  CHECK_THROWS_AS(parse_config("cost.lambda = banana\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("horizon.np\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("plant = boiler\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("run.bootstrap = 1\nhorizon.ns = 3\n"), ConfigError);
}

TEST_CASE("config: comments and blank lines are ignored") {
  ExperimentConfig cfg = parse_config("# a comment\n\nplant = sofc\nseed = 9 # trailing\n");
  CHECK(cfg.plant == "sofc");
  CHECK(cfg.seed == 9);
  CHECK(cfg.output_dim() == 1);
}

TEST_CASE("config: reference keys replace the default scenario") {
  ExperimentConfig cfg = parse_config(
      "plant = tank\nreference.0.start = 0\nreference.0.level = 0,0\n"
      "reference.1.start = 10\nreference.1.level = 3,1\n");
  REQUIRE(cfg.reference.size() == 2);
  CHECK(cfg.reference[1].start == 10);
  CHECK(cfg.reference[1].level[0] == 3.0);
}

TEST_CASE("config: infinite output limits survive the round trip") {
  ExperimentConfig cfg = default_config("tank");
  const std::string text = serialize_config(cfg);
  ExperimentConfig back = parse_config(text);
  CHECK(std::isinf(back.y_max[0]));
  CHECK(back.y_min[0] < 0.0);
  CHECK(std::isinf(back.y_min[0]));
}

TEST_CASE("format_num: 12 significant digits, locale-independent") {
  CHECK(format_num(0.1) == "0.1");
  CHECK(format_num(1.0 / 3.0) == "0.333333333333");
  CHECK(format_num(-2.5e-11) == "-2.5e-11");
  CHECK(format_num(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("csv: dataset round trip") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  Dataset d;
  d.t.resize(6);
  d.u.resize(6, 2);
  d.y.resize(6, 2);
  for (int k = 0; k < 6; ++k) {
    d.t(k) = k * 0.5;
    for (int c = 0; c < 2; ++c) {
      d.u(k, c) = dist(rng);
      d.y(k, c) = dist(rng);
    }
  }
  const std::string path = temp_dir() + "/dataset.csv";
  write_dataset_csv(path, d);
  Dataset back = read_dataset_csv(path);
  CHECK((back.t - d.t).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((back.u - d.u).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((back.y - d.y).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("csv: model file round trip is exact at 12 digits") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd A(3, 3), B(3, 2), C(2, 3), D(2, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = dist(rng);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) B(i, j) = dist(rng);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) C(i, j) = dist(rng);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) D(i, j) = dist(rng);
  IdentifiedModel m{LtiModel(A, B, C, D, 2.0), Eigen::Vector2d(1.0, -2.0),
                    Eigen::Vector2d(0.5, 0.25)};

  const std::string path = temp_dir() + "/model.csv";
  write_model_csv(path, m);
  IdentifiedModel back = read_model_csv(path);
  CHECK((back.model.A - A).lpNorm<Eigen::Infinity>() < 1e-11);
  CHECK((back.model.B - B).lpNorm<Eigen::Infinity>() < 1e-11);
  CHECK((back.model.C - C).lpNorm<Eigen::Infinity>() < 1e-11);
  CHECK((back.model.D - D).lpNorm<Eigen::Infinity>() < 1e-11);
  CHECK(back.model.dt == 2.0);
  CHECK(back.mean_u(1) == -2.0);

  // writing the reloaded model reproduces the same bytes
  const std::string path2 = temp_dir() + "/model2.csv";
  write_model_csv(path2, back);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("csv: log round trip preserves every field") {
  ClosedLoopLog log;
  for (int k = 0; k < 4; ++k) {
    LogStep step;
    step.k = k;
    step.reference = Eigen::Vector2d(1.0, 2.0);
    step.output = Eigen::Vector2d(0.9 + k, 2.1);
    step.input = Eigen::Vector2d(50.0, 49.5 - k);
    step.controller = k < 2 ? "mpc" : "mampc";
    step.alt_iterations = k;
    step.objective = 3.25 * k;
    log.steps.push_back(step);
  }
  const std::string path = temp_dir() + "/log.csv";
  write_log_csv(path, log);
  ClosedLoopLog back = read_log_csv(path);
  REQUIRE(back.length() == 4);
  CHECK(back.steps[3].controller == "mampc");
  CHECK(back.steps[2].alt_iterations == 2);
  CHECK(back.steps[1].output(0) == doctest::Approx(1.9));
  CHECK(back.steps[3].objective == doctest::Approx(9.75));
}

TEST_CASE("csv: missing files raise errors") {
  CHECK_THROWS(read_csv(temp_dir() + "/definitely_not_there.csv"));
  CHECK_THROWS(read_model_csv(temp_dir() + "/missing_model.csv"));
}
