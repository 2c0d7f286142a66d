#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "mampc/config.hpp"
#include "mampc/experiment.hpp"

namespace {

mampc::ExperimentConfig resolve_config(const std::string& path) {
  if (path.empty()) return mampc::default_config("tank");
  return mampc::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse model-predictive-control experiments: plant simulation, "
               "subspace identification, and MPC/MAMPC closed-loop benchmarks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string controller = "mampc";
  int drop = -1;
  double threshold = -1.0;
  std::vector<std::string> logs;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file");
    cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* sim = app.add_subcommand("simulate", "PRBS excitation experiment");
  add_common(sim);
  CLI::App* ident = app.add_subcommand("identify", "subspace identification of dataset.csv");
  add_common(ident);
  CLI::App* run = app.add_subcommand("run", "closed-loop run against model.csv");
  add_common(run);
  run->add_option("--controller", controller, "mpc or mampc")
      ->check(CLI::IsMember({"mpc", "mampc"}));
  run->add_option("--drop", drop, "transient steps dropped in the metrics");
  run->add_option("--threshold", threshold, "input-change threshold for sparse density");
  CLI::App* cmp = app.add_subcommand("compare", "merge metrics of several logs");
  cmp->add_option("--out", out_dir, "output directory");
  cmp->add_option("--drop", drop, "transient steps dropped in the metrics");
  cmp->add_option("--threshold", threshold, "input-change threshold for sparse density");
  cmp->add_option("logs", logs, "log.csv files to compare")->expected(-1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      mampc::cmd_simulate(resolve_config(config_path), out_dir);
    } else if (ident->parsed()) {
      mampc::cmd_identify(resolve_config(config_path), out_dir);
    } else if (run->parsed()) {
      const mampc::ExperimentConfig cfg = resolve_config(config_path);
      const auto kind = controller == "mpc" ? mampc::ControllerKind::mpc
                                            : mampc::ControllerKind::mampc;
      mampc::cmd_run(cfg, out_dir, kind, drop >= 0 ? drop : cfg.drop,
                     threshold >= 0.0 ? threshold : cfg.threshold);
    } else if (cmp->parsed()) {
      mampc::cmd_compare(logs, out_dir, drop >= 0 ? drop : 15,
                         threshold >= 0.0 ? threshold : 0.1);
    }
  } catch (const mampc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
