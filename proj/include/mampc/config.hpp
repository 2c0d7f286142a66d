#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace mampc {

/// Raised for malformed configuration, unknown keys, or missing input
/// artifacts; the CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReferenceSegment {
  int start = 0;
  std::vector<double> level;  // deviation from the steady output, per channel
};

/// Declarative experiment description. Every field has a default (chosen per
/// plant); the resolved record serializes to flat `key = value` text and the
/// echoed copy in an output directory fully reproduces a run.
struct ExperimentConfig {
  std::string plant = "tank";  // "tank" or "sofc"
  int seed = 1;

  // simulation / dataset generation
  double sample_dt = 5.0;
  int sim_samples = 2200;
  int settle_samples = 0;
  int plant_substeps = 5;
  int prbs_order = 8;
  int prbs_hold = 4;
  std::vector<double> prbs_low, prbs_high;

  // identification
  int id_order = 4;
  int id_block_rows = 10;

  // controller horizons and weights
  int n_p = 10, n_c = 5, n_s = 3, s = 3;
  double lambda = 1.0, mu = 10.0;
  double eps1 = 1e-4;
  int max_alt_iter = 50;
  bool alt_warm_start = false;
  bool exclude_past_differences = false;
  double qp_tol = 1e-9;
  int qp_max_iter = 200000;

  // absolute actuator/output limits
  std::vector<double> u_min, u_max, y_min, y_max;

  // closed-loop run
  int run_steps = 250;
  int bootstrap = 15;
  bool bias_correction = true;
  int drop = 15;
  double threshold = 0.1;

  // plant parameter overrides
  double tank_gamma1 = 0.3, tank_gamma2 = 0.3;
  double sofc_temperature = 1273.15;
  double sofc_current = 400.0;
  double sofc_anode_volume = 0.01, sofc_cathode_volume = 0.01;
  double sofc_cell_area = 0.4;
  double sofc_orifice_ratio = 0.5;
  double sofc_fuel_h2_fraction = 0.9, sofc_air_o2_fraction = 0.21;

  std::vector<ReferenceSegment> reference;

  int input_dim() const { return 2; }
  int output_dim() const { return plant == "sofc" ? 1 : 2; }
};

/// Built-in defaults for a plant name ("tank" or "sofc").
ExperimentConfig default_config(const std::string& plant);

/// Parses flat `key = value` text ('#' starts a comment). Unknown keys and
/// malformed values raise ConfigError. Keys not present keep the plant's
/// defaults.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical serialization: every field, fixed order, 12-digit numbers.
/// parse_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace mampc
