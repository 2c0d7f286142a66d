#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace mampc {

/// Maximal-length shift-register excitation signal. Each bit is held for
/// `hold` samples; bit 1 maps to `high`, bit 0 to `low`.
struct PrbsConfig {
  int order = 8;
  std::uint32_t seed = 0x5A;
  int hold = 1;
  double low = 0.0;
  double high = 1.0;

  void validate() const;
};

/// Advances the register once and returns the emitted bit.
class PrbsRegister {
 public:
  explicit PrbsRegister(const PrbsConfig& cfg);
  int step();
  std::uint32_t state() const { return state_; }

 private:
  std::uint32_t state_;
  std::uint32_t tap_mask_;
  int order_;
};

/// Sample sequence of the configured signal.
Eigen::VectorXd prbs(const PrbsConfig& cfg, int length);

/// Register state reached after `bit_shift` steps from cfg.seed. Seeding
/// each input channel with a phase of the same maximal-length sequence
/// (shifted by period / channel count) keeps multi-channel excitation data
/// full rank; nearby seeds are mere short delays of each other.
std::uint32_t prbs_phase_seed(const PrbsConfig& cfg, int bit_shift);

}  // namespace mampc
