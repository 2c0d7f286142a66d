#include "mampc/prbs.hpp"

#include <stdexcept>

namespace mampc {

namespace {

// Feedback masks of the maximal-length recurrences. For the tap list
// [n, a, b, c] (polynomial x^n + x^a + x^b + x^c + 1) the register emits
// bit 0, so the feedback combines bits {a, b, c} and bit 0.
std::uint32_t taps_for_order(int order) {
  auto mask = [](std::initializer_list<int> taps) {
    std::uint32_t m = 1u;
    for (int t : taps) m |= 1u << t;
    return m;
  };
  switch (order) {
    case 2: return mask({1});            // [2,1]
    case 3: return mask({2});            // [3,2]
    case 4: return mask({3});            // [4,3]
    case 5: return mask({3});            // [5,3]
    case 6: return mask({5});            // [6,5]
    case 7: return mask({6});            // [7,6]
    case 8: return mask({6, 5, 4});      // [8,6,5,4]
    case 9: return mask({5});            // [9,5]
    case 10: return mask({7});           // [10,7]
    case 11: return mask({9});           // [11,9]
    case 12: return mask({11, 10, 4});   // [12,11,10,4]
    case 13: return mask({12, 11, 8});   // [13,12,11,8]
    case 14: return mask({13, 12, 2});   // [14,13,12,2]
    case 15: return mask({14});          // [15,14]
    case 16: return mask({15, 13, 4});   // [16,15,13,4]
    default:
      throw std::invalid_argument("PrbsConfig: no maximal-length taps for order " +
                                  std::to_string(order));
  }
}

}  // namespace

void PrbsConfig::validate() const {
  if (order < 2) throw std::invalid_argument("PrbsConfig: order must be >= 2");
  taps_for_order(order);
  const std::uint32_t mask = (order >= 32) ? ~0u : ((1u << order) - 1u);
  if ((seed & mask) == 0u)
    throw std::invalid_argument("PrbsConfig: seed must be nonzero in the register");
  if (hold < 1) throw std::invalid_argument("PrbsConfig: hold must be >= 1");
  if (!(low < high)) throw std::invalid_argument("PrbsConfig: need low < high");
}

PrbsRegister::PrbsRegister(const PrbsConfig& cfg) : order_(cfg.order) {
  cfg.validate();
  const std::uint32_t mask = (1u << order_) - 1u;
  state_ = cfg.seed & mask;
  tap_mask_ = taps_for_order(order_);
}

int PrbsRegister::step() {
  const int out = static_cast<int>(state_ & 1u);
  const std::uint32_t fb =
      static_cast<std::uint32_t>(__builtin_popcount(state_ & tap_mask_) & 1);
  state_ = (state_ >> 1) | (fb << (order_ - 1));
  return out;
}

std::uint32_t prbs_phase_seed(const PrbsConfig& cfg, int bit_shift) {
  PrbsRegister reg(cfg);
  for (int i = 0; i < bit_shift; ++i) reg.step();
  return reg.state();
}

Eigen::VectorXd prbs(const PrbsConfig& cfg, int length) {
  if (length < 0) throw std::invalid_argument("prbs: length must be non-negative");
  PrbsRegister reg(cfg);
  Eigen::VectorXd signal(length);
  int bit = 0;
  for (int i = 0; i < length; ++i) {
    if (i % cfg.hold == 0) bit = reg.step();
    signal(i) = bit ? cfg.high : cfg.low;
  }
  return signal;
}

}  // namespace mampc
