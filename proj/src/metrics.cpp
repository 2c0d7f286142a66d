#include "mampc/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace mampc {

double sparse_density(const ClosedLoopLog& log, int channel, double threshold,
                      int drop) {
  const int T = log.length();
  if (drop < 0 || drop >= T)
    throw std::invalid_argument("sparse_density: drop must be smaller than the log");
  if (channel < 0 || channel >= log.input_dim())
    throw std::invalid_argument("sparse_density: channel out of range");
  const int first = std::max(drop, 1);  // step paired with its predecessor
  const int samples = T - first;
  if (samples < 1) throw std::invalid_argument("sparse_density: empty difference window");
  int exceed = 0;
  for (int k = first; k < T; ++k) {
    const double du = log.steps[k].input(channel) - log.steps[k - 1].input(channel);
    if (std::abs(du) > threshold) ++exceed;
  }
  return static_cast<double>(exceed) / samples;
}

double tracking_error(const ClosedLoopLog& log, int drop) {
  const int T = log.length();
  if (drop < 0 || drop >= T)
    throw std::invalid_argument("tracking_error: drop must be smaller than the log");
  const int samples = T - drop;
  double sum = 0.0;
  for (int k = drop; k < T; ++k)
    sum += (log.steps[k].output - log.steps[k].reference).squaredNorm();
  return sum / samples;
}

}  // namespace mampc
