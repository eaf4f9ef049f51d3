#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace poolsim {

struct Estimate {
  double mean = 0.0;
  /// Standard error of the mean.
  double error = 0.0;
  std::size_t count = 0;
};

/// Mean and standard error of independent (or batch-mean) observations.
inline Estimate estimate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("no observations");
  Estimate e;
  e.count = values.size();
  // Welford update.
  double m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double delta = v - e.mean;
    e.mean += delta / static_cast<double>(k);
    m2 += delta * (v - e.mean);
  }
  if (k > 1) e.error = std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k));
  return e;
}

}  // namespace poolsim
