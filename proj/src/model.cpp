#include "poolsim/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace poolsim {

std::vector<std::int64_t> SystemConfig::pool_counts() const {
  std::vector<std::int64_t> counts;
  counts.reserve(alpha.size());
  for (double a : alpha) counts.push_back(std::llround(a * static_cast<double>(n)));
  return counts;
}

void SystemConfig::validate() const {
  if (n < 1) throw std::invalid_argument("pool count n must be at least 1");
  if (alpha.empty()) throw std::invalid_argument("at least one pool class is required");
  if (utilities.classes() != alpha.size())
    throw std::invalid_argument("expected " + std::to_string(alpha.size()) + " utilities, got " +
                                std::to_string(utilities.classes()));
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double a = alpha[i];
    if (!(a > 0.0) || a > 1.0) throw std::invalid_argument("alpha[" + std::to_string(i) + "] must lie in (0, 1]");
    const double pools = a * static_cast<double>(n);
    if (std::abs(pools - std::round(pools)) > 1e-9)
      throw std::invalid_argument("n * alpha[" + std::to_string(i) + "] = " + std::to_string(pools) +
                                  " is not an integer");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("class fractions must sum to 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be non-negative");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be positive");
}

QVector occupancy_to_q(const OccupancyState& state) {
  const auto m = static_cast<Eigen::Index>(state.classes());
  Eigen::Index top = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& c = state.counts(i);
    for (auto j = static_cast<Eigen::Index>(c.size()) - 1; j > top; --j)
      if (c[j] > 0) {
        top = j;
        break;
      }
  }
  const double n = static_cast<double>(state.total_pools());
  QVector::Matrix values = QVector::Matrix::Zero(m, top + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& c = state.counts(i);
    std::int64_t tail = 0;
    for (Eigen::Index j = top; j >= 0; --j) {
      if (j < static_cast<Eigen::Index>(c.size())) tail += c[j];
      values(i, j) = static_cast<double>(tail) / n;
    }
  }
  return QVector(std::move(values));
}

double overall_utility(const OccupancyState& state, const UtilityFamily& utilities) {
  double total = 0.0;
  for (std::size_t i = 0; i < state.classes(); ++i) {
    const auto& c = state.counts(i);
    for (std::size_t j = 0; j < c.size(); ++j)
      if (c[j] > 0) total += static_cast<double>(c[j]) * utilities.value(i, static_cast<std::int64_t>(j));
  }
  return total / static_cast<double>(state.total_pools());
}

}  // namespace poolsim
