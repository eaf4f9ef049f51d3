#pragma once

#include <cstdint>
#include <vector>

#include "poolsim/occupancy.hpp"
#include "poolsim/qvector.hpp"
#include "poolsim/ranking.hpp"
#include "poolsim/utility.hpp"

namespace poolsim {

/// System of `n` server pools split into classes with fractions `alpha`,
/// Poisson arrivals at rate n * lambda and exponential services at rate mu.
struct SystemConfig {
  std::int64_t n = 1;
  std::vector<double> alpha;
  double lambda = 0.0;
  double mu = 1.0;
  UtilityFamily utilities;

  std::size_t classes() const noexcept { return alpha.size(); }
  /// Offered load per pool, lambda / mu.
  double rho() const noexcept { return lambda / mu; }
  /// n * alpha(i), rounded; validate() guarantees these are exact.
  std::vector<std::int64_t> pool_counts() const;
  Eigen::VectorXd alpha_vector() const { return Eigen::Map<const Eigen::VectorXd>(alpha.data(), alpha.size()); }

  /// Throws std::invalid_argument on any violated constraint.
  void validate() const;
};

/// Linear form u(q) = sum_i u_i(0) q(i,0) + sum_{j>=1} Delta(i, j-1) q(i,j).
template <typename Scalar>
Scalar overall_utility(const BasicQVector<Scalar>& q, const UtilityFamily& utilities) {
  Scalar total(0);
  for (Eigen::Index i = 0; i < q.classes(); ++i) {
    const auto& u = utilities.at(static_cast<std::size_t>(i));
    total += Scalar(u.value(0)) * q(i, 0);
    for (Eigen::Index j = 1; j <= q.levels(); ++j)
      if (q(i, j) != Scalar(0)) total += Scalar(u.marginal(j - 1)) * q(i, j);
  }
  return total;
}

/// q(i, j) = (1/n) sum_{l >= j} N(i, l).
QVector occupancy_to_q(const OccupancyState& state);

/// Normalized overall utility of a finite state, (1/n) sum over pools u_i(X).
double overall_utility(const OccupancyState& state, const UtilityFamily& utilities);

}  // namespace poolsim
