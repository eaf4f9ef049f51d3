#pragma once

#include <span>
#include <vector>

#include "poolsim/model.hpp"

namespace poolsim {

/// Longest enumeration walk before sigma_star gives up.
inline constexpr std::size_t max_enumeration_walk = 1'000'000;

/// Boundary coordinate of the greedy prefix fill at a given load.
struct Boundary {
  Coordinate sigma;
  /// 1-based position of `sigma` in the ranked enumeration.
  std::size_t rank = 1;
  /// Load placed on the slots ranked strictly above `sigma`.
  double filled = 0.0;
  /// Load left for `sigma` itself, in [0, alpha(sigma.cls)).
  double residual = 0.0;
};

/// The unique coordinate whose slot straddles `rho` in the cumulative sum of
/// alpha along the ranked enumeration.
Boundary sigma_star(const Ranking& ranking, std::span<const double> alpha, double rho);

/// Optimal fractional assignment at load `rho` and its utility.
struct OptimalAssignment {
  Coordinate sigma_star;
  std::size_t sigma_index = 1;
  QVector q_star;
  double bound = 0.0;
  double rho = 0.0;
  double residual = 0.0;
};

OptimalAssignment optimal_assignment(const Ranking& ranking, std::span<const double> alpha, double rho);

/// u(q*) at load `load`; also the time-average bound when `load` is an
/// empirical mean task count per pool.
double upper_bound(const Ranking& ranking, std::span<const double> alpha, double load);

/// Constraint check for the utility maximization at load `rho`.
bool validate_feasible(const QVector& q, std::span<const double> alpha, double rho, double tol = 1e-9);

}  // namespace poolsim
