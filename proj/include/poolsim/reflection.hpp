#pragma once

#include <vector>

#include "poolsim/fluid.hpp"

namespace poolsim {

/// A real function sampled on an increasing time grid.
struct SampledPath {
  std::vector<double> t;
  std::vector<double> x;
};

struct Reflection {
  /// Regulator psi(t) = sup_{s <= t} (x(s) - barrier)^+.
  SampledPath psi;
  /// Reflected path phi = x - psi, which stays at or below the barrier.
  SampledPath phi;
};

/// One-sided Skorokhod map at an upper barrier. Requires x(0) <= barrier.
Reflection skorokhod_reflect(const SampledPath& path, double barrier);

struct ReflectionReport {
  /// Number of ranked coordinates checked.
  std::size_t coordinates = 0;
  /// Per coordinate: sup |w_k - psi(Theta_k)| and sup |q_k - phi(Theta_k)|.
  std::vector<double> regulator_residual;
  std::vector<double> state_residual;
  double max_residual = 0.0;
  /// Largest rank reached by the boundary coordinate along the path.
  std::size_t max_rank = 0;
};

/// Checks that a fluid trajectory is the solution of the coupled reflection
/// problem: ranked coordinate k is the free process Theta_k, fed by the
/// overflow w_{k-1} from the coordinates above it, reflected at alpha.
/// Integrals use the left-point rule on the trajectory's time grid, so the
/// residuals shrink linearly with the grid spacing.
ReflectionReport verify_reflection(const FluidModel& model, const FluidTrajectory& trajectory,
                                   double tol = 1e-9, std::size_t margin = 2);

}  // namespace poolsim
