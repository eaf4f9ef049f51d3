#pragma once

#include <vector>

#include "poolsim/model.hpp"

namespace poolsim {

struct IntegratorConfig {
  double dt = 1e-3;
  /// Truncation level J; 0 picks default_levels().
  Eigen::Index levels = 0;
  /// Gap q(i, j-1) - q(i, j) above which a level counts as open.
  double sigma_tol = 1e-9;
  double horizon = 20.0;
  /// Spacing of emitted states; 0 emits every step.
  double sample_every = 0.0;
};

/// Mean-field dynamics of the JLMU system on levels 1..J of every class.
class FluidModel {
public:
  FluidModel(Ranking ranking, Eigen::VectorXd alpha, double lambda, double mu, Eigen::Index levels);

  const Ranking& ranking() const noexcept { return ranking_; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  double lambda() const noexcept { return lambda_; }
  double mu() const noexcept { return mu_; }
  double rho() const noexcept { return lambda_ / mu_; }
  Eigen::Index levels() const noexcept { return levels_; }

  /// Every coordinate with level <= J in decreasing rank.
  const std::vector<Coordinate>& order() const noexcept { return order_; }

  QVector empty() const { return QVector(alpha_, levels_); }
  /// The equilibrium q_* on the truncated level range.
  QVector equilibrium() const;

private:
  Ranking ranking_;
  Eigen::VectorXd alpha_;
  double lambda_;
  double mu_;
  Eigen::Index levels_;
  std::vector<Coordinate> order_;
};

/// Default truncation: level of sigma* plus 10, and at least ceil(2 rho / min alpha).
Eigen::Index default_levels(const Ranking& ranking, const Eigen::VectorXd& alpha, double rho);

/// Best-ranked coordinate whose level still has room, i.e.
/// q(i, j-1) - q(i, j) > tol; `position` is its 0-based index in order().
struct FluidBoundary {
  Coordinate sigma;
  std::size_t position = 0;
};

/// Throws std::runtime_error when no level within the truncation has room.
FluidBoundary fluid_sigma(const FluidModel& model, const QVector& q, double tol = 1e-9);

struct FluidRates {
  FluidBoundary boundary;
  /// dq(i, j)/dt; column 0 is zero.
  Eigen::MatrixXd derivative;
  /// Arrival rate Lambda(q, i, j) into class-i pools holding j - 1 tasks.
  Eigen::MatrixXd arrivals;
};

/// Drift of the fluid model. Full levels ranked above the boundary receive
/// exactly their departure outflow and the boundary gets the rest of lambda;
/// if lambda cannot cover all of them, the best-ranked ones are served first
/// so that every arrival rate stays non-negative.
FluidRates fluid_rhs(const FluidModel& model, const QVector& q, double tol = 1e-9);

/// The same drift with the boundary held at `boundary`, i.e. the smooth
/// vector field that applies until the boundary level fills up.
FluidRates fluid_rhs(const FluidModel& model, const QVector& q, const FluidBoundary& boundary);

struct FluidTrajectory {
  std::vector<double> times;
  std::vector<QVector> states;
  /// Largest mass seen on levels J-1 and J.
  double tail_mass = 0.0;
  bool truncation_warning = false;
};

/// Second-order Runge-Kutta (Heun) steps with the boundary frozen inside a
/// step. A step is cut short when the boundary level fills, so the kink in
/// the drift always falls on a step edge. Every step ends with a
/// mass-preserving projection onto the feasible set.
FluidTrajectory integrate_fluid(const FluidModel& model, const QVector& q0, const IntegratorConfig& cfg);

/// Clamp to 0 <= q(i, j+1) <= q(i, j) <= alpha(i); mass cut off above a bound
/// is refilled into open levels in rank order. Returns the largest change.
double project_feasible(const FluidModel& model, QVector& q);

}  // namespace poolsim
