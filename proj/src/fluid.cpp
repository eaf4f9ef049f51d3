#include "poolsim/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "poolsim/assign.hpp"

namespace poolsim {

FluidModel::FluidModel(Ranking ranking, Eigen::VectorXd alpha, double lambda, double mu, Eigen::Index levels)
    : ranking_(std::move(ranking)), alpha_(std::move(alpha)), lambda_(lambda), mu_(mu), levels_(levels) {
  if (static_cast<std::size_t>(alpha_.size()) != ranking_.classes())
    throw std::invalid_argument("alpha has " + std::to_string(alpha_.size()) + " entries for " +
                                std::to_string(ranking_.classes()) + " classes");
  if ((alpha_.array() <= 0.0).any()) throw std::invalid_argument("alpha must be positive");
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (!(mu_ > 0.0)) throw std::invalid_argument("mu must be positive");
  if (levels_ < 1) throw std::invalid_argument("fluid truncation needs at least one level");

  order_.reserve(static_cast<std::size_t>(alpha_.size() * levels_));
  for (Eigen::Index i = 0; i < alpha_.size(); ++i)
    for (Eigen::Index j = 1; j <= levels_; ++j)
      order_.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)});
  std::sort(order_.begin(), order_.end(),
            [this](Coordinate a, Coordinate b) { return ranking_.outranks(a, b); });
}

QVector FluidModel::equilibrium() const {
  const std::vector<double> a(alpha_.data(), alpha_.data() + alpha_.size());
  QVector q = optimal_assignment(ranking_, a, rho()).q_star;
  if (q.support() > levels_) throw std::invalid_argument("truncation is below the support of q*");
  q.resize_levels(levels_);
  return q;
}

Eigen::Index default_levels(const Ranking& ranking, const Eigen::VectorXd& alpha, double rho) {
  const std::vector<double> a(alpha.data(), alpha.data() + alpha.size());
  const auto boundary = sigma_star(ranking, a, rho);
  const auto spread = static_cast<Eigen::Index>(std::ceil(2.0 * rho / alpha.minCoeff()));
  return std::max<Eigen::Index>(boundary.sigma.level + 10, spread);
}

FluidBoundary fluid_sigma(const FluidModel& model, const QVector& q, double tol) {
  const auto& order = model.order();
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto c = order[k];
    if (q(c.cls, c.level - 1) - q(c.cls, c.level) > tol) return {c, k};
  }
  throw std::runtime_error("fluid state fills every level up to the truncation");
}

FluidRates fluid_rhs(const FluidModel& model, const QVector& q, double tol) {
  return fluid_rhs(model, q, fluid_sigma(model, q, tol));
}

FluidRates fluid_rhs(const FluidModel& model, const QVector& q, const FluidBoundary& boundary) {
  const auto m = q.classes();
  const auto levels = q.levels();
  const double mu = model.mu();
  FluidRates rates;
  rates.boundary = boundary;
  rates.arrivals = Eigen::MatrixXd::Zero(m, levels + 1);
  rates.derivative = Eigen::MatrixXd::Zero(m, levels + 1);

  double budget = model.lambda();
  const auto& order = model.order();
  for (std::size_t k = 0; k < rates.boundary.position; ++k) {
    const auto c = order[k];
    const double need = std::max(0.0, mu * c.level * (model.alpha()(c.cls) - q(c.cls, c.level + 1)));
    const double take = std::min(need, budget);
    rates.arrivals(c.cls, c.level) = take;
    budget -= take;
  }
  const auto s = rates.boundary.sigma;
  rates.arrivals(s.cls, s.level) = budget;

  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 1; j <= levels; ++j)
      rates.derivative(i, j) = rates.arrivals(i, j) - mu * static_cast<double>(j) * (q(i, j) - q(i, j + 1));
  return rates;
}

double project_feasible(const FluidModel& model, QVector& q) {
  const auto before = q.values();
  const auto m = q.classes();
  const auto levels = q.levels();
  double excess = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    q(i, 0) = model.alpha()(i);
    for (Eigen::Index j = 1; j <= levels; ++j) {
      const double cap = q(i, j - 1);
      if (q(i, j) > cap) {
        excess += q(i, j) - cap;
        q(i, j) = cap;
      } else if (q(i, j) < 0.0) {
        excess += q(i, j);
        q(i, j) = 0.0;
      }
    }
  }

  const auto& order = model.order();
  if (excess > 0.0) {
    for (auto it = order.begin(); it != order.end() && excess > 0.0; ++it) {
      const double room = q(it->cls, it->level - 1) - q(it->cls, it->level);
      const double add = std::min(room, excess);
      q(it->cls, it->level) += add;
      excess -= add;
    }
    if (excess > 0.0) throw std::runtime_error("fluid mass exceeds the truncated state space");
  } else if (excess < 0.0) {
    for (auto it = order.rbegin(); it != order.rend() && excess < 0.0; ++it) {
      const double room = q(it->cls, it->level) - q(it->cls, it->level + 1);
      const double take = std::min(room, -excess);
      q(it->cls, it->level) -= take;
      excess += take;
    }
  }
  return (q.values() - before).cwiseAbs().maxCoeff();
}

namespace {

double tail_mass(const QVector& q) {
  const auto levels = q.levels();
  const auto width = std::min<Eigen::Index>(2, levels);
  return q.values().rightCols(width).sum();
}

}  // namespace

FluidTrajectory integrate_fluid(const FluidModel& model, const QVector& q0, const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(cfg.horizon >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
  if (q0.classes() != model.alpha().size()) throw std::invalid_argument("initial state has the wrong class count");
  if (q0.support() > model.levels()) throw std::invalid_argument("initial state exceeds the truncation");
  if (!q0.is_valid(1e-12) || !q0.alpha().isApprox(model.alpha()))
    throw std::invalid_argument("initial state is not a feasible occupancy profile");

  QVector q = q0;
  q.resize_levels(model.levels());
  const double dt = cfg.dt;
  const double allowed = 10.0 * dt * model.lambda() + 1e-12;
  const auto steps = static_cast<std::int64_t>(std::llround(cfg.horizon / dt));

  FluidTrajectory out;
  out.times.push_back(0.0);
  out.states.push_back(q);
  out.tail_mass = tail_mass(q);
  double next_sample = cfg.sample_every;

  auto guarded = [&](QVector& state) {
    const double moved = project_feasible(model, state);
    if (moved > allowed)
      throw std::runtime_error("projection moved a coordinate by " + std::to_string(moved) +
                               "; reduce dt or raise the truncation");
  };

  constexpr int max_pieces = 16;
  for (std::int64_t s = 1; s <= steps; ++s) {
    double remaining = dt;
    for (int piece = 0; remaining > 0.0; ++piece) {
      const auto boundary = fluid_sigma(model, q, cfg.sigma_tol);
      const auto f0 = fluid_rhs(model, q, boundary).derivative;
      const auto c = boundary.sigma;
      double h = remaining;
      const double room = q(c.cls, c.level - 1) - q(c.cls, c.level);
      // Stop at the fill time of the boundary level; give up splitting after
      // a few pieces and let the projection absorb the overshoot.
      if (f0(c.cls, c.level) * h > room && piece < max_pieces) h = room / f0(c.cls, c.level);
      QVector stage(q.values() + h * f0);
      const auto f1 = fluid_rhs(model, stage, boundary).derivative;
      QVector next(q.values() + 0.5 * h * (f0 + f1));
      guarded(next);
      q = std::move(next);
      remaining = h < remaining ? remaining - h : 0.0;
    }

    const double t = static_cast<double>(s) * dt;
    out.tail_mass = std::max(out.tail_mass, tail_mass(q));
    if (cfg.sample_every <= 0.0 || t >= next_sample - 1e-9 * dt || s == steps) {
      out.times.push_back(t);
      out.states.push_back(q);
      if (cfg.sample_every > 0.0)
        while (next_sample <= t + 1e-9 * dt) next_sample += cfg.sample_every;
    }
  }
  out.truncation_warning = out.tail_mass > 1e-8;
  return out;
}

}  // namespace poolsim
