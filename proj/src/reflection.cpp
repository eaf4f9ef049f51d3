#include "poolsim/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poolsim {

Reflection skorokhod_reflect(const SampledPath& path, double barrier) {
  if (path.t.size() != path.x.size()) throw std::invalid_argument("path times and values differ in length");
  if (path.x.empty()) throw std::invalid_argument("empty path");
  if (path.x.front() > barrier) throw std::invalid_argument("path starts above the barrier");
  Reflection out;
  out.psi.t = path.t;
  out.phi.t = path.t;
  out.psi.x.resize(path.x.size());
  out.phi.x.resize(path.x.size());
  double running = 0.0;
  for (std::size_t n = 0; n < path.x.size(); ++n) {
    running = std::max(running, path.x[n] - barrier);
    out.psi.x[n] = running;
    out.phi.x[n] = path.x[n] - running;
  }
  return out;
}

ReflectionReport verify_reflection(const FluidModel& model, const FluidTrajectory& trajectory, double tol,
                                   std::size_t margin) {
  const auto& states = trajectory.states;
  const auto& times = trajectory.times;
  if (states.empty() || states.size() != times.size()) throw std::invalid_argument("malformed trajectory");
  const auto& order = model.order();
  const std::size_t steps = states.size();

  std::vector<std::size_t> rank(steps);
  std::size_t max_rank = 0;
  for (std::size_t n = 0; n < steps; ++n) {
    rank[n] = fluid_sigma(model, states[n], tol).position + 1;
    max_rank = std::max(max_rank, rank[n]);
  }
  const std::size_t count = std::min(max_rank + margin, order.size());

  // The truncated order agrees with the full enumeration only while no class
  // has used up all of its stored levels.
  std::vector<Eigen::Index> used(static_cast<std::size_t>(model.alpha().size()), 0);
  for (std::size_t k = 0; k < count; ++k)
    if (++used[static_cast<std::size_t>(order[k].cls)] >= model.levels())
      throw std::invalid_argument("truncation too small to verify the reflection system");

  const double lambda = model.lambda();
  const double mu = model.mu();
  const auto& q0 = states.front();

  ReflectionReport report;
  report.coordinates = count;
  report.max_rank = max_rank;
  report.regulator_residual.assign(count, 0.0);
  report.state_residual.assign(count, 0.0);

  // w[k] holds w_k on the grid for k = 0..count.
  std::vector<std::vector<double>> w(count + 1, std::vector<double>(steps, 0.0));
  for (std::size_t n = 0; n < steps; ++n) w[0][n] = lambda * times[n];
  std::vector<double> departed(steps), outflow(steps), overflow(steps);
  SampledPath theta{times, std::vector<double>(steps)};

  for (std::size_t k = 1; k <= count; ++k) {
    const auto c = order[k - 1];
    const double alpha = model.alpha()(c.cls);
    departed[0] = 0.0;
    for (std::size_t n = 0; n < steps; ++n) {
      const auto& q = states[n];
      outflow[n] = mu * c.level * (q(c.cls, c.level) - q(c.cls, c.level + 1));
      double rate = 0.0;
      if (k < rank[n]) {
        rate = lambda;
        for (std::size_t s = 0; s < k; ++s) {
          const auto d = order[s];
          rate -= mu * d.level * (model.alpha()(d.cls) - q(d.cls, d.level + 1));
        }
      }
      overflow[n] = rate;
    }
    for (std::size_t n = 0; n + 1 < steps; ++n) {
      const double dt = times[n + 1] - times[n];
      departed[n + 1] = departed[n] + outflow[n] * dt;
      w[k][n + 1] = w[k][n] + overflow[n] * dt;
    }
    for (std::size_t n = 0; n < steps; ++n) theta.x[n] = q0(c.cls, c.level) + w[k - 1][n] - departed[n];

    const auto reflected = skorokhod_reflect(theta, alpha);
    double reg = 0.0;
    double st = 0.0;
    for (std::size_t n = 0; n < steps; ++n) {
      reg = std::max(reg, std::abs(w[k][n] - reflected.psi.x[n]));
      st = std::max(st, std::abs(states[n](c.cls, c.level) - reflected.phi.x[n]));
    }
    report.regulator_residual[k - 1] = reg;
    report.state_residual[k - 1] = st;
    report.max_residual = std::max({report.max_residual, reg, st});
  }
  return report;
}

}  // namespace poolsim
