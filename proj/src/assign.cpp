#include "poolsim/assign.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace poolsim {

Boundary sigma_star(const Ranking& ranking, std::span<const double> alpha, double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("offered load must be non-negative");
  if (alpha.size() != ranking.classes()) throw std::invalid_argument("alpha and utilities disagree on class count");
  for (double a : alpha)
    if (!(a > 0.0)) throw std::invalid_argument("class fractions must be positive");

  RankedStream stream(ranking);
  double filled = 0.0;
  for (std::size_t k = 1; k <= max_enumeration_walk; ++k) {
    const Coordinate c = stream.next();
    const double next = filled + alpha[c.cls];
    if (rho < next) return {c, k, filled, rho - filled};
    filled = next;
  }
  throw std::runtime_error("load " + std::to_string(rho) + " not placed within " +
                           std::to_string(max_enumeration_walk) + " enumeration slots");
}

OptimalAssignment optimal_assignment(const Ranking& ranking, std::span<const double> alpha, double rho) {
  const Boundary b = sigma_star(ranking, alpha, rho);
  Enumeration enumeration(ranking);
  const auto full = enumeration.filled_levels(b.rank - 1);

  Eigen::Index top = b.sigma.level;
  for (auto l : full) top = std::max<Eigen::Index>(top, l);

  const auto m = static_cast<Eigen::Index>(alpha.size());
  Eigen::VectorXd a(m);
  for (Eigen::Index i = 0; i < m; ++i) a(i) = alpha[i];
  QVector q(a, top);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 1; j <= full[i]; ++j) q(i, j) = a(i);
  q(b.sigma.cls, b.sigma.level) = b.residual;

  OptimalAssignment out;
  out.sigma_star = b.sigma;
  out.sigma_index = b.rank;
  out.bound = overall_utility(q, ranking.utilities());
  out.q_star = std::move(q);
  out.rho = rho;
  out.residual = b.residual;
  return out;
}

double upper_bound(const Ranking& ranking, std::span<const double> alpha, double load) {
  return optimal_assignment(ranking, alpha, load).bound;
}

bool validate_feasible(const QVector& q, std::span<const double> alpha, double rho, double tol) {
  if (static_cast<std::size_t>(q.classes()) != alpha.size()) return false;
  for (Eigen::Index i = 0; i < q.classes(); ++i)
    if (std::abs(q(i, 0) - alpha[i]) > tol) return false;
  if (!q.is_valid(tol)) return false;
  return std::abs(q.mass() - rho) <= tol;
}

}  // namespace poolsim
