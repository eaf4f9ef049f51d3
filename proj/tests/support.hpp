#pragma once

// Generators and independent oracles shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "poolsim/model.hpp"

namespace poolsim::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Concave table u(0..len): sorted random marginals on a 1/8 grid (so sums
/// are exact and ties stay ties), some repeated, some negative.
inline Utility random_concave_table(Rng& rng, int len) {
  std::vector<double> marginals;
  for (int k = 0; k < len; ++k) {
    const int shape = uniform_int(rng, 0, 3);
    if (shape == 0 && !marginals.empty())
      marginals.push_back(marginals.back());
    else if (shape == 1)
      marginals.push_back(static_cast<double>(uniform_int(rng, -2, 4)));
    else
      marginals.push_back(uniform_int(rng, -8, 24) / 8.0);
  }
  std::sort(marginals.rbegin(), marginals.rend());
  std::vector<double> values{uniform_int(rng, -8, 8) / 8.0};
  for (double d : marginals) values.push_back(values.back() + d);
  return Utility::table(values);
}

inline UtilityFamily random_family(Rng& rng, int classes, int len) {
  std::vector<Utility> out;
  for (int i = 0; i < classes; ++i) out.push_back(random_concave_table(rng, len));
  return UtilityFamily(out);
}

/// Sum over levels of u_i(j) times the fraction of pools holding exactly j.
inline double level_difference_utility(const QVector& q, const UtilityFamily& utilities) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < q.classes(); ++i)
    for (Eigen::Index j = 0; j <= q.levels(); ++j)
      total += utilities.value(static_cast<std::size_t>(i), j) * (q(i, j) - q(i, j + 1));
  return total;
}

/// Random profile with 0 <= q(i, j+1) <= q(i, j) <= alpha(i) on levels 1..levels.
inline QVector random_profile(Rng& rng, const std::vector<double>& alpha, Eigen::Index levels) {
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  QVector q(a, levels);
  for (Eigen::Index i = 0; i < q.classes(); ++i) {
    const auto top = uniform_int(rng, 0, static_cast<int>(levels));
    for (Eigen::Index j = 1; j <= top; ++j) q(i, j) = q(i, j - 1) * uniform(rng, 0.3, 1.0);
    if (uniform(rng) < 0.3)
      for (Eigen::Index j = 1; j <= top / 2; ++j) q(i, j) = a(i);
  }
  return q;
}

/// Fractions that are multiples of 1/denominator and sum to 1.
inline std::vector<double> random_alpha(Rng& rng, int classes, int denominator) {
  std::vector<int> parts(static_cast<std::size_t>(classes), 1);
  for (int k = classes; k < denominator; ++k) ++parts[static_cast<std::size_t>(uniform_int(rng, 0, classes - 1))];
  std::vector<double> alpha;
  for (int p : parts) alpha.push_back(static_cast<double>(p) / denominator);
  return alpha;
}

}  // namespace poolsim::testing
