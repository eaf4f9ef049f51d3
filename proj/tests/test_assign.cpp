#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <functional>

#include "poolsim/assign.hpp"
#include "support.hpp"

using namespace poolsim;
using namespace poolsim::testing;

namespace {

const std::vector<double> halves{0.5, 0.5};
const std::vector<double> staircase_alpha{0.5, 0.25, 0.25};

Ranking log_pair() { return Ranking(UtilityFamily({Utility::log_quality(20.0), Utility::log_quality(30.0)})); }

Ranking staircase() {
  std::vector<double> quadratic;
  for (int x = 0; x <= 40; ++x) quadratic.push_back(2.0 * x - x * x / 20.0);
  return Ranking(UtilityFamily({Utility::linear(1.0), Utility::table(quadratic), Utility::capped_linear(1.5, 20.0)}));
}

Coordinate at(int cls1, int level) { return {cls1 - 1, level}; }

/// Number of class-i levels held at alpha(i) and the level of any partial fill.
std::vector<double> class_mass(const QVector& q) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < q.classes(); ++i) out.push_back(q.class_mass(i));
  return out;
}

}  // namespace

TEST_CASE("bound on the two-class log utility system") {
  const auto ranking = log_pair();
  const auto at10 = optimal_assignment(ranking, halves, 10.0);
  CHECK(at10.sigma_star == at(2, 13));
  CHECK(at10.sigma_index == 21);
  CHECK(at10.residual == 0.0);
  CHECK(at10.bound == doctest::Approx(10.0 * std::log(2.5)).epsilon(1e-12));
  CHECK(std::abs(at10.bound - 9.1629) < 5e-5);
  for (int j = 1; j <= 8; ++j) CHECK(at10.q_star(0, j) == 0.5);
  CHECK(at10.q_star(0, 9) == 0.0);
  for (int j = 1; j <= 12; ++j) CHECK(at10.q_star(1, j) == 0.5);
  CHECK(at10.q_star(1, 13) == 0.0);

  const auto at975 = optimal_assignment(ranking, halves, 9.75);
  CHECK(at975.sigma_star == at(2, 12));
  CHECK(at975.residual == doctest::Approx(0.25));
  CHECK(at975.q_star(1, 11) == 0.5);
  CHECK(at975.q_star(1, 12) == doctest::Approx(0.25));
  CHECK(std::abs(at975.bound - 9.1731) < 5e-5);
  CHECK(upper_bound(ranking, halves, 9.75) == at975.bound);
}

TEST_CASE("bound is fast") {
  const auto ranking = log_pair();
  const auto start = std::chrono::steady_clock::now();
  for (int k = 0; k < 100; ++k) (void)upper_bound(ranking, halves, 10.0);
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(elapsed / 100.0 < 1e-3);
}

TEST_CASE("zero load") {
  const auto ranking = log_pair();
  const auto opt = optimal_assignment(ranking, halves, 0.0);
  CHECK(opt.sigma_star == at(2, 1));
  CHECK(opt.sigma_index == 1);
  CHECK(opt.residual == 0.0);
  CHECK(opt.q_star.mass() == 0.0);
  CHECK(opt.bound == 0.0);

  const Ranking shifted(UtilityFamily({Utility::table({2.0, 3.0}), Utility::table({-1.0, 0.0})}));
  CHECK(upper_bound(shifted, halves, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("staircase breakpoints") {
  const auto ranking = staircase();
  const auto a = optimal_assignment(ranking, staircase_alpha, 1.25);
  for (int j = 1; j <= 5; ++j) CHECK(a.q_star(1, j) == 0.25);
  CHECK(a.q_star.mass() == doctest::Approx(1.25));
  CHECK(a.q_star.class_mass(0) == 0.0);
  CHECK(a.q_star.class_mass(2) == 0.0);

  const auto b = optimal_assignment(ranking, staircase_alpha, 6.25);
  CHECK(b.q_star.class_mass(1) == doctest::Approx(1.25));
  CHECK(b.q_star(2, 20) == 0.25);
  CHECK(b.q_star(2, 21) == 0.0);
  CHECK(b.q_star.class_mass(0) == 0.0);

  const auto c = optimal_assignment(ranking, staircase_alpha, 8.0);
  CHECK(c.q_star(0, 1) == doctest::Approx(0.5));
  CHECK(c.q_star(0, 2) == 0.0);
  CHECK(c.q_star.class_mass(1) == doctest::Approx(2.5));
}

TEST_CASE("errors") {
  const auto ranking = log_pair();
  CHECK_THROWS_AS(sigma_star(ranking, halves, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(sigma_star(ranking, std::vector<double>{1.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(sigma_star(ranking, std::vector<double>{0.0, 1.0}, 1.0), std::invalid_argument);
  const Ranking single(UtilityFamily({Utility::linear(1.0)}));
  CHECK_THROWS_AS(sigma_star(single, std::vector<double>{1.0}, 2e6), std::runtime_error);
}

TEST_CASE("validate_feasible") {
  const auto ranking = log_pair();
  const auto opt = optimal_assignment(ranking, halves, 9.75);
  CHECK(validate_feasible(opt.q_star, halves, 9.75));
  CHECK_FALSE(validate_feasible(opt.q_star, halves, 9.5));
  auto bad = opt.q_star;
  bad(0, 1) = 0.2;
  bad(0, 2) = 0.3;
  CHECK_FALSE(validate_feasible(bad, halves, bad.mass()));
  auto over = opt.q_star;
  over(0, 1) = 0.6;
  CHECK_FALSE(validate_feasible(over, halves, over.mass()));
}

TEST_CASE("greedy prefix and mass on random families") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = uniform_int(rng, 1, 3);
    const Ranking ranking(random_family(rng, m, 10));
    const auto alpha = random_alpha(rng, m, 8);
    const double rho = uniform(rng, 0.0, 6.0);
    const auto opt = optimal_assignment(ranking, alpha, rho);
    CHECK(validate_feasible(opt.q_star, alpha, rho));
    CHECK(opt.q_star.mass() == doctest::Approx(rho).epsilon(1e-12));
    CHECK(opt.bound == doctest::Approx(overall_utility(opt.q_star, ranking.utilities())));
    const auto listed = ranking.enumerate(opt.sigma_index + 5);
    CHECK(listed[opt.sigma_index - 1] == opt.sigma_star);
    for (std::size_t k = 0; k < listed.size(); ++k) {
      const auto c = listed[k];
      const double v = opt.q_star(c.cls, c.level);
      if (k + 1 < opt.sigma_index)
        CHECK(v == alpha[static_cast<std::size_t>(c.cls)]);
      else if (k + 1 == opt.sigma_index)
        CHECK(v == doctest::Approx(opt.residual));
      else
        CHECK(v == 0.0);
    }
    CHECK(opt.residual >= 0.0);
    CHECK(opt.residual < alpha[static_cast<std::size_t>(opt.sigma_star.cls)]);
  }
}

TEST_CASE("residual vanishes exactly at partial sums") {
  const auto ranking = log_pair();
  Enumeration e(ranking);
  double cumulative = 0.0;
  for (std::size_t k = 1; k <= 40; ++k) {
    const auto at_sum = sigma_star(ranking, halves, cumulative);
    CHECK(at_sum.residual <= 1e-12);
    CHECK(at_sum.rank == k);
    const auto inside = sigma_star(ranking, halves, cumulative + 0.2);
    CHECK(inside.residual > 1e-12);
    cumulative += halves[static_cast<std::size_t>(e[k].cls)];
  }
}

TEST_CASE("no feasible profile beats the bound") {
  // Exhaustive oracle: every monotone profile on a coarse grid.
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const Ranking ranking(random_family(rng, 2, 4));
    const int levels = 3;
    const std::vector<double> grid{0.0, 0.25, 0.5};
    Eigen::VectorXd a(2);
    a << 0.5, 0.5;
    QVector q(a, levels);
    std::vector<double> best(4 * levels + 1, -1e300);
    std::function<void(int)> visit = [&](int slot) {
      if (slot == 2 * levels) {
        const double mass = q.mass();
        const auto k = static_cast<std::size_t>(std::llround(mass / 0.25));
        best[k] = std::max(best[k], overall_utility(q, ranking.utilities()));
        CHECK(overall_utility(q, ranking.utilities()) <= upper_bound(ranking, halves, mass) + 1e-9);
        return;
      }
      const int i = slot / levels;
      const int j = slot % levels + 1;
      for (double g : grid) {
        if (g > q(i, j - 1)) continue;
        q(i, j) = g;
        visit(slot + 1);
      }
      q(i, j) = 0.0;
    };
    visit(0);
    // When the optimum fits inside the box it lies on this grid.
    for (std::size_t k = 0; k < best.size(); ++k) {
      const auto opt = optimal_assignment(ranking, halves, 0.25 * static_cast<double>(k));
      if (opt.q_star.support() <= levels) CHECK(best[k] == doctest::Approx(opt.bound));
    }
  }
}

TEST_CASE("random feasible profiles stay below the bound at their own load") {
  Rng rng(99);
  for (int trial = 0; trial < 3000; ++trial) {
    const int m = uniform_int(rng, 1, 3);
    const Ranking ranking(random_family(rng, m, 12));
    const auto alpha = random_alpha(rng, m, 6);
    const auto q = random_profile(rng, alpha, 12);
    CHECK(overall_utility(q, ranking.utilities()) <= upper_bound(ranking, alpha, q.mass()) + 1e-9);
  }
}

TEST_CASE("moving mass away from the optimum never helps") {
  Rng rng(7);
  const auto ranking = staircase();
  for (int trial = 0; trial < 500; ++trial) {
    const double rho = uniform(rng, 0.0, 12.0);
    auto q = optimal_assignment(ranking, staircase_alpha, rho).q_star;
    q.resize_levels(60);
    // Pick a top level of some class with mass and move part of it to the
    // next free level of another class.
    const int from = uniform_int(rng, 0, 2);
    const int to = uniform_int(rng, 0, 2);
    if (from == to) continue;
    Eigen::Index top = 0;
    while (top < q.levels() && q(from, top + 1) > 0.0) ++top;
    Eigen::Index free = 1;
    while (q(to, free) >= q.alpha(to)) ++free;
    if (top == 0) continue;
    const double room = std::min(q(to, free - 1) - q(to, free), q(from, top) - q(from, top + 1));
    const double delta = uniform(rng, 0.0, room);
    q(from, top) -= delta;
    q(to, free) += delta;
    CHECK(q.is_valid(1e-12));
    CHECK(overall_utility(q, ranking.utilities()) <= upper_bound(ranking, staircase_alpha, rho) + 1e-9);
  }
}

TEST_CASE("bound is non-decreasing and concave in the load") {
  // The staircase keeps every marginal in use non-negative up to load 10;
  // the log pair goes negative past r / e, where only concavity remains.
  const auto check = [](const Ranking& ranking, const std::vector<double>& alpha, double top, bool increasing) {
    std::vector<double> values;
    for (int k = 0; k * 0.05 <= top + 1e-9; ++k) values.push_back(upper_bound(ranking, alpha, k * 0.05));
    for (std::size_t k = 1; k < values.size() && increasing; ++k) CHECK(values[k] >= values[k - 1] - 1e-12);
    for (std::size_t k = 2; k < values.size(); ++k)
      CHECK(values[k] - values[k - 1] <= values[k - 1] - values[k - 2] + 1e-9);
  };
  check(staircase(), staircase_alpha, 10.0, true);
  check(log_pair(), halves, 20.0, false);
}

TEST_CASE("per-class masses on the staircase") {
  const auto ranking = staircase();
  const auto m = class_mass(optimal_assignment(ranking, staircase_alpha, 7.5).q_star);
  CHECK(m[0] == 0.0);
  CHECK(m[1] == doctest::Approx(2.5));
  CHECK(m[2] == doctest::Approx(5.0));
}
