#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "poolsim/sim.hpp"
#include "poolsim/stats.hpp"
#include "support.hpp"

using namespace poolsim;
using namespace poolsim::testing;

namespace {

UtilityFamily log_pair() { return UtilityFamily({Utility::log_quality(20.0), Utility::log_quality(30.0)}); }

SystemConfig log_system(std::int64_t n, double rho) { return {n, {0.5, 0.5}, rho, 1.0, log_pair()}; }

std::vector<PolicySpec> all_policies() {
  return {PolicySpec::parse("jlmu"), PolicySpec::parse("slta"), PolicySpec::parse("random"),
          PolicySpec::parse("fixed:1")};
}

std::vector<std::int64_t> sorted(std::vector<std::int64_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

double poisson_tail(double mean, int j) {
  double term = std::exp(-mean);
  double below = 0.0;
  for (int k = 0; k < j; ++k) {
    below += term;
    term *= mean / (k + 1);
  }
  return 1.0 - below;
}

}  // namespace

TEST_CASE("no arrivals") {
  const auto cfg = log_system(10, 0.0);
  RunConfig run;
  run.horizon = 20.0;
  for (const auto& spec : all_policies()) {
    const auto m = simulate(cfg, spec, run);
    CHECK(m.events == 0);
    CHECK(m.arrivals == 0);
    CHECK(m.avg_s == 0.0);
    CHECK(m.avg_u == 0.0);
    CHECK(m.bound_holds());
  }
}

TEST_CASE("initial states") {
  const Ranking ranking(log_pair());
  const auto at10 = init_state(log_system(50, 10.0), ranking, InitMode::optimal_rounded);
  CHECK(at10.pool_levels[0] == std::vector<std::int64_t>(25, 8));
  CHECK(at10.pool_levels[1] == std::vector<std::int64_t>(25, 12));
  CHECK(at10.learning_index == 21);
  CHECK(at10.occupancy().total_tasks() == 500);

  const auto at975 = init_state(log_system(8, 9.75), ranking, InitMode::optimal_rounded);
  CHECK(at975.pool_levels[0] == std::vector<std::int64_t>(4, 8));
  CHECK(sorted(at975.pool_levels[1]) == std::vector<std::int64_t>{11, 11, 12, 12});
  CHECK(at975.learning_index == 20);

  const auto empty = init_state(log_system(8, 9.75), ranking, InitMode::empty);
  CHECK(empty.occupancy().total_tasks() == 0);
  CHECK(empty.learning_index == 1);

  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::int64_t>(2 * uniform_int(rng, 1, 60));
    const double rho = uniform_int(rng, 0, 80) / 4.0;
    const auto init = init_state(log_system(n, rho), ranking, InitMode::optimal_rounded);
    CHECK(init.occupancy().total_tasks() == std::llround(static_cast<double>(n) * rho));
    for (const auto& cls : init.pool_levels) {
      const auto [lo, hi] = std::minmax_element(cls.begin(), cls.end());
      CHECK(*hi - *lo <= 1);
    }
  }
}

TEST_CASE("runs are reproducible from their key") {
  const auto cfg = log_system(20, 9.75);
  RunConfig run;
  run.horizon = 30.0;
  run.seed = 5;
  run.replication = 2;
  run.sample_times = {1.0, 10.0, 25.0};
  for (const auto& spec : all_policies()) {
    const auto a = simulate(cfg, spec, run);
    const auto b = simulate(cfg, spec, run);
    CHECK(a == b);
    CHECK(a.samples.size() == 3);
    auto other = run;
    other.replication = 3;
    CHECK(simulate(cfg, spec, other).avg_u != a.avg_u);
  }
}

TEST_CASE("coupled runs share arrivals and service times") {
  const auto cfg = log_system(40, 10.0);
  RunConfig run;
  run.horizon = 40.0;
  run.seed = 9;
  const auto policies = all_policies();
  const auto metrics = coupled_simulate(cfg, policies, run);
  REQUIRE(metrics.size() == policies.size());
  for (const auto& m : metrics) {
    CHECK(m.arrivals == metrics.front().arrivals);
    // Total work in an infinite-server system does not depend on where tasks go.
    CHECK(m.avg_s == doctest::Approx(metrics.front().avg_s).epsilon(1e-12));
  }
  for (std::size_t k = 0; k < policies.size(); ++k) CHECK(metrics[k] == simulate(cfg, policies[k], run));
}

TEST_CASE("bookkeeping invariants hold on random configurations") {
  Rng rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const int classes = uniform_int(rng, 1, 3);
    const auto alpha = random_alpha(rng, classes, 4);
    SystemConfig cfg{4 * uniform_int(rng, 1, 5), alpha, uniform(rng, 0.5, 8.0), uniform(rng, 0.5, 2.0),
                     random_family(rng, classes, 30)};
    RunConfig run;
    run.horizon = 15.0;
    run.seed = static_cast<std::uint64_t>(trial);
    run.check_invariants = true;
    run.init = trial % 2 ? InitMode::optimal_rounded : InitMode::empty;
    for (const auto& spec : all_policies()) {
      const auto m = simulate(cfg, spec, run);
      CHECK(m.bound_holds());
      CHECK(m.batch_u.size() == run.batches);
    }
  }
}

TEST_CASE("random dispatch gives Poisson occupancies") {
  // Each pool sees a Poisson stream of rate lambda and serves as M/M/infinity.
  const double rho = 4.0;
  const auto cfg = log_system(200, rho);
  RunConfig run;
  run.horizon = 120.0;
  run.seed = 3;
  for (double t = 20.0; t <= 120.0; t += 2.0) run.sample_times.push_back(t);
  const auto m = simulate(cfg, PolicySpec::parse("random"), run);
  CHECK(std::abs(m.avg_s - rho) < 0.1);
  std::vector<double> totals;
  for (const auto& q : m.samples) totals.push_back(200.0 * q.mass());
  const auto e = estimate(totals);
  const double variance = e.error * e.error * static_cast<double>(totals.size());
  // Index of dispersion of a Poisson total.
  CHECK(std::abs(variance / e.mean - 1.0) < 0.6);
  for (int j = 1; j <= 9; ++j) {
    double mean = 0.0;
    for (const auto& q : m.samples) mean += (q(0, j) + q(1, j)) / static_cast<double>(m.samples.size());
    CHECK(std::abs(mean - poisson_tail(rho, j)) < 0.03);
  }
}

TEST_CASE("total load matches the offered load") {
  const auto cfg = log_system(50, 10.0);
  std::vector<double> s;
  for (std::uint64_t rep = 0; rep < 8; ++rep) {
    RunConfig run;
    run.horizon = 60.0;
    run.replication = rep;
    run.init = InitMode::optimal_rounded;
    s.push_back(simulate(cfg, PolicySpec::parse("jlmu"), run).avg_s);
  }
  const auto e = estimate(s);
  CHECK(std::abs(e.mean - 10.0) < 4.0 * e.error + 0.02);
}

TEST_CASE("SLTA learning path") {
  const auto cfg = log_system(50, 10.0);
  RunConfig run;
  run.horizon = 30.0;
  run.init = InitMode::optimal_rounded;
  const auto m = simulate(cfg, PolicySpec::parse("slta"), run);
  REQUIRE_FALSE(m.r_path.empty());
  CHECK(m.r_path.front() == std::pair<double, std::int64_t>{0.0, 21});
  CHECK(m.r_final == m.r_path.back().second);
  CHECK(static_cast<std::int64_t>(m.r_path.size()) == m.switches + 1);
  CHECK(simulate(cfg, PolicySpec::parse("jlmu"), run).r_final == 0);
}

TEST_CASE("run configuration errors") {
  const auto cfg = log_system(10, 1.0);
  RunConfig run;
  run.horizon = 0.0;
  CHECK_THROWS_AS(simulate(cfg, PolicySpec{}, run), std::invalid_argument);
  run.horizon = 10.0;
  run.warmup = 10.0;
  CHECK_THROWS_AS(simulate(cfg, PolicySpec{}, run), std::invalid_argument);
  run.warmup = 1.0;
  run.batches = 0;
  CHECK_THROWS_AS(simulate(cfg, PolicySpec{}, run), std::invalid_argument);
  auto bad = cfg;
  bad.n = 3;
  CHECK_THROWS_AS(simulate(bad, PolicySpec{}, RunConfig{}), std::invalid_argument);
}
