#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "poolsim/assign.hpp"
#include "poolsim/fluid.hpp"
#include "poolsim/reflection.hpp"
#include "support.hpp"

using namespace poolsim;
using namespace poolsim::testing;

namespace {

Ranking log_pair() { return Ranking(UtilityFamily({Utility::log_quality(20.0), Utility::log_quality(30.0)})); }

Ranking staircase() {
  std::vector<double> quadratic;
  for (int x = 0; x <= 40; ++x) quadratic.push_back(2.0 * x - x * x / 20.0);
  return Ranking(UtilityFamily({Utility::linear(1.0), Utility::table(quadratic), Utility::capped_linear(1.5, 20.0)}));
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

FluidModel log_model(double rho, Eigen::Index levels = 0) {
  const auto ranking = log_pair();
  const auto alpha = vec({0.5, 0.5});
  return FluidModel(ranking, alpha, rho, 1.0, levels ? levels : default_levels(ranking, alpha, rho));
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("truncation default") {
  const auto ranking = log_pair();
  CHECK(default_levels(ranking, vec({0.5, 0.5}), 10.0) == 40);
  CHECK(default_levels(ranking, vec({0.5, 0.5}), 1.0) == 12);
  CHECK_THROWS_AS(FluidModel(ranking, vec({0.5, 0.5}), 1.0, 0.0, 10), std::invalid_argument);
}

TEST_CASE("boundary examples") {
  const auto model = log_model(10.0);
  const auto empty = fluid_sigma(model, model.empty());
  CHECK(empty.sigma == Coordinate{1, 1});
  CHECK(empty.position == 0);

  const auto at10 = fluid_sigma(model, model.equilibrium());
  CHECK(at10.sigma == Coordinate{1, 13});
  CHECK(at10.position == 20);

  const auto model975 = log_model(9.75);
  const auto at975 = fluid_sigma(model975, model975.equilibrium());
  CHECK(at975.sigma == Coordinate{1, 12});
  CHECK(at975.position == 19);

  auto full = model.empty();
  full.values().setConstant(0.5);
  CHECK_THROWS_AS(fluid_sigma(model, full), std::runtime_error);
}

TEST_CASE("empty system sends everything to the best level") {
  const auto model = log_model(10.0);
  const auto rates = fluid_rhs(model, model.empty());
  CHECK(rates.arrivals(1, 1) == 10.0);
  CHECK(rates.arrivals.sum() == 10.0);
  CHECK(rates.derivative(1, 1) == 10.0);
  CHECK(max_abs(rates.derivative) == 10.0);
}

TEST_CASE("equilibrium is a fixed point") {
  for (double rho : {9.75, 10.0, 3.3}) {
    const auto model = log_model(rho);
    const auto q = model.equilibrium();
    const auto opt = optimal_assignment(log_pair(), std::vector<double>{0.5, 0.5}, rho);
    CHECK(q.mass() == doctest::Approx(rho).epsilon(1e-12));
    CHECK(q(1, 5) == opt.q_star(1, 5));
    CHECK(max_abs(fluid_rhs(model, q).derivative) <= 1e-9);
  }
  const auto ranking = staircase();
  const FluidModel stairs(ranking, vec({0.5, 0.25, 0.25}), 7.5, 1.0, 40);
  CHECK(max_abs(fluid_rhs(stairs, stairs.equilibrium()).derivative) <= 1e-9);
}

TEST_CASE("drift conserves the arrival budget") {
  Rng rng(31);
  const auto model = log_model(10.0, 30);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = random_profile(rng, {0.5, 0.5}, 30);
    QVector feasible = q;
    project_feasible(model, feasible);
    if (!feasible.is_valid(1e-12)) continue;
    const auto rates = fluid_rhs(model, feasible);
    CHECK(rates.arrivals.minCoeff() >= 0.0);
    CHECK(rates.arrivals.sum() == doctest::Approx(10.0).epsilon(1e-12));
    // d(mass)/dt = lambda - mu * mass.
    CHECK(rates.derivative.sum() == doctest::Approx(10.0 - feasible.mass()).epsilon(1e-9));
    CHECK(rates.derivative.col(0).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("projection") {
  const auto model = log_model(10.0, 20);
  auto q = model.equilibrium();
  const auto before = q;
  CHECK(project_feasible(model, q) == 0.0);
  CHECK(q.values() == before.values());

  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = random_profile(rng, {0.5, 0.5}, 20);
    const double mass = p.mass();
    for (Eigen::Index j = 1; j <= 20; ++j)
      for (Eigen::Index i = 0; i < 2; ++i) p(i, j) += uniform(rng, -1e-3, 1e-3);
    const double perturbed = p.mass();
    project_feasible(model, p);
    CHECK(p.is_valid(1e-12));
    CHECK(p.mass() == doctest::Approx(perturbed).epsilon(1e-9));
    CHECK(std::abs(p.mass() - mass) < 0.05);
  }
}

TEST_CASE("trajectory from empty") {
  const auto model = log_model(10.0);
  IntegratorConfig cfg;
  cfg.horizon = 20.0;
  cfg.sample_every = 0.5;
  const auto traj = integrate_fluid(model, model.empty(), cfg);
  REQUIRE(traj.times.size() == 41);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    worst = std::max(worst, std::abs(traj.states[k].mass() - 10.0 * (1.0 - std::exp(-traj.times[k]))));
    CHECK(traj.states[k].is_valid(1e-9));
  }
  CHECK(worst <= 1e-4);
  CHECK(max_abs(traj.states.back().values() - model.equilibrium().values()) <= 1e-3);
  CHECK_FALSE(traj.truncation_warning);
}

TEST_CASE("equilibrium start stays put") {
  for (double rho : {9.75, 10.0}) {
    const auto model = log_model(rho);
    IntegratorConfig cfg;
    cfg.horizon = 10.0;
    const auto traj = integrate_fluid(model, model.equilibrium(), cfg);
    double drift = 0.0;
    for (const auto& q : traj.states)
      drift = std::max(drift, (q.values() - model.equilibrium().values()).cwiseAbs().sum());
    CHECK(drift <= 1e-6);
    CHECK(verify_reflection(model, traj).max_residual <= 1e-6);
  }
}

TEST_CASE("arrival rates stay non-negative along a trajectory") {
  const auto model = log_model(9.75);
  IntegratorConfig cfg;
  cfg.horizon = 15.0;
  cfg.sample_every = 0.05;
  const auto traj = integrate_fluid(model, model.empty(), cfg);
  double lowest = 0.0;
  for (const auto& q : traj.states) lowest = std::min(lowest, fluid_rhs(model, q).arrivals.minCoeff());
  CHECK(lowest >= -1e-12);
  CHECK((traj.states.back().values() - model.equilibrium().values()).cwiseAbs().sum() < 1e-3);
}

TEST_CASE("integrator input checks and truncation warning") {
  const auto model = log_model(10.0, 13);
  IntegratorConfig cfg;
  cfg.horizon = 15.0;
  cfg.sample_every = 1.0;
  const auto traj = integrate_fluid(model, model.empty(), cfg);
  CHECK(traj.truncation_warning);
  CHECK(traj.tail_mass > 1e-8);

  auto bad = model.empty();
  bad(0, 3) = 0.2;
  CHECK_THROWS_AS(integrate_fluid(model, bad, cfg), std::invalid_argument);
  cfg.dt = 0.0;
  CHECK_THROWS_AS(integrate_fluid(model, model.empty(), cfg), std::invalid_argument);
}

TEST_CASE("Skorokhod map") {
  SampledPath ramp;
  for (int k = 0; k <= 300; ++k) {
    ramp.t.push_back(k * 0.01);
    ramp.x.push_back(k * 0.01);
  }
  const auto r = skorokhod_reflect(ramp, 1.0);
  for (std::size_t k = 0; k < ramp.t.size(); ++k) {
    CHECK(r.psi.x[k] == doctest::Approx(std::max(0.0, ramp.t[k] - 1.0)));
    CHECK(r.phi.x[k] == doctest::Approx(std::min(ramp.t[k], 1.0)));
  }

  Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    SampledPath a, b;
    double xa = uniform(rng, -1.0, 0.5), xb = uniform(rng, -1.0, 0.5);
    for (int k = 0; k < 200; ++k) {
      a.t.push_back(k);
      b.t.push_back(k);
      a.x.push_back(xa);
      b.x.push_back(xb);
      xa += uniform(rng, -0.3, 0.4);
      xb += uniform(rng, -0.3, 0.4);
    }
    double input = 0.0;
    for (std::size_t k = 0; k < a.x.size(); ++k) input = std::max(input, std::abs(a.x[k] - b.x[k]));
    const auto ra = skorokhod_reflect(a, 0.5);
    const auto rb = skorokhod_reflect(b, 0.5);
    double out = 0.0;
    for (std::size_t k = 0; k < a.x.size(); ++k) {
      out = std::max(out, std::abs(ra.psi.x[k] - rb.psi.x[k]));
      CHECK(ra.phi.x[k] <= 0.5 + 1e-15);
      if (k > 0) CHECK(ra.psi.x[k] >= ra.psi.x[k - 1]);
    }
    CHECK(out <= input + 1e-12);
  }

  CHECK_THROWS_AS(skorokhod_reflect({{0.0}, {2.0}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(skorokhod_reflect({{0.0, 1.0}, {0.0}}, 1.0), std::invalid_argument);
}

TEST_CASE("trajectory solves the reflection system") {
  const auto model = log_model(10.0);
  double previous = 0.0;
  for (double dt : {2e-3, 1e-3, 5e-4}) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.horizon = 5.0;
    const auto report = verify_reflection(model, integrate_fluid(model, model.empty(), cfg));
    CHECK(report.max_rank >= 20);
    CHECK(report.max_residual <= 10.0 * dt);
    if (previous > 0.0) {
      const double ratio = report.max_residual / previous;
      CHECK(ratio >= 0.4);
      CHECK(ratio <= 0.6);
    }
    previous = report.max_residual;
  }
}
