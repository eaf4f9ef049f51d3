// Command-line driver: bounds, rankings, simulation sweeps, fluid paths and
// the canned experiments.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "poolsim/assign.hpp"
#include "poolsim/config.hpp"
#include "poolsim/experiments.hpp"
#include "poolsim/fluid.hpp"
#include "poolsim/reflection.hpp"

namespace {

using namespace poolsim;
using nlohmann::json;

constexpr int exit_config = 2;
constexpr int exit_invariant = 3;

/// Failure of a run-time check that should never trip on a correct build.
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 0;
};

class Output {
public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw ConfigError("--out", "cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

ExperimentConfig need_config(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config", "a config file is required");
  return load_config(g.config);
}

json coordinate_json(Coordinate c) { return json::array({c.cls + 1, c.level}); }

json sparse_q(const QVector& q) {
  json out = json::array();
  for (Eigen::Index i = 0; i < q.classes(); ++i)
    for (Eigen::Index j = 1; j <= q.levels(); ++j)
      if (q(i, j) != 0.0) out.push_back(json::array({i + 1, j, q(i, j)}));
  return out;
}

void cmd_bound(const Globals& g, std::optional<double> rho_flag, bool full) {
  const auto cfg = need_config(g);
  const double rho = rho_flag.value_or(cfg.offered_load());
  const Ranking ranking(UtilityFamily(cfg.utilities));
  const auto opt = optimal_assignment(ranking, cfg.alpha, rho);
  json report{{"rho", rho},
              {"sigma_star", coordinate_json(opt.sigma_star)},
              {"rank", opt.sigma_index},
              {"residual", opt.residual},
              {"bound", opt.bound}};
  if (full) report["q_star"] = sparse_q(opt.q_star);
  Output out(g.out);
  out.stream() << report.dump(2) << '\n';
}

void cmd_rank(const Globals& g, std::size_t count) {
  const auto cfg = need_config(g);
  const Ranking ranking(UtilityFamily(cfg.utilities));
  Output out(g.out);
  write_csv_row(out.stream(), {"rank", "i", "j", "marginal"});
  const auto entries = ranking.enumerate(count);
  for (std::size_t k = 0; k < entries.size(); ++k)
    write_csv_row(out.stream(), {std::to_string(k + 1), std::to_string(entries[k].cls + 1),
                                 std::to_string(entries[k].level), format_number(ranking.gain(entries[k]))});
}

struct SimulateFlags {
  std::vector<std::string> policies;
  std::optional<double> horizon;
  std::optional<std::size_t> reps;
  std::optional<std::string> init;
};

void cmd_simulate(const Globals& g, const SimulateFlags& f) {
  auto cfg = need_config(g);
  if (!f.policies.empty()) {
    cfg.policies.clear();
    for (const auto& p : f.policies) {
      try {
        cfg.policies.push_back(PolicySpec::parse(p));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("--policy", e.what());
      }
    }
  }
  if (f.horizon) cfg.horizon = *f.horizon;
  if (!(cfg.horizon > 0.0)) throw ConfigError("--T", "must be positive");
  if (f.reps) cfg.reps = *f.reps;
  if (cfg.reps < 1) throw ConfigError("--reps", "must be at least 1");
  if (f.init) cfg.init = parse_init_mode(*f.init);
  if (g.seed) cfg.sweep.seeds = {*g.seed};
  const auto rows = run_sweep(cfg, g.threads);
  Output out(g.out);
  write_simulation_csv(out.stream(), rows);
  for (const auto& r : rows)
    if (!r.metrics.bound_holds())
      throw InvariantViolation("time-average utility exceeds u*(s) for " + r.policy + " rep " + std::to_string(r.rep));
}

struct FluidFlags {
  std::string init = "empty";
  double horizon = 20.0;
  std::optional<double> dt;
  Eigen::Index levels = 0;
  double sample_every = 0.1;
  bool verify = false;
  std::string report;
};

void cmd_fluid(const Globals& g, const FluidFlags& f) {
  const auto cfg = need_config(g);
  const auto system = cfg.system();
  const Ranking ranking(system.utilities);
  const Eigen::VectorXd alpha = system.alpha_vector();
  IntegratorConfig ic;
  ic.dt = f.dt.value_or(1e-3 / system.mu);
  ic.horizon = f.horizon;
  ic.levels = f.levels > 0 ? f.levels : default_levels(ranking, alpha, system.rho());
  const FluidModel model(ranking, alpha, system.lambda, system.mu, ic.levels);

  QVector q0;
  if (f.init == "empty")
    q0 = model.empty();
  else if (f.init == "qstar")
    q0 = model.equilibrium();
  else
    throw ConfigError("--init", "expected empty or qstar");

  const auto path = integrate_fluid(model, q0, ic);
  if (path.truncation_warning)
    std::cerr << "warning: mass " << path.tail_mass << " near the truncation level " << ic.levels << '\n';

  Output out(g.out);
  write_csv_row(out.stream(), {"t", "mass", "i", "j", "q"});
  double next = 0.0;
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    const double t = path.times[k];
    if (t + 1e-9 * ic.dt < next && k + 1 != path.times.size()) continue;
    next += f.sample_every > 0.0 ? f.sample_every : 0.0;
    while (f.sample_every > 0.0 && next <= t + 1e-9 * ic.dt) next += f.sample_every;
    const auto& q = path.states[k];
    const auto mass = format_number(q.mass());
    for (Eigen::Index i = 0; i < q.classes(); ++i)
      for (Eigen::Index j = 1; j <= q.levels(); ++j)
        if (q(i, j) != 0.0)
          write_csv_row(out.stream(),
                        {format_number(t), mass, std::to_string(i + 1), std::to_string(j), format_number(q(i, j))});
  }

  if (f.verify) {
    const auto rep = verify_reflection(model, path, ic.sigma_tol);
    json report{{"dt", ic.dt},
                {"levels", ic.levels},
                {"coordinates", rep.coordinates},
                {"max_rank", rep.max_rank},
                {"max_residual", rep.max_residual},
                {"regulator_residual", rep.regulator_residual},
                {"state_residual", rep.state_residual}};
    if (f.report.empty()) {
      std::cerr << report.dump(2) << '\n';
    } else {
      std::ofstream r(f.report);
      if (!r) throw ConfigError("--report", "cannot write " + f.report);
      r << report.dump(2) << '\n';
    }
  }
}

void cmd_table1(const Globals& g, Table1Options options) {
  if (g.seed) options.seed = *g.seed;
  options.threads = g.threads;
  if (options.reps < 1) throw ConfigError("--reps", "must be at least 1");
  const auto rows = run_table1(options);
  Output out(g.out);
  write_table1(out.stream(), rows);
  for (const auto& r : rows)
    if (!r.bound_holds) throw InvariantViolation("time-average utility exceeds u*(s) at n=" + std::to_string(r.n));
}

void cmd_suboptimal(const Globals& g, SuboptimalOptions options) {
  if (g.seed) options.seed = *g.seed;
  options.threads = g.threads;
  if (options.reps < 1) throw ConfigError("--reps", "must be at least 1");
  const auto report = run_suboptimal(options);
  Output out(g.out);
  write_suboptimal(out.stream(), report, options);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Utility-maximizing dispatch across heterogeneous infinite-server pools"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "JSON experiment file");
  app.add_option("--seed", g.seed, "Override the base seed");
  app.add_option("--out", g.out, "Output file (default stdout)");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");

  std::optional<double> rho;
  auto* bound = app.add_subcommand("bound", "Upper bound u*(rho) and the boundary coordinate");
  bound->add_option("--rho", rho, "Load (default: from config)");
  auto* assign = app.add_subcommand("assign", "Optimal fractional assignment q*");
  assign->add_option("--rho", rho, "Load (default: from config)");

  std::size_t count = 20;
  auto* rank = app.add_subcommand("rank", "First K coordinates in decreasing rank");
  rank->add_option("-K,--count", count, "Number of entries")->check(CLI::PositiveNumber);

  SimulateFlags sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulation sweep over the config's n, rho and seeds");
  simulate_cmd->add_option("--policy", sim.policies, "jlmu, slta, random or fixed:<class>; repeatable");
  simulate_cmd->add_option("--T", sim.horizon, "Horizon");
  simulate_cmd->add_option("--reps", sim.reps, "Replications per cell");
  simulate_cmd->add_option("--init", sim.init, "empty or optimal_rounded");

  FluidFlags fl;
  auto* fluid = app.add_subcommand("fluid", "Integrate the fluid model");
  fluid->add_option("--init", fl.init, "empty or qstar");
  fluid->add_option("--T", fl.horizon, "Horizon");
  fluid->add_option("--dt", fl.dt, "Step (default 1e-3 / mu)");
  fluid->add_option("--levels", fl.levels, "Truncation level (default automatic)");
  fluid->add_option("--sample-every", fl.sample_every, "Output spacing (0 = every step)");
  fluid->add_flag("--verify-reflection", fl.verify, "Check the coupled reflection system");
  fluid->add_option("--report", fl.report, "Reflection report path (default stderr)");

  Table1Options t1;
  auto* table1 = app.add_subcommand("table1", "JLMU versus SLTA on the two-class log utility system");
  table1->add_option("--n", t1.n, "Pool counts");
  table1->add_option("--rho", t1.rho, "Loads");
  table1->add_option("--reps", t1.reps, "Replications");
  table1->add_option("--T", t1.horizon, "Horizon");

  SuboptimalOptions so;
  auto* subopt = app.add_subcommand("suboptimal", "Two-pool system where JLMU loses to a fixed assignment");
  subopt->add_option("--a", so.a, "Utility scale");
  subopt->add_option("--eps", so.eps, "Slope ratio of pool one");
  subopt->add_option("--rho", so.rho, "Total offered load");
  subopt->add_option("--T", so.horizon, "Horizon");
  subopt->add_option("--reps", so.reps, "Replications");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    if (*bound) cmd_bound(g, rho, false);
    if (*assign) cmd_bound(g, rho, true);
    if (*rank) cmd_rank(g, count);
    if (*simulate_cmd) cmd_simulate(g, sim);
    if (*fluid) cmd_fluid(g, fl);
    if (*table1) cmd_table1(g, t1);
    if (*subopt) cmd_suboptimal(g, so);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_invariant;
  }
  return 0;
}
