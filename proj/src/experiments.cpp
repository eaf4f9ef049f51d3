#include "poolsim/experiments.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>

#include "poolsim/assign.hpp"
#include "poolsim/parallel.hpp"

namespace poolsim {

std::string format_number(double x) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 9);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), end);
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out << ',';
    out << fields[k];
  }
  out << '\n';
}

SystemConfig table1_config(std::int64_t n, double rho) {
  SystemConfig cfg;
  cfg.n = n;
  cfg.alpha = {0.5, 0.5};
  cfg.mu = 1.0;
  cfg.lambda = rho;
  cfg.utilities = UtilityFamily({Utility::log_quality(20.0), Utility::log_quality(30.0)});
  cfg.validate();
  return cfg;
}

SystemConfig staircase_config(std::int64_t n, double rho) {
  std::vector<double> quadratic;
  for (int x = 0; x <= 40; ++x) quadratic.push_back(2.0 * x - x * x / 20.0);
  SystemConfig cfg;
  cfg.n = n;
  cfg.alpha = {0.5, 0.25, 0.25};
  cfg.mu = 1.0;
  cfg.lambda = rho;
  cfg.utilities = UtilityFamily({Utility::linear(1.0), Utility::table(quadratic), Utility::capped_linear(1.5, 20.0)});
  cfg.validate();
  return cfg;
}

SystemConfig two_pool_config(double a, double eps, double rho) {
  if (!(a > 0.0)) throw std::invalid_argument("a must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  SystemConfig cfg;
  cfg.n = 2;
  cfg.alpha = {0.5, 0.5};
  cfg.mu = 1.0;
  cfg.lambda = rho / 2.0;
  cfg.utilities = UtilityFamily({Utility::linear(a * eps), Utility::capped_linear(a, 1.0)});
  cfg.validate();
  return cfg;
}

std::vector<Table1Row> run_table1(const Table1Options& options) {
  struct Cell {
    std::int64_t n;
    double rho;
    std::size_t rep;
  };
  std::vector<Cell> cells;
  for (auto n : options.n)
    for (double rho : options.rho)
      for (std::size_t rep = 0; rep < options.reps; ++rep) cells.push_back({n, rho, rep});

  const std::array<PolicySpec, 2> policies{PolicySpec::parse("jlmu"), PolicySpec::parse("slta")};
  std::vector<Table1Row> per_cell(cells.size());
  parallel_for(cells.size(), options.threads, [&](std::size_t k) {
    const auto& c = cells[k];
    RunConfig run;
    run.horizon = options.horizon;
    run.seed = options.seed;
    run.replication = c.rep;
    run.init = InitMode::optimal_rounded;
    const auto m = coupled_simulate(table1_config(c.n, c.rho), policies, run);
    auto& row = per_cell[k];
    row.n = c.n;
    row.rho = c.rho;
    row.rep = c.rep;
    row.avg_s = m[0].avg_s;
    row.bound = m[0].empirical_bound;
    row.jlmu = m[0].avg_u;
    row.slta = m[1].avg_u;
    row.bound_holds = m[0].bound_holds() && m[1].bound_holds();
  });

  std::vector<Table1Row> rows;
  std::size_t k = 0;
  for (auto n : options.n)
    for (double rho : options.rho) {
      Table1Row mean;
      mean.n = n;
      mean.rho = rho;
      for (std::size_t rep = 0; rep < options.reps; ++rep, ++k) {
        const auto& row = per_cell[k];
        mean.avg_s += row.avg_s;
        mean.jlmu += row.jlmu;
        mean.slta += row.slta;
        mean.bound_holds = mean.bound_holds && row.bound_holds;
        rows.push_back(row);
      }
      const auto reps = static_cast<double>(options.reps);
      mean.avg_s /= reps;
      mean.jlmu /= reps;
      mean.slta /= reps;
      const auto cfg = table1_config(n, rho);
      mean.bound = upper_bound(Ranking(cfg.utilities), cfg.alpha, mean.avg_s);
      rows.push_back(mean);
    }
  return rows;
}

void write_table1(std::ostream& out, const std::vector<Table1Row>& rows) {
  write_csv_row(out, {"n", "rho", "rep", "avg_s", "bound", "jlmu", "slta"});
  for (const auto& r : rows)
    write_csv_row(out, {std::to_string(r.n), format_number(r.rho), r.rep ? std::to_string(*r.rep) : "mean",
                        format_number(r.avg_s), format_number(r.bound), format_number(r.jlmu),
                        format_number(r.slta)});
}

SuboptimalReport run_suboptimal(const SuboptimalOptions& options) {
  const auto cfg = two_pool_config(options.a, options.eps, options.rho);
  const std::array<PolicySpec, 2> policies{PolicySpec::parse("jlmu"), PolicySpec::parse("fixed:2")};
  SuboptimalReport report;
  report.jlmu_runs.resize(options.reps);
  report.fixed_runs.resize(options.reps);
  parallel_for(options.reps, options.threads, [&](std::size_t rep) {
    RunConfig run;
    run.horizon = options.horizon;
    run.seed = options.seed;
    run.replication = rep;
    const auto m = coupled_simulate(cfg, policies, run);
    const auto pools = static_cast<double>(cfg.n);
    report.jlmu_runs[rep] = pools * m[0].avg_u;
    report.fixed_runs[rep] = pools * m[1].avg_u;
  });
  report.jlmu = estimate(report.jlmu_runs);
  report.fixed = estimate(report.fixed_runs);
  for (std::size_t rep = 0; rep < options.reps; ++rep)
    if (report.jlmu_runs[rep] < report.fixed_runs[rep]) ++report.jlmu_below;
  report.closed_form = options.a * (1.0 - std::exp(-options.rho));
  report.jlmu_bound = options.a * (options.eps * options.rho + options.rho / (options.rho + 1.0));
  return report;
}

void write_suboptimal(std::ostream& out, const SuboptimalReport& report, const SuboptimalOptions& options) {
  write_csv_row(out, {"quantity", "value", "stderr"});
  write_csv_row(out, {"a", format_number(options.a), ""});
  write_csv_row(out, {"eps", format_number(options.eps), ""});
  write_csv_row(out, {"rho", format_number(options.rho), ""});
  write_csv_row(out, {"jlmu_mean", format_number(report.jlmu.mean), format_number(report.jlmu.error)});
  write_csv_row(out, {"fixed2_mean", format_number(report.fixed.mean), format_number(report.fixed.error)});
  write_csv_row(out, {"fixed2_closed_form", format_number(report.closed_form), ""});
  write_csv_row(out, {"jlmu_bound", format_number(report.jlmu_bound), ""});
  write_csv_row(out, {"jlmu_below_fixed2", std::to_string(report.jlmu_below), std::to_string(report.jlmu_runs.size())});
}

std::vector<SimulationRow> run_sweep(const ExperimentConfig& cfg, unsigned threads) {
  struct Cell {
    std::int64_t n;
    double rho;
    std::uint64_t seed;
    std::size_t rep;
  };
  std::vector<Cell> cells;
  for (auto n : cfg.sweep.n)
    for (double rho : cfg.sweep.rho)
      for (auto seed : cfg.sweep.seeds)
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) cells.push_back({n, rho, seed, rep});

  const auto policies = cfg.resolved_policies();
  std::vector<SimulationRow> rows(cells.size() * policies.size());
  parallel_for(cells.size(), threads, [&](std::size_t k) {
    const auto& c = cells[k];
    const auto system = cfg.system(c.n, c.rho);
    const auto run = cfg.run(c.seed, c.rep);
    for (std::size_t p = 0; p < policies.size(); ++p) {
      const auto start = std::chrono::steady_clock::now();
      auto& row = rows[k * policies.size() + p];
      row.metrics = simulate(system, policies[p], run);
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      row.policy = policies[p].to_string();
      row.n = c.n;
      row.rho = c.rho;
      row.seed = c.seed;
      row.rep = c.rep;
    }
  });
  return rows;
}

void write_simulation_csv(std::ostream& out, const std::vector<SimulationRow>& rows) {
  write_csv_row(out, {"policy", "n", "rho", "seed", "rep", "avg_u", "avg_s", "empirical_bound", "bound_rho", "r_final",
                      "switches", "events", "wall_ms"});
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    write_csv_row(out, {r.policy, std::to_string(r.n), format_number(r.rho), std::to_string(r.seed),
                        std::to_string(r.rep), format_number(m.avg_u), format_number(m.avg_s),
                        format_number(m.empirical_bound), format_number(m.bound_rho), std::to_string(m.r_final),
                        std::to_string(m.switches), std::to_string(m.events), format_number(r.wall_ms)});
  }
}

}  // namespace poolsim
