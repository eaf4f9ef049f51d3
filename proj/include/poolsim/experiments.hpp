#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "poolsim/config.hpp"
#include "poolsim/sim.hpp"
#include "poolsim/stats.hpp"

namespace poolsim {

/// Shortest round-trip-safe text at 9 significant digits, '.' decimal point.
std::string format_number(double x);

/// Writes one comma-separated line.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// Two classes of equal size, utilities x log(20 / x) and x log(30 / x).
SystemConfig table1_config(std::int64_t n, double rho);

/// Three classes (1/2, 1/4, 1/4): x, 2x - x^2 / 20, and 1.5 min(x, 20).
SystemConfig staircase_config(std::int64_t n, double rho);

/// Two single pools: linear a eps x, and a min(x, 1). `rho` is the load of
/// the whole system.
SystemConfig two_pool_config(double a, double eps, double rho);

struct Table1Options {
  std::vector<std::int64_t> n{50, 100, 200};
  std::vector<double> rho{9.75, 10.0};
  std::size_t reps = 20;
  std::uint64_t seed = 1;
  double horizon = 180.0;
  unsigned threads = 0;
};

struct Table1Row {
  std::int64_t n = 0;
  double rho = 0.0;
  /// Replication index; empty rows carry the mean over replications.
  std::optional<std::size_t> rep;
  double avg_s = 0.0;
  double bound = 0.0;
  double jlmu = 0.0;
  double slta = 0.0;
  bool bound_holds = true;
};

/// Coupled JLMU/SLTA runs from the rounded optimum, per replication plus a
/// mean row per (n, rho). The per-row bound is u* at the mean load.
std::vector<Table1Row> run_table1(const Table1Options& options);
void write_table1(std::ostream& out, const std::vector<Table1Row>& rows);

struct SuboptimalOptions {
  double a = 1.0;
  double eps = 0.05;
  double rho = 1.0;
  double horizon = 5000.0;
  std::size_t reps = 20;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct SuboptimalReport {
  /// System-level time-average utility (sum over both pools).
  Estimate jlmu;
  Estimate fixed;
  std::vector<double> jlmu_runs;
  std::vector<double> fixed_runs;
  double closed_form = 0.0;
  double jlmu_bound = 0.0;
  /// Replications where JLMU ends below the fixed policy.
  std::size_t jlmu_below = 0;
};

SuboptimalReport run_suboptimal(const SuboptimalOptions& options);
void write_suboptimal(std::ostream& out, const SuboptimalReport& report, const SuboptimalOptions& options);

struct SimulationRow {
  std::string policy;
  std::int64_t n = 0;
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::size_t rep = 0;
  Metrics metrics;
  double wall_ms = 0.0;
};

/// Every (n, rho, seed, rep) cell of the sweep, all policies coupled within
/// a cell. Rows are ordered by cell, then policy.
std::vector<SimulationRow> run_sweep(const ExperimentConfig& cfg, unsigned threads);
void write_simulation_csv(std::ostream& out, const std::vector<SimulationRow>& rows);

}  // namespace poolsim
