#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "poolsim/assign.hpp"
#include "poolsim/model.hpp"
#include "poolsim/policies.hpp"

namespace poolsim {

enum class InitMode { empty, optimal_rounded };

struct RunConfig {
  double horizon = 180.0;
  /// Defaults to 0 for optimal_rounded starts and 5 / mu for empty ones.
  std::optional<double> warmup;
  std::uint64_t seed = 1;
  std::uint64_t replication = 0;
  InitMode init = InitMode::empty;
  /// Times at which the scaled occupancy profile is recorded.
  std::vector<double> sample_times;
  /// Equal-length batches over [warmup, horizon] for batch means.
  std::size_t batches = 20;
  /// Re-verify state, calendar and token bookkeeping after every event.
  bool check_invariants = false;

  double effective_warmup(double mu) const;
};

struct Metrics {
  /// Time averages over [warmup, horizon].
  double avg_u = 0.0;
  double avg_s = 0.0;
  /// u* at the time-average load avg_s, and at the offered load.
  double empirical_bound = 0.0;
  double bound_rho = 0.0;
  std::int64_t r_final = 0;
  std::int64_t switches = 0;
  std::int64_t arrivals = 0;
  std::int64_t events = 0;
  /// (time, learning index) at the start and after every change.
  std::vector<std::pair<double, std::int64_t>> r_path;
  std::vector<double> batch_u;
  std::vector<double> batch_s;
  std::vector<QVector> samples;

  bool bound_holds(double tol = 1e-9) const { return avg_u <= empirical_bound + tol; }
  friend bool operator==(const Metrics&, const Metrics&);
};

/// Initial per-class occupancies (one entry per pool) and the learning
/// index SLTA should start from.
struct InitialState {
  std::vector<std::vector<std::int64_t>> pool_levels;
  std::int64_t learning_index = 1;

  OccupancyState occupancy() const;
};

/// `empty`: no tasks, index 1. `optimal_rounded`: class totals rounded from
/// n * q* so that the grand total is round(n * rho), spread evenly inside each
/// class, index set to the rank of sigma*.
InitialState init_state(const SystemConfig& cfg, const Ranking& ranking, InitMode mode);

Metrics simulate(const SystemConfig& cfg, const Ranking& ranking, Policy& policy, const RunConfig& run);
Metrics simulate(const SystemConfig& cfg, const PolicySpec& policy, const RunConfig& run);

/// Runs each policy on the same arrival epochs and the same per-task service
/// durations; results follow the order of `policies`.
std::vector<Metrics> coupled_simulate(const SystemConfig& cfg, std::span<const PolicySpec> policies,
                                      const RunConfig& run);

}  // namespace poolsim
