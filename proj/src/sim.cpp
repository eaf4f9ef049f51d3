#include "poolsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "poolsim/random.hpp"

namespace poolsim {

double RunConfig::effective_warmup(double mu) const {
  if (warmup) return *warmup;
  return init == InitMode::optimal_rounded ? 0.0 : 5.0 / mu;
}

bool operator==(const Metrics& a, const Metrics& b) {
  if (a.samples.size() != b.samples.size()) return false;
  for (std::size_t k = 0; k < a.samples.size(); ++k)
    if (a.samples[k].values() != b.samples[k].values()) return false;
  return a.avg_u == b.avg_u && a.avg_s == b.avg_s && a.empirical_bound == b.empirical_bound &&
         a.bound_rho == b.bound_rho && a.r_final == b.r_final && a.switches == b.switches &&
         a.arrivals == b.arrivals && a.events == b.events && a.r_path == b.r_path && a.batch_u == b.batch_u &&
         a.batch_s == b.batch_s;
}

OccupancyState InitialState::occupancy() const {
  std::vector<std::vector<std::int64_t>> counts(pool_levels.size());
  for (std::size_t i = 0; i < pool_levels.size(); ++i) {
    for (auto level : pool_levels[i]) {
      if (level >= static_cast<std::int64_t>(counts[i].size())) counts[i].resize(level + 1, 0);
      ++counts[i][level];
    }
  }
  return OccupancyState::from_counts(std::move(counts));
}

InitialState init_state(const SystemConfig& cfg, const Ranking& ranking, InitMode mode) {
  cfg.validate();
  const auto pools = cfg.pool_counts();
  InitialState init;
  init.pool_levels.resize(pools.size());
  for (std::size_t i = 0; i < pools.size(); ++i) init.pool_levels[i].assign(pools[i], 0);
  if (mode == InitMode::empty) return init;

  const double n = static_cast<double>(cfg.n);
  const auto opt = optimal_assignment(ranking, cfg.alpha, cfg.rho());
  const auto total = std::llround(n * cfg.rho());

  // Largest-remainder rounding of the per-class task totals.
  std::vector<std::int64_t> tasks(pools.size());
  std::vector<double> remainder(pools.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < pools.size(); ++i) {
    const double exact = n * opt.q_star.class_mass(static_cast<Eigen::Index>(i));
    tasks[i] = static_cast<std::int64_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(tasks[i]);
    assigned += tasks[i];
  }
  std::vector<std::size_t> order(pools.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size(), ++assigned) ++tasks[order[k]];

  for (std::size_t i = 0; i < pools.size(); ++i) {
    const auto base = tasks[i] / pools[i];
    const auto extra = tasks[i] % pools[i];
    for (std::int64_t p = 0; p < pools[i]; ++p) init.pool_levels[i][p] = base + (p < extra ? 1 : 0);
  }

  // Rounding can fill the boundary class completely; the index then sits one
  // slot further, as it would after an SLTA increment.
  const auto state = init.occupancy();
  Enumeration enumeration(ranking);
  auto index = static_cast<std::int64_t>(opt.sigma_index);
  while (!slta_good(state, slta_thresholds(enumeration, ranking.classes(), index))) {
    if (++index > static_cast<std::int64_t>(max_enumeration_walk))
      throw std::logic_error("rounded optimal state admits no valid learning index");
  }
  init.learning_index = index;
  return init;
}

namespace {

class MarginalCache {
public:
  explicit MarginalCache(const UtilityFamily& utilities) : utilities_(&utilities), table_(utilities.classes()) {}

  double operator()(std::size_t cls, std::int64_t occupancy) {
    auto& t = table_[cls];
    if (occupancy >= static_cast<std::int64_t>(t.size())) {
      const auto old = static_cast<std::int64_t>(t.size());
      t.resize(std::max<std::int64_t>(occupancy + 1, 2 * old + 16));
      for (auto j = old; j < static_cast<std::int64_t>(t.size()); ++j) t[j] = utilities_->marginal(cls, j);
    }
    return t[occupancy];
  }

private:
  const UtilityFamily* utilities_;
  std::vector<std::vector<double>> table_;
};

struct Departure {
  double time;
  std::int32_t pool;
  bool operator>(const Departure& other) const { return time > other.time; }
};

class Engine {
public:
  Engine(const SystemConfig& cfg, const Ranking& ranking, Policy& policy, const RunConfig& run)
      : cfg_(cfg),
        ranking_(ranking),
        policy_(policy),
        run_(run),
        marginals_(cfg.utilities),
        arrivals_(run.seed, run.replication, StreamId::arrivals),
        services_(run.seed, run.replication, StreamId::services),
        selections_(run.seed, run.replication, StreamId::selections) {}

  Metrics run() {
    cfg_.validate();
    const double horizon = run_.horizon;
    warmup_ = run_.effective_warmup(cfg_.mu);
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(warmup_ >= 0.0) || !(warmup_ < horizon)) throw std::invalid_argument("warmup must lie in [0, horizon)");
    if (run_.batches == 0) throw std::invalid_argument("at least one batch is required");
    batch_length_ = (horizon - warmup_) / static_cast<double>(run_.batches);
    metrics_.batch_u.assign(run_.batches, 0.0);
    metrics_.batch_s.assign(run_.batches, 0.0);

    const auto init = init_state(cfg_, ranking_, run_.init);
    setup(init);
    policy_.reset(state_, init.learning_index);
    if (auto r = policy_.learning_index()) metrics_.r_path.emplace_back(0.0, *r);
    if (run_.check_invariants) check();

    auto samples = run_.sample_times;
    std::sort(samples.begin(), samples.end());
    std::size_t next_sample = 0;
    auto record_until = [&](double t) {
      for (; next_sample < samples.size() && samples[next_sample] < t && samples[next_sample] <= horizon;
           ++next_sample)
        metrics_.samples.push_back(occupancy_to_q(state_));
    };

    const double arrival_rate = static_cast<double>(cfg_.n) * cfg_.lambda;
    constexpr double never = std::numeric_limits<double>::infinity();
    double next_arrival = arrival_rate > 0.0 ? arrivals_.exponential(arrival_rate) : never;
    double t = 0.0;
    for (;;) {
      const double next_departure = calendar_.empty() ? never : calendar_.front().time;
      const double te = std::min(next_arrival, next_departure);
      if (te > horizon) {
        accumulate(t, horizon);
        record_until(std::nextafter(horizon, never));
        break;
      }
      accumulate(t, te);
      record_until(te);
      t = te;
      if (next_arrival <= next_departure) {
        arrive(t);
        next_arrival = t + arrivals_.exponential(arrival_rate);
      } else {
        depart();
      }
      ++metrics_.events;
      if (run_.check_invariants) check();
    }

    const double length = horizon - warmup_;
    metrics_.avg_u = sum_u_ / length;
    metrics_.avg_s = sum_s_ / length;
    for (auto& b : metrics_.batch_u) b /= batch_length_;
    for (auto& b : metrics_.batch_s) b /= batch_length_;
    metrics_.empirical_bound = upper_bound(ranking_, cfg_.alpha, metrics_.avg_s);
    metrics_.bound_rho = upper_bound(ranking_, cfg_.alpha, cfg_.rho());
    metrics_.r_final = policy_.learning_index().value_or(0);
    return std::move(metrics_);
  }

private:
  void setup(const InitialState& init) {
    state_ = init.occupancy();
    const auto classes = init.pool_levels.size();
    buckets_.assign(classes, {});
    for (std::size_t i = 0; i < classes; ++i) {
      for (auto level : init.pool_levels[i]) {
        const auto id = static_cast<std::int32_t>(pool_class_.size());
        pool_class_.push_back(static_cast<std::int32_t>(i));
        pool_level_.push_back(level);
        pool_pos_.push_back(0);
        insert(id);
        for (std::int64_t k = 0; k < level; ++k) schedule(services_.exponential(cfg_.mu), id);
      }
    }
    n_ = static_cast<double>(cfg_.n);
    u_ = overall_utility(state_, cfg_.utilities);
  }

  std::vector<std::int32_t>& bucket(std::size_t cls, std::int64_t level) {
    auto& b = buckets_[cls];
    if (level >= static_cast<std::int64_t>(b.size())) b.resize(level + 1);
    return b[level];
  }

  void insert(std::int32_t pool) {
    auto& b = bucket(pool_class_[pool], pool_level_[pool]);
    pool_pos_[pool] = static_cast<std::int32_t>(b.size());
    b.push_back(pool);
  }

  void erase(std::int32_t pool) {
    auto& b = bucket(pool_class_[pool], pool_level_[pool]);
    const auto pos = pool_pos_[pool];
    b[pos] = b.back();
    pool_pos_[b[pos]] = pos;
    b.pop_back();
  }

  void schedule(double time, std::int32_t pool) {
    calendar_.push_back({time, pool});
    std::push_heap(calendar_.begin(), calendar_.end(), std::greater<>{});
  }

  void move(std::int32_t pool, int step) {
    const auto cls = static_cast<std::size_t>(pool_class_[pool]);
    const auto from = pool_level_[pool];
    erase(pool);
    pool_level_[pool] = from + step;
    insert(pool);
    if (step > 0) {
      state_.add_task(cls, from);
      u_ += marginals_(cls, from) / n_;
    } else {
      state_.remove_task(cls, from);
      u_ -= marginals_(cls, from - 1) / n_;
    }
    policy_.observe(cls, from, from + step);
  }

  void arrive(double t) {
    const double service = services_.exponential(cfg_.mu);
    const auto decision = policy_.decide(state_, selections_.uniform());
    const auto& b = bucket(decision.target.cls, decision.target.level - 1);
    if (b.empty()) throw std::logic_error("policy targeted an unoccupied coordinate");
    const auto k = std::min(static_cast<std::size_t>(selections_.uniform() * static_cast<double>(b.size())),
                            b.size() - 1);
    const auto pool = b[k];
    move(pool, +1);
    schedule(t + service, pool);
    const auto before = policy_.learning_index();
    policy_.commit(decision, state_);
    const auto after = policy_.learning_index();
    if (before != after) {
      ++metrics_.switches;
      metrics_.r_path.emplace_back(t, after.value_or(0));
    }
    ++metrics_.arrivals;
  }

  void depart() {
    std::pop_heap(calendar_.begin(), calendar_.end(), std::greater<>{});
    const auto pool = calendar_.back().pool;
    calendar_.pop_back();
    move(pool, -1);
  }

  void accumulate(double from, double to) {
    double a = std::max(from, warmup_);
    const double b = std::min(to, run_.horizon);
    if (!(b > a)) return;
    const double s = static_cast<double>(state_.total_tasks()) / n_;
    sum_u_ += u_ * (b - a);
    sum_s_ += s * (b - a);
    const auto last = run_.batches - 1;
    while (a < b) {
      auto k = std::min(static_cast<std::size_t>((a - warmup_) / batch_length_), last);
      double end = k == last ? run_.horizon : warmup_ + static_cast<double>(k + 1) * batch_length_;
      if (end <= a && k < last) {
        ++k;
        end = k == last ? run_.horizon : warmup_ + static_cast<double>(k + 1) * batch_length_;
      }
      const double seg = std::min(b, end) - a;
      metrics_.batch_u[k] += u_ * seg;
      metrics_.batch_s[k] += s * seg;
      a += seg;
      if (k == last) break;
    }
  }

  void check() const {
    state_.check_invariants();
    if (static_cast<std::int64_t>(calendar_.size()) != state_.total_tasks())
      throw std::logic_error("pending departures disagree with the task count");
    if (const auto* slta = dynamic_cast<const SltaPolicy*>(&policy_)) {
      if (slta->tokens() != token_counts(state_, slta->thresholds()))
        throw std::logic_error("incremental token counts drifted");
      if (!slta_good(state_, slta->thresholds())) throw std::logic_error("SLTA goodness violated");
    }
  }

  const SystemConfig& cfg_;
  const Ranking& ranking_;
  Policy& policy_;
  const RunConfig& run_;
  MarginalCache marginals_;
  Stream arrivals_;
  Stream services_;
  Stream selections_;

  OccupancyState state_;
  std::vector<std::int32_t> pool_class_;
  std::vector<std::int64_t> pool_level_;
  std::vector<std::int32_t> pool_pos_;
  std::vector<std::vector<std::vector<std::int32_t>>> buckets_;
  std::vector<Departure> calendar_;

  double n_ = 1.0;
  double u_ = 0.0;
  double warmup_ = 0.0;
  double batch_length_ = 0.0;
  double sum_u_ = 0.0;
  double sum_s_ = 0.0;
  Metrics metrics_;
};

}  // namespace

Metrics simulate(const SystemConfig& cfg, const Ranking& ranking, Policy& policy, const RunConfig& run) {
  return Engine(cfg, ranking, policy, run).run();
}

Metrics simulate(const SystemConfig& cfg, const PolicySpec& spec, const RunConfig& run) {
  const Ranking ranking(cfg.utilities);
  auto policy = make_policy(spec, ranking, cfg.n);
  return simulate(cfg, ranking, *policy, run);
}

std::vector<Metrics> coupled_simulate(const SystemConfig& cfg, std::span<const PolicySpec> policies,
                                      const RunConfig& run) {
  if (policies.empty()) throw std::invalid_argument("at least one policy is required");
  const Ranking ranking(cfg.utilities);
  std::vector<Metrics> out;
  out.reserve(policies.size());
  for (const auto& spec : policies) {
    auto policy = make_policy(spec, ranking, cfg.n);
    out.push_back(simulate(cfg, ranking, *policy, run));
  }
  return out;
}

}  // namespace poolsim
