#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "poolsim/model.hpp"

namespace poolsim {

/// Where the next task goes: a pool of class `target.cls` holding exactly
/// `target.level - 1` tasks. `learning_delta` is applied to the SLTA learning
/// index once the task has been placed.
struct PolicyDecision {
  Coordinate target;
  int learning_delta = 0;
};

/// Dispatching policy. `decide` sees the state right before an arrival and a
/// uniform draw on [0, 1); `commit` runs after the task was placed; `observe`
/// reports every single-pool occupancy change made by the simulator.
class Policy {
public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;
  virtual PolicyDecision decide(const OccupancyState& state, double draw) = 0;
  virtual void commit(const PolicyDecision&, const OccupancyState&) {}
  virtual void observe(std::size_t /*cls*/, std::int64_t /*from*/, std::int64_t /*to*/) {}

  /// Prepare for a run starting at `state`; `learning_index` seeds SLTA.
  virtual void reset(const OccupancyState& state, std::optional<std::int64_t> learning_index) {
    (void)state;
    (void)learning_index;
  }

  /// Current learning index for learning policies.
  virtual std::optional<std::int64_t> learning_index() const { return std::nullopt; }
};

/// Best-ranked coordinate among levels currently occupied by some pool.
Coordinate jlmu_target(const Ranking& ranking, const OccupancyState& state);

/// Coordinate of a pool drawn uniformly among all pools.
Coordinate random_target(const OccupancyState& state, double draw);

/// Coordinate of a pool drawn uniformly among the pools of class `cls`.
Coordinate fixed_class_target(const OccupancyState& state, std::size_t cls, double draw);

/// Green tokens per class and the yellow token count.
struct TokenCounts {
  std::vector<std::int64_t> green;
  std::int64_t yellow = 0;

  std::int64_t total_green() const;
  friend bool operator==(const TokenCounts&, const TokenCounts&) = default;
};

/// SLTA thresholds and boundary for a learning index r >= 1.
struct SltaThresholds {
  std::int64_t index = 1;
  /// (i_r, j_r).
  Coordinate boundary;
  /// Class of the (r-1)-th entry; meaningless when index == 1.
  std::int32_t previous_class = -1;
  /// l_i(r) = number of the best r - 1 coordinates that belong to class i.
  std::vector<std::int32_t> levels;
};

SltaThresholds slta_thresholds(const Ranking& ranking, std::int64_t index);
SltaThresholds slta_thresholds(Enumeration& enumeration, std::size_t classes, std::int64_t index);

/// Tokens from scratch: green(i) counts class-i pools below l_i(r), yellow
/// counts class-i_r pools with at most j_r - 1 tasks.
TokenCounts token_counts(const OccupancyState& state, const SltaThresholds& thresholds);

/// SLTA dispatch rule given tokens.
Coordinate slta_target(const OccupancyState& state, const SltaThresholds& thresholds, const TokenCounts& tokens,
                       double draw);

/// Learning step from the pre-arrival state: -1, 0 or +1.
int slta_learn(const SltaThresholds& thresholds, const TokenCounts& tokens, std::int64_t n, double beta);

/// True when every class keeps a pool at or below its threshold, which is
/// what keeps the SLTA rule dispatching at or above the boundary.
bool slta_good(const OccupancyState& state, const SltaThresholds& thresholds);

class JlmuPolicy final : public Policy {
public:
  explicit JlmuPolicy(Ranking ranking) : ranking_(std::move(ranking)) {}
  std::string name() const override { return "jlmu"; }
  PolicyDecision decide(const OccupancyState& state, double) override { return {jlmu_target(ranking_, state), 0}; }

private:
  Ranking ranking_;
};

class RandomPolicy final : public Policy {
public:
  std::string name() const override { return "random"; }
  PolicyDecision decide(const OccupancyState& state, double draw) override { return {random_target(state, draw), 0}; }
};

class FixedClassPolicy final : public Policy {
public:
  explicit FixedClassPolicy(std::size_t cls) : cls_(cls) {}
  std::string name() const override { return "fixed:" + std::to_string(cls_ + 1); }
  PolicyDecision decide(const OccupancyState& state, double draw) override {
    return {fixed_class_target(state, cls_, draw), 0};
  }

private:
  std::size_t cls_;
};

/// Self-learning threshold policy. Keeps token counts up to date through
/// `observe` and recomputes them whenever the learning index moves.
class SltaPolicy final : public Policy {
public:
  SltaPolicy(Ranking ranking, double beta);
  SltaPolicy(const SltaPolicy&) = delete;
  SltaPolicy& operator=(const SltaPolicy&) = delete;

  std::string name() const override { return "slta"; }
  PolicyDecision decide(const OccupancyState& state, double draw) override;
  void commit(const PolicyDecision& decision, const OccupancyState& state) override;
  void observe(std::size_t cls, std::int64_t from, std::int64_t to) override;
  void reset(const OccupancyState& state, std::optional<std::int64_t> learning_index) override;
  std::optional<std::int64_t> learning_index() const override { return thresholds_.index; }

  double beta() const noexcept { return beta_; }
  const SltaThresholds& thresholds() const noexcept { return thresholds_; }
  const TokenCounts& tokens() const noexcept { return tokens_; }

private:
  void set_index(std::int64_t index, const OccupancyState& state);

  Ranking ranking_;
  Enumeration enumeration_;
  double beta_;
  std::int64_t n_ = 0;
  SltaThresholds thresholds_;
  TokenCounts tokens_;
};

/// Policy description: "jlmu", "slta", "random" or "fixed:<class>" (1-based).
struct PolicySpec {
  enum class Kind { jlmu, slta, random, fixed };
  Kind kind = Kind::jlmu;
  std::size_t cls = 0;
  std::optional<double> beta;

  static PolicySpec parse(const std::string& text);
  std::string to_string() const;
  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

/// Default SLTA parameter 1 / n^0.45.
double default_beta(std::int64_t n);

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Ranking& ranking, std::int64_t n);

}  // namespace poolsim
