#pragma once

#include <cstdint>
#include <vector>

namespace poolsim {

/// Exact counts N(i, j) of class-i pools holding exactly j tasks.
///
/// Pools of the same class and occupancy are exchangeable, so this is the
/// full state of a finite system under the policies in this library.
class OccupancyState {
public:
  OccupancyState() = default;
  /// All pools empty.
  explicit OccupancyState(std::vector<std::int64_t> pools_per_class);

  /// State with the given counts: `counts[i][j]` pools of class i hold j tasks.
  static OccupancyState from_counts(std::vector<std::vector<std::int64_t>> counts);

  std::size_t classes() const noexcept { return pools_.size(); }
  std::int64_t pools(std::size_t cls) const { return pools_.at(cls); }
  std::int64_t total_pools() const noexcept { return total_pools_; }
  std::int64_t tasks(std::size_t cls) const { return tasks_.at(cls); }
  std::int64_t total_tasks() const noexcept { return total_tasks_; }

  /// N(cls, occupancy); zero beyond the stored range.
  std::int64_t count(std::size_t cls, std::int64_t occupancy) const {
    const auto& c = counts_[cls];
    return occupancy >= 0 && occupancy < static_cast<std::int64_t>(c.size()) ? c[occupancy] : 0;
  }
  const std::vector<std::int64_t>& counts(std::size_t cls) const { return counts_.at(cls); }

  /// Smallest occupancy held by some pool of the class.
  std::int64_t lowest(std::size_t cls) const { return lowest_[cls]; }
  /// Largest occupancy index stored for the class (may hold zero pools).
  std::int64_t highest(std::size_t cls) const { return static_cast<std::int64_t>(counts_[cls].size()) - 1; }

  /// Number of class pools holding fewer than `occupancy` tasks.
  std::int64_t pools_below(std::size_t cls, std::int64_t occupancy) const;

  /// One pool of the class goes from `occupancy` to `occupancy + 1` tasks.
  void add_task(std::size_t cls, std::int64_t occupancy);
  /// One pool of the class goes from `occupancy` to `occupancy - 1` tasks.
  void remove_task(std::size_t cls, std::int64_t occupancy);

  /// Throws std::logic_error when cached totals disagree with the counts.
  void check_invariants() const;

  friend bool operator==(const OccupancyState&, const OccupancyState&) = default;

private:
  std::vector<std::int64_t> pools_;
  std::vector<std::int64_t> tasks_;
  std::vector<std::int64_t> lowest_;
  std::vector<std::vector<std::int64_t>> counts_;
  std::int64_t total_pools_ = 0;
  std::int64_t total_tasks_ = 0;
};

}  // namespace poolsim
