#include "poolsim/occupancy.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace poolsim {

OccupancyState::OccupancyState(std::vector<std::int64_t> pools_per_class)
    : pools_(std::move(pools_per_class)),
      tasks_(pools_.size(), 0),
      lowest_(pools_.size(), 0),
      counts_(pools_.size()) {
  for (std::size_t i = 0; i < pools_.size(); ++i) {
    if (pools_[i] <= 0) throw std::invalid_argument("every class needs at least one pool");
    counts_[i] = {pools_[i]};
    total_pools_ += pools_[i];
  }
}

OccupancyState OccupancyState::from_counts(std::vector<std::vector<std::int64_t>> counts) {
  OccupancyState state;
  state.counts_ = std::move(counts);
  for (std::size_t i = 0; i < state.counts_.size(); ++i) {
    auto& c = state.counts_[i];
    if (c.empty()) c = {0};
    std::int64_t pools = 0, tasks = 0, lowest = -1;
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (c[j] < 0) throw std::invalid_argument("negative pool count");
      if (c[j] > 0 && lowest < 0) lowest = static_cast<std::int64_t>(j);
      pools += c[j];
      tasks += c[j] * static_cast<std::int64_t>(j);
    }
    if (pools <= 0) throw std::invalid_argument("every class needs at least one pool");
    state.pools_.push_back(pools);
    state.tasks_.push_back(tasks);
    state.lowest_.push_back(lowest);
    state.total_pools_ += pools;
    state.total_tasks_ += tasks;
  }
  return state;
}

std::int64_t OccupancyState::pools_below(std::size_t cls, std::int64_t occupancy) const {
  const auto& c = counts_[cls];
  std::int64_t total = 0;
  const auto top = std::min<std::int64_t>(occupancy, static_cast<std::int64_t>(c.size()));
  for (std::int64_t j = lowest_[cls]; j < top; ++j) total += c[j];
  return total;
}

void OccupancyState::add_task(std::size_t cls, std::int64_t occupancy) {
  auto& c = counts_.at(cls);
  if (count(cls, occupancy) <= 0)
    throw std::logic_error("no class " + std::to_string(cls) + " pool holds " + std::to_string(occupancy) +
                           " tasks");
  if (occupancy + 1 >= static_cast<std::int64_t>(c.size())) c.resize(occupancy + 2, 0);
  --c[occupancy];
  ++c[occupancy + 1];
  ++tasks_[cls];
  ++total_tasks_;
  if (occupancy == lowest_[cls] && c[occupancy] == 0) lowest_[cls] = occupancy + 1;
}

void OccupancyState::remove_task(std::size_t cls, std::int64_t occupancy) {
  auto& c = counts_.at(cls);
  if (occupancy < 1 || count(cls, occupancy) <= 0)
    throw std::logic_error("no class " + std::to_string(cls) + " pool holds " + std::to_string(occupancy) +
                           " tasks to remove");
  --c[occupancy];
  ++c[occupancy - 1];
  --tasks_[cls];
  --total_tasks_;
  if (occupancy - 1 < lowest_[cls]) lowest_[cls] = occupancy - 1;
}

void OccupancyState::check_invariants() const {
  std::int64_t all_tasks = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    std::int64_t pools = 0, tasks = 0, lowest = -1;
    for (std::size_t j = 0; j < counts_[i].size(); ++j) {
      if (counts_[i][j] < 0) throw std::logic_error("negative pool count");
      if (counts_[i][j] > 0 && lowest < 0) lowest = static_cast<std::int64_t>(j);
      pools += counts_[i][j];
      tasks += counts_[i][j] * static_cast<std::int64_t>(j);
    }
    if (pools != pools_[i]) throw std::logic_error("class " + std::to_string(i) + " pool count drifted");
    if (tasks != tasks_[i]) throw std::logic_error("class " + std::to_string(i) + " task count drifted");
    if (lowest != lowest_[i]) throw std::logic_error("class " + std::to_string(i) + " lowest level drifted");
    all_tasks += tasks;
  }
  if (all_tasks != total_tasks_) throw std::logic_error("total task count drifted");
}

}  // namespace poolsim
