#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <vector>

#include "poolsim/utility.hpp"

namespace poolsim {

/// Position of a server pool: class `cls` (0-based) holding exactly
/// `level - 1` tasks. Levels start at 1.
struct Coordinate {
  std::int32_t cls = 0;
  std::int32_t level = 1;

  friend auto operator<=>(const Coordinate&, const Coordinate&) = default;
};

std::ostream& operator<<(std::ostream& os, const Coordinate& c);

inline constexpr std::int64_t max_level = std::numeric_limits<std::int32_t>::max();

/// Total order on coordinates by marginal utility of the next task.
///
/// `a` precedes `b` (a is ranked worse) when the marginal of `a` is smaller,
/// or the marginals tie and `a` comes later in dictionary order. Ties are
/// exact floating equality unless a tolerance is given.
class Ranking {
public:
  Ranking() = default;
  explicit Ranking(UtilityFamily utilities, double tie_tolerance = 0.0);

  const UtilityFamily& utilities() const noexcept { return utilities_; }
  std::size_t classes() const noexcept { return utilities_.classes(); }
  double tie_tolerance() const noexcept { return tie_tolerance_; }

  /// Marginal utility of a task sent to a pool at coordinate `c`.
  double gain(Coordinate c) const { return utilities_.marginal(c.cls, c.level - 1); }

  bool precedes(Coordinate a, Coordinate b) const;
  bool outranks(Coordinate a, Coordinate b) const { return precedes(b, a); }

  /// The best `count` coordinates in decreasing rank.
  std::vector<Coordinate> enumerate(std::size_t count) const;

private:
  void check(Coordinate c) const;

  UtilityFamily utilities_;
  double tie_tolerance_ = 0.0;
};

/// Lazy m-way merge producing coordinates in strictly decreasing rank.
class RankedStream {
public:
  explicit RankedStream(const Ranking& ranking);

  Coordinate next();
  std::size_t produced() const noexcept { return produced_; }

private:
  const Ranking* ranking_;
  std::vector<std::int32_t> heads_;
  std::size_t produced_ = 0;
};

/// Growable cache of the ranked enumeration, indexed from 1.
class Enumeration {
public:
  explicit Enumeration(const Ranking& ranking) : stream_(ranking), classes_(ranking.classes()) {}

  /// The k-th best coordinate, k >= 1.
  Coordinate operator[](std::size_t k);

  /// Number of entries among the best `count` that belong to each class;
  /// these are the per-class levels filled by the first `count` slots.
  std::vector<std::int32_t> filled_levels(std::size_t count);

  std::size_t cached() const noexcept { return entries_.size(); }

private:
  RankedStream stream_;
  std::size_t classes_;
  std::vector<Coordinate> entries_;
};

}  // namespace poolsim
