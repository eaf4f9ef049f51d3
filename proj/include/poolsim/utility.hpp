#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace poolsim {

/// Concave utility of a single server pool as a function of its occupancy.
///
/// Four shapes are supported: `x log(r / x)` (with value 0 at x = 0),
/// `c x`, `c min(x, cap)` and a tabulated list `u(0..J)` that continues
/// linearly past `J` with its last marginal.
class Utility {
public:
  enum class Kind { log_quality, linear, capped_linear, table };

  static Utility log_quality(double resource);
  static Utility linear(double slope);
  static Utility capped_linear(double slope, double cap);
  static Utility table(std::vector<double> values);

  double value(std::int64_t occupancy) const;

  /// u(j + 1) - u(j).
  double marginal(std::int64_t occupancy) const;

  Kind kind() const noexcept { return kind_; }
  double resource() const noexcept { return a_; }
  double slope() const noexcept { return a_; }
  double cap() const noexcept { return b_; }
  const std::vector<double>& values() const noexcept { return table_; }

  friend bool operator==(const Utility&, const Utility&) = default;

private:
  Utility(Kind kind, double a, double b, std::vector<double> table)
      : kind_(kind), a_(a), b_(b), table_(std::move(table)) {}

  Kind kind_;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<double> table_;
};

std::string to_string(Utility::Kind kind);

/// One utility per server pool class.
class UtilityFamily {
public:
  UtilityFamily() = default;
  explicit UtilityFamily(std::vector<Utility> classes);

  std::size_t classes() const noexcept { return classes_.size(); }
  const Utility& operator[](std::size_t cls) const { return classes_[cls]; }

  /// Throws std::out_of_range for an invalid class.
  const Utility& at(std::size_t cls) const;

  double value(std::size_t cls, std::int64_t occupancy) const { return at(cls).value(occupancy); }
  double marginal(std::size_t cls, std::int64_t occupancy) const { return at(cls).marginal(occupancy); }

  auto begin() const { return classes_.begin(); }
  auto end() const { return classes_.end(); }

  friend bool operator==(const UtilityFamily&, const UtilityFamily&) = default;

private:
  std::vector<Utility> classes_;
};

}  // namespace poolsim
