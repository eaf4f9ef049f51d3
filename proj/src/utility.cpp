#include "poolsim/utility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poolsim {

Utility Utility::log_quality(double resource) {
  if (!(resource > 0.0) || !std::isfinite(resource))
    throw std::invalid_argument("log_quality utility needs a positive finite resource");
  return Utility(Kind::log_quality, resource, 0.0, {});
}

Utility Utility::linear(double slope) {
  if (!std::isfinite(slope))
    throw std::invalid_argument("linear utility needs a finite slope");
  return Utility(Kind::linear, slope, 0.0, {});
}

Utility Utility::capped_linear(double slope, double cap) {
  if (!std::isfinite(slope) || !(slope >= 0.0))
    throw std::invalid_argument("capped_linear utility needs a non-negative slope");
  if (!std::isfinite(cap) || !(cap >= 0.0))
    throw std::invalid_argument("capped_linear utility needs a non-negative cap");
  return Utility(Kind::capped_linear, slope, cap, {});
}

Utility Utility::table(std::vector<double> values) {
  if (values.empty())
    throw std::invalid_argument("table utility needs at least one value");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("table utility values must be finite");
  for (std::size_t j = 2; j < values.size(); ++j) {
    const double prev = values[j - 1] - values[j - 2];
    const double next = values[j] - values[j - 1];
    const double scale = std::max({1.0, std::abs(prev), std::abs(next)});
    if (next > prev + 1e-12 * scale)
      throw std::invalid_argument("table utility is not concave at level " + std::to_string(j));
  }
  return Utility(Kind::table, 0.0, 0.0, std::move(values));
}

double Utility::value(std::int64_t x) const {
  if (x < 0) throw std::out_of_range("negative occupancy");
  const auto xd = static_cast<double>(x);
  switch (kind_) {
  case Kind::log_quality:
    return x == 0 ? 0.0 : xd * std::log(a_ / xd);
  case Kind::linear:
    return a_ * xd;
  case Kind::capped_linear:
    return a_ * std::min(xd, b_);
  case Kind::table: {
    const auto last = static_cast<std::int64_t>(table_.size()) - 1;
    if (x <= last) return table_[static_cast<std::size_t>(x)];
    const double tail = last == 0 ? 0.0 : table_[last] - table_[last - 1];
    return table_[last] + tail * static_cast<double>(x - last);
  }
  }
  return 0.0;
}

double Utility::marginal(std::int64_t j) const {
  switch (kind_) {
  case Kind::linear:
    if (j < 0) throw std::out_of_range("negative occupancy");
    return a_;
  case Kind::table: {
    if (j < 0) throw std::out_of_range("negative occupancy");
    const auto last = static_cast<std::int64_t>(table_.size()) - 1;
    if (last == 0) return 0.0;
    const auto k = std::min(j, last - 1);
    return table_[k + 1] - table_[k];
  }
  default:
    return value(j + 1) - value(j);
  }
}

std::string to_string(Utility::Kind kind) {
  switch (kind) {
  case Utility::Kind::log_quality: return "log_quality";
  case Utility::Kind::linear: return "linear";
  case Utility::Kind::capped_linear: return "capped_linear";
  case Utility::Kind::table: return "table";
  }
  return "unknown";
}

UtilityFamily::UtilityFamily(std::vector<Utility> classes) : classes_(std::move(classes)) {
  if (classes_.empty()) throw std::invalid_argument("utility family needs at least one class");
}

const Utility& UtilityFamily::at(std::size_t cls) const {
  if (cls >= classes_.size())
    throw std::out_of_range("invalid class index " + std::to_string(cls));
  return classes_[cls];
}

}  // namespace poolsim
