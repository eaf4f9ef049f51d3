#include "poolsim/ranking.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace poolsim {

std::ostream& operator<<(std::ostream& os, const Coordinate& c) {
  return os << '(' << c.cls + 1 << ',' << c.level << ')';
}

Ranking::Ranking(UtilityFamily utilities, double tie_tolerance)
    : utilities_(std::move(utilities)), tie_tolerance_(tie_tolerance) {
  if (!(tie_tolerance_ >= 0.0)) throw std::invalid_argument("tie tolerance must be non-negative");
}

void Ranking::check(Coordinate c) const {
  if (c.cls < 0 || static_cast<std::size_t>(c.cls) >= utilities_.classes())
    throw std::out_of_range("invalid class index " + std::to_string(c.cls));
  if (c.level < 1) throw std::out_of_range("coordinate level must be at least 1");
}

bool Ranking::precedes(Coordinate a, Coordinate b) const {
  check(a);
  check(b);
  // Concavity already fixes the order inside a class; comparing rounded
  // differences there could flip neighbours whose marginals tie.
  if (a.cls == b.cls) return a.level > b.level;
  const double ga = gain(a);
  const double gb = gain(b);
  if (tie_tolerance_ == 0.0) {
    if (ga != gb) return ga < gb;
  } else if (std::abs(ga - gb) > tie_tolerance_) {
    return ga < gb;
  }
  return b < a;
}

std::vector<Coordinate> Ranking::enumerate(std::size_t count) const {
  RankedStream stream(*this);
  std::vector<Coordinate> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(stream.next());
  return out;
}

RankedStream::RankedStream(const Ranking& ranking)
    : ranking_(&ranking), heads_(ranking.classes(), 1) {}

Coordinate RankedStream::next() {
  Coordinate best{0, heads_[0]};
  for (std::size_t i = 1; i < heads_.size(); ++i) {
    const Coordinate c{static_cast<std::int32_t>(i), heads_[i]};
    if (ranking_->outranks(c, best)) best = c;
  }
  if (heads_[best.cls] == max_level) throw std::overflow_error("coordinate level overflow");
  ++heads_[best.cls];
  ++produced_;
  return best;
}

Coordinate Enumeration::operator[](std::size_t k) {
  if (k == 0) throw std::out_of_range("enumeration is indexed from 1");
  while (entries_.size() < k) entries_.push_back(stream_.next());
  return entries_[k - 1];
}

std::vector<std::int32_t> Enumeration::filled_levels(std::size_t count) {
  if (count > 0) (void)(*this)[count];
  std::vector<std::int32_t> levels(classes_, 0);
  for (std::size_t k = 0; k < count; ++k) ++levels[entries_[k].cls];
  return levels;
}

}  // namespace poolsim
