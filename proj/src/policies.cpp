#include "poolsim/policies.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace poolsim {
namespace {

std::int64_t pick(double draw, std::int64_t total) {
  const auto k = static_cast<std::int64_t>(draw * static_cast<double>(total));
  return std::min(k, total - 1);
}

/// Uniform pool among class `cls` occupancies below `limit`, given `index`
/// in [0, pools_below(cls, limit)).
Coordinate locate(const OccupancyState& state, std::size_t cls, std::int64_t index) {
  const auto& c = state.counts(cls);
  for (std::int64_t j = state.lowest(cls); j < static_cast<std::int64_t>(c.size()); ++j) {
    if (index < c[j]) return {static_cast<std::int32_t>(cls), static_cast<std::int32_t>(j + 1)};
    index -= c[j];
  }
  throw std::logic_error("pool index out of range");
}

}  // namespace

Coordinate jlmu_target(const Ranking& ranking, const OccupancyState& state) {
  Coordinate best{0, static_cast<std::int32_t>(state.lowest(0) + 1)};
  for (std::size_t i = 1; i < state.classes(); ++i) {
    const Coordinate c{static_cast<std::int32_t>(i), static_cast<std::int32_t>(state.lowest(i) + 1)};
    if (ranking.outranks(c, best)) best = c;
  }
  return best;
}

Coordinate random_target(const OccupancyState& state, double draw) {
  auto index = pick(draw, state.total_pools());
  for (std::size_t i = 0; i < state.classes(); ++i) {
    if (index < state.pools(i)) return locate(state, i, index);
    index -= state.pools(i);
  }
  throw std::logic_error("pool index out of range");
}

Coordinate fixed_class_target(const OccupancyState& state, std::size_t cls, double draw) {
  if (cls >= state.classes()) throw std::out_of_range("invalid class index " + std::to_string(cls));
  return locate(state, cls, pick(draw, state.pools(cls)));
}

std::int64_t TokenCounts::total_green() const { return std::accumulate(green.begin(), green.end(), std::int64_t{0}); }

SltaThresholds slta_thresholds(Enumeration& enumeration, std::size_t classes, std::int64_t index) {
  if (index < 1) throw std::invalid_argument("learning index must be at least 1");
  const auto r = static_cast<std::size_t>(index);
  SltaThresholds t;
  t.index = index;
  t.boundary = enumeration[r];
  t.previous_class = r > 1 ? enumeration[r - 1].cls : -1;
  t.levels = enumeration.filled_levels(r - 1);
  t.levels.resize(classes, 0);
  return t;
}

SltaThresholds slta_thresholds(const Ranking& ranking, std::int64_t index) {
  Enumeration enumeration(ranking);
  return slta_thresholds(enumeration, ranking.classes(), index);
}

TokenCounts token_counts(const OccupancyState& state, const SltaThresholds& t) {
  TokenCounts tokens;
  tokens.green.resize(state.classes(), 0);
  for (std::size_t i = 0; i < state.classes(); ++i) tokens.green[i] = state.pools_below(i, t.levels[i]);
  tokens.yellow = state.pools_below(t.boundary.cls, t.boundary.level);
  return tokens;
}

Coordinate slta_target(const OccupancyState& state, const SltaThresholds& t, const TokenCounts& tokens,
                       double draw) {
  const auto prev = t.previous_class;
  // Green tokens outside the class of the (r-1)-th slot come first.
  std::int64_t first = 0;
  for (std::size_t i = 0; i < state.classes(); ++i)
    if (static_cast<std::int32_t>(i) != prev) first += tokens.green[i];
  if (first > 0) {
    auto index = pick(draw, first);
    for (std::size_t i = 0; i < state.classes(); ++i) {
      if (static_cast<std::int32_t>(i) == prev) continue;
      if (index < tokens.green[i]) return locate(state, i, index);
      index -= tokens.green[i];
    }
    throw std::logic_error("green token index out of range");
  }
  if (prev >= 0 && tokens.green[prev] > 0) return locate(state, prev, pick(draw, tokens.green[prev]));
  // Without green tokens every yellow pool sits exactly at the boundary.
  if (state.count(t.boundary.cls, t.boundary.level - 1) > 0) return t.boundary;
  return random_target(state, draw);
}

int slta_learn(const SltaThresholds& t, const TokenCounts& tokens, std::int64_t n, double beta) {
  const auto green = tokens.total_green();
  if (t.index > 1 && static_cast<double>(green) >= static_cast<double>(n) * beta && tokens.green[t.previous_class] > 0)
    return -1;
  if (green == 0 && tokens.yellow <= 1) return +1;
  return 0;
}

bool slta_good(const OccupancyState& state, const SltaThresholds& t) {
  for (std::size_t i = 0; i < state.classes(); ++i)
    if (state.pools_below(i, t.levels[i] + 1) == 0) return false;
  return true;
}

SltaPolicy::SltaPolicy(Ranking ranking, double beta)
    : ranking_(std::move(ranking)), enumeration_(ranking_), beta_(beta) {
  if (!(beta_ > 0.0) || beta_ > 1.0) throw std::invalid_argument("SLTA beta must lie in (0, 1]");
}

void SltaPolicy::set_index(std::int64_t index, const OccupancyState& state) {
  thresholds_ = slta_thresholds(enumeration_, ranking_.classes(), index);
  tokens_ = token_counts(state, thresholds_);
}

void SltaPolicy::reset(const OccupancyState& state, std::optional<std::int64_t> learning_index) {
  n_ = state.total_pools();
  set_index(learning_index.value_or(1), state);
}

PolicyDecision SltaPolicy::decide(const OccupancyState& state, double draw) {
  return {slta_target(state, thresholds_, tokens_, draw), slta_learn(thresholds_, tokens_, n_, beta_)};
}

void SltaPolicy::commit(const PolicyDecision& decision, const OccupancyState& state) {
  if (decision.learning_delta != 0) set_index(thresholds_.index + decision.learning_delta, state);
}

void SltaPolicy::observe(std::size_t cls, std::int64_t from, std::int64_t to) {
  const auto limit = thresholds_.levels[cls];
  tokens_.green[cls] += static_cast<std::int64_t>(to < limit) - static_cast<std::int64_t>(from < limit);
  if (static_cast<std::int32_t>(cls) == thresholds_.boundary.cls) {
    const auto top = thresholds_.boundary.level - 1;
    tokens_.yellow += static_cast<std::int64_t>(to <= top) - static_cast<std::int64_t>(from <= top);
  }
}

PolicySpec PolicySpec::parse(const std::string& text) {
  PolicySpec spec;
  if (text == "jlmu") {
    spec.kind = Kind::jlmu;
  } else if (text == "slta") {
    spec.kind = Kind::slta;
  } else if (text == "random") {
    spec.kind = Kind::random;
  } else if (text.rfind("fixed:", 0) == 0) {
    spec.kind = Kind::fixed;
    std::size_t used = 0;
    long cls = 0;
    try {
      cls = std::stol(text.substr(6), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() - 6 || cls < 1)
      throw std::invalid_argument("bad policy '" + text + "': expected fixed:<class> with class >= 1");
    spec.cls = static_cast<std::size_t>(cls - 1);
  } else {
    throw std::invalid_argument("unknown policy '" + text + "'");
  }
  return spec;
}

std::string PolicySpec::to_string() const {
  switch (kind) {
  case Kind::jlmu: return "jlmu";
  case Kind::slta: return "slta";
  case Kind::random: return "random";
  case Kind::fixed: return "fixed:" + std::to_string(cls + 1);
  }
  return "unknown";
}

double default_beta(std::int64_t n) { return 1.0 / std::pow(static_cast<double>(n), 0.45); }

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Ranking& ranking, std::int64_t n) {
  switch (spec.kind) {
  case PolicySpec::Kind::jlmu: return std::make_unique<JlmuPolicy>(ranking);
  case PolicySpec::Kind::slta: return std::make_unique<SltaPolicy>(ranking, spec.beta.value_or(default_beta(n)));
  case PolicySpec::Kind::random: return std::make_unique<RandomPolicy>();
  case PolicySpec::Kind::fixed:
    if (spec.cls >= ranking.classes())
      throw std::invalid_argument("policy " + spec.to_string() + " names a missing class");
    return std::make_unique<FixedClassPolicy>(spec.cls);
  }
  throw std::logic_error("unhandled policy kind");
}

}  // namespace poolsim
