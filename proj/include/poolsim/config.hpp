#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "poolsim/model.hpp"
#include "poolsim/policies.hpp"
#include "poolsim/sim.hpp"

namespace poolsim {

inline constexpr int config_schema = 1;

/// Invalid experiment description; `field` is a JSON pointer to the culprit.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

struct SweepAxes {
  std::vector<std::int64_t> n;
  std::vector<double> rho;
  std::vector<std::uint64_t> seeds;

  friend bool operator==(const SweepAxes&, const SweepAxes&) = default;
};

struct ExperimentConfig {
  std::int64_t n = 1;
  std::vector<double> alpha;
  double mu = 1.0;
  /// Exactly one of the two is set.
  std::optional<double> rho;
  std::optional<double> lambda;
  std::vector<Utility> utilities;
  std::vector<PolicySpec> policies{PolicySpec{}};
  /// SLTA step parameter; 1 / n^0.45 when absent.
  std::optional<double> beta;

  double horizon = 180.0;
  std::optional<double> warmup;
  std::uint64_t seed = 1;
  std::size_t reps = 1;
  InitMode init = InitMode::empty;
  std::size_t batches = 20;

  /// Filled from n, rho and seed when not given.
  SweepAxes sweep;
  std::map<std::string, std::string> outputs;

  double offered_load() const { return rho ? *rho : *lambda / mu; }

  /// System for one sweep cell.
  SystemConfig system(std::int64_t pools, double load) const;
  SystemConfig system() const { return system(n, offered_load()); }

  RunConfig run(std::uint64_t seed_value, std::uint64_t replication) const;

  /// Policies with the configured beta applied to SLTA entries.
  std::vector<PolicySpec> resolved_policies() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::json utility_to_json(const Utility& u);
Utility utility_from_json(const nlohmann::json& j, const std::string& path = "/utilities");

ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Reads and parses a JSON file; syntax errors report the byte offset.
ExperimentConfig load_config(const std::filesystem::path& path);

std::string to_string(InitMode mode);
InitMode parse_init_mode(const std::string& text);

}  // namespace poolsim
