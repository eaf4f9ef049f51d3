#include "poolsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace poolsim {

using nlohmann::json;

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t k) { return path + "/" + std::to_string(k); }

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) throw ConfigError(child(path, key), "unknown field");
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ConfigError(child(path, key), "missing required field");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
  return x;
}

std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

template <typename F>
auto list(const json& v, const std::string& path, F&& element) {
  if (!v.is_array()) throw ConfigError(path, "expected an array");
  std::vector<decltype(element(v, path))> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(element(v[k], child(path, k)));
  return out;
}

template <typename F>
auto non_empty_list(const json& v, const std::string& path, F&& element) {
  auto out = list(v, path, element);
  if (out.empty()) throw ConfigError(path, "must not be empty");
  return out;
}

}  // namespace

std::string to_string(InitMode mode) { return mode == InitMode::empty ? "empty" : "optimal_rounded"; }

InitMode parse_init_mode(const std::string& value) {
  if (value == "empty") return InitMode::empty;
  if (value == "optimal_rounded" || value == "qstar") return InitMode::optimal_rounded;
  throw std::invalid_argument("unknown init mode '" + value + "'");
}

json utility_to_json(const Utility& u) {
  switch (u.kind()) {
    case Utility::Kind::log_quality: return {{"kind", "log_quality"}, {"r", u.resource()}};
    case Utility::Kind::linear: return {{"kind", "linear"}, {"slope", u.slope()}};
    case Utility::Kind::capped_linear: return {{"kind", "capped_linear"}, {"slope", u.slope()}, {"cap", u.cap()}};
    case Utility::Kind::table: return {{"kind", "table"}, {"values", u.values()}};
  }
  throw std::logic_error("unhandled utility kind");
}

Utility utility_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const auto kind = text(require(j, path, "kind"), child(path, "kind"));
  try {
    if (kind == "log_quality") {
      reject_unknown(j, path, {"kind", "r"});
      return Utility::log_quality(number(require(j, path, "r"), child(path, "r")));
    }
    if (kind == "linear") {
      reject_unknown(j, path, {"kind", "slope"});
      return Utility::linear(number(require(j, path, "slope"), child(path, "slope")));
    }
    if (kind == "capped_linear") {
      reject_unknown(j, path, {"kind", "slope", "cap"});
      return Utility::capped_linear(number(require(j, path, "slope"), child(path, "slope")),
                                    number(require(j, path, "cap"), child(path, "cap")));
    }
    if (kind == "table") {
      reject_unknown(j, path, {"kind", "values"});
      return Utility::table(non_empty_list(require(j, path, "values"), child(path, "values"), number));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(child(path, "kind"), "unknown utility kind '" + kind + "'");
}

SystemConfig ExperimentConfig::system(std::int64_t pools, double load) const {
  SystemConfig cfg;
  cfg.n = pools;
  cfg.alpha = alpha;
  cfg.mu = mu;
  cfg.lambda = load * mu;
  cfg.utilities = UtilityFamily(utilities);
  cfg.validate();
  return cfg;
}

RunConfig ExperimentConfig::run(std::uint64_t seed_value, std::uint64_t replication) const {
  RunConfig r;
  r.horizon = horizon;
  r.warmup = warmup;
  r.seed = seed_value;
  r.replication = replication;
  r.init = init;
  r.batches = batches;
  return r;
}

std::vector<PolicySpec> ExperimentConfig::resolved_policies() const {
  auto out = policies;
  for (auto& p : out)
    if (p.kind == PolicySpec::Kind::slta && !p.beta) p.beta = beta;
  return out;
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("", "expected a JSON object");
  reject_unknown(j, "", {"schema", "n", "alpha", "mu", "rho", "lambda", "utilities", "policies", "beta", "run",
                         "sweep", "outputs"});
  const auto schema = integer(require(j, "", "schema"), "/schema");
  if (schema != config_schema)
    throw ConfigError("/schema", "unsupported schema version " + std::to_string(schema));

  ExperimentConfig cfg;
  cfg.n = integer(require(j, "", "n"), "/n");
  if (cfg.n < 1) throw ConfigError("/n", "must be at least 1");
  cfg.alpha = non_empty_list(require(j, "", "alpha"), "/alpha", number);
  double alpha_sum = 0.0;
  for (std::size_t i = 0; i < cfg.alpha.size(); ++i) {
    if (!(cfg.alpha[i] > 0.0) || cfg.alpha[i] > 1.0) throw ConfigError(child("/alpha", i), "must lie in (0, 1]");
    alpha_sum += cfg.alpha[i];
  }
  if (std::abs(alpha_sum - 1.0) > 1e-9) throw ConfigError("/alpha", "class fractions must sum to 1");
  if (j.contains("mu")) cfg.mu = number(j["mu"], "/mu");
  if (!(cfg.mu > 0.0)) throw ConfigError("/mu", "must be positive");

  const bool has_rho = j.contains("rho");
  const bool has_lambda = j.contains("lambda");
  if (has_rho == has_lambda) throw ConfigError("/rho", "give exactly one of rho and lambda");
  if (has_rho) cfg.rho = number(j["rho"], "/rho");
  if (has_lambda) cfg.lambda = number(j["lambda"], "/lambda");
  if (!(cfg.offered_load() >= 0.0)) throw ConfigError(has_rho ? "/rho" : "/lambda", "must be non-negative");

  const auto& utilities = require(j, "", "utilities");
  if (!utilities.is_array() || utilities.empty()) throw ConfigError("/utilities", "expected a non-empty array");
  for (std::size_t k = 0; k < utilities.size(); ++k)
    cfg.utilities.push_back(utility_from_json(utilities[k], child("/utilities", k)));
  if (cfg.utilities.size() != cfg.alpha.size())
    throw ConfigError("/utilities", "expected one utility per class (" + std::to_string(cfg.alpha.size()) + ")");

  if (j.contains("policies")) {
    cfg.policies = non_empty_list(j["policies"], "/policies", [](const json& v, const std::string& path) {
      try {
        return PolicySpec::parse(text(v, path));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
      }
    });
    for (std::size_t k = 0; k < cfg.policies.size(); ++k)
      if (cfg.policies[k].kind == PolicySpec::Kind::fixed && cfg.policies[k].cls >= cfg.alpha.size())
        throw ConfigError(child("/policies", k), "class out of range");
  }
  if (j.contains("beta") && !j["beta"].is_null()) {
    cfg.beta = number(j["beta"], "/beta");
    if (!(*cfg.beta > 0.0 && *cfg.beta <= 1.0)) throw ConfigError("/beta", "must lie in (0, 1]");
  }

  if (j.contains("run")) {
    const auto& run = j["run"];
    if (!run.is_object()) throw ConfigError("/run", "expected an object");
    reject_unknown(run, "/run", {"T", "warmup", "seed", "reps", "init", "batches"});
    if (run.contains("T")) cfg.horizon = number(run["T"], "/run/T");
    if (!(cfg.horizon > 0.0)) throw ConfigError("/run/T", "must be positive");
    if (run.contains("warmup") && !run["warmup"].is_null()) {
      cfg.warmup = number(run["warmup"], "/run/warmup");
      if (!(*cfg.warmup >= 0.0 && *cfg.warmup < cfg.horizon)) throw ConfigError("/run/warmup", "must lie in [0, T)");
    }
    if (run.contains("seed")) cfg.seed = unsigned_integer(run["seed"], "/run/seed");
    if (run.contains("reps")) cfg.reps = unsigned_integer(run["reps"], "/run/reps");
    if (cfg.reps < 1) throw ConfigError("/run/reps", "must be at least 1");
    if (run.contains("init")) {
      try {
        cfg.init = parse_init_mode(text(run["init"], "/run/init"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("/run/init", e.what());
      }
    }
    if (run.contains("batches")) cfg.batches = unsigned_integer(run["batches"], "/run/batches");
    if (cfg.batches < 1) throw ConfigError("/run/batches", "must be at least 1");
  }

  cfg.sweep = {{cfg.n}, {cfg.offered_load()}, {cfg.seed}};
  if (j.contains("sweep")) {
    const auto& sweep = j["sweep"];
    if (!sweep.is_object()) throw ConfigError("/sweep", "expected an object");
    reject_unknown(sweep, "/sweep", {"n", "rho", "seeds"});
    if (sweep.contains("n")) cfg.sweep.n = non_empty_list(sweep["n"], "/sweep/n", integer);
    if (sweep.contains("rho")) cfg.sweep.rho = non_empty_list(sweep["rho"], "/sweep/rho", number);
    if (sweep.contains("seeds")) cfg.sweep.seeds = non_empty_list(sweep["seeds"], "/sweep/seeds", unsigned_integer);
  }

  if (j.contains("outputs")) {
    const auto& outputs = j["outputs"];
    if (!outputs.is_object()) throw ConfigError("/outputs", "expected an object");
    for (const auto& [key, value] : outputs.items()) cfg.outputs[key] = text(value, child("/outputs", key));
  }

  for (std::size_t a = 0; a < cfg.sweep.n.size(); ++a)
    for (std::size_t b = 0; b < cfg.sweep.rho.size(); ++b) {
      if (!(cfg.sweep.rho[b] >= 0.0)) throw ConfigError(child("/sweep/rho", b), "must be non-negative");
      try {
        (void)cfg.system(cfg.sweep.n[a], cfg.sweep.rho[b]);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(j.contains("sweep") ? child("/sweep/n", a) : "/n", e.what());
      }
    }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema"] = config_schema;
  j["n"] = cfg.n;
  j["alpha"] = cfg.alpha;
  j["mu"] = cfg.mu;
  if (cfg.rho) j["rho"] = *cfg.rho;
  if (cfg.lambda) j["lambda"] = *cfg.lambda;
  j["utilities"] = json::array();
  for (const auto& u : cfg.utilities) j["utilities"].push_back(utility_to_json(u));
  j["policies"] = json::array();
  for (const auto& p : cfg.policies) j["policies"].push_back(p.to_string());
  if (cfg.beta) j["beta"] = *cfg.beta;
  json run{{"T", cfg.horizon}, {"seed", cfg.seed}, {"reps", cfg.reps}, {"init", to_string(cfg.init)},
           {"batches", cfg.batches}};
  if (cfg.warmup) run["warmup"] = *cfg.warmup;
  j["run"] = run;
  j["sweep"] = {{"n", cfg.sweep.n}, {"rho", cfg.sweep.rho}, {"seeds", cfg.sweep.seeds}};
  if (!cfg.outputs.empty()) j["outputs"] = cfg.outputs;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace poolsim
