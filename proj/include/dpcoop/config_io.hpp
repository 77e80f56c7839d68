#ifndef DPCOOP_CONFIG_IO_HPP
#define DPCOOP_CONFIG_IO_HPP

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpcoop/game.hpp"

namespace dpcoop {

using Json = nlohmann::ordered_json;

namespace detail {

inline double get_number(const Json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "expected a number");
  return j.get<double>();
}

inline long long get_integer(const Json& j, const std::string& key) {
  const double v = get_number(j, key);
  if (std::floor(v) != v) throw ConfigError(key, "expected an integer");
  return static_cast<long long>(v);
}

inline std::string get_string(const Json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError(key, "expected a string");
  return j.get<std::string>();
}

inline PayoffTable get_table(const Json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(key, "expected [[own0 vs 0, own0 vs 1], [own1 vs 0, own1 vs 1]]");
  PayoffTable t;
  for (int a = 0; a < 2; ++a) {
    if (!j[a].is_array() || j[a].size() != 2) throw ConfigError(key, "each row needs two payoffs");
    for (int o = 0; o < 2; ++o) t.payoff[a][o] = get_number(j[a][o], key);
  }
  return t;
}

inline Json table_json(const PayoffTable& t) {
  return Json::array({Json::array({t.payoff[0][0], t.payoff[0][1]}), Json::array({t.payoff[1][0], t.payoff[1][1]})});
}

}  // namespace detail

// Keys of the flat run-configuration block.
inline const std::set<std::string>& sim_config_keys() {
  static const std::set<std::string> keys{"M",    "T",    "K",     "A",     "alpha",  "scenario",
                                          "b",    "c",    "p",     "game0", "game1",  "action_labels",
                                          "cooperative_action", "deliberation_rule", "seed",
                                          "initial_memory",     "tie_epsilon",       "burn_in"};
  return keys;
}

// Reads the run-configuration keys of j (other keys are ignored here; the
// experiment parser rejects unknown ones). Missing keys keep their defaults.
inline SimConfig sim_config_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config", "expected an object");
  SimConfig cfg;
  auto num = [&](const char* key, double fallback) { return j.contains(key) ? get_number(j[key], key) : fallback; };
  auto integer = [&](const char* key, long long fallback) {
    return j.contains(key) ? get_integer(j[key], key) : fallback;
  };

  cfg.M = static_cast<int>(integer("M", cfg.M));
  cfg.T = static_cast<int>(integer("T", cfg.T));
  cfg.K = num("K", cfg.K);
  cfg.A = num("A", cfg.A);
  cfg.alpha = num("alpha", cfg.alpha);
  cfg.initial_memory = num("initial_memory", cfg.initial_memory);
  cfg.tie_epsilon = num("tie_epsilon", cfg.tie_epsilon);
  cfg.burn_in = static_cast<int>(integer("burn_in", cfg.burn_in));
  if (j.contains("seed")) {
    const long long s = get_integer(j["seed"], "seed");
    if (s < 0) throw ConfigError("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("deliberation_rule"))
    cfg.deliberation_rule = deliberation_rule_from_string(get_string(j["deliberation_rule"], "deliberation_rule"));

  const ScenarioKind kind =
      j.contains("scenario") ? scenario_kind_from_string(get_string(j["scenario"], "scenario")) : ScenarioKind::PDMixed;
  const double p = num("p", 0.5);
  if (kind == ScenarioKind::Custom) {
    if (!j.contains("game0")) throw ConfigError("game0", "required for Custom scenarios");
    if (!j.contains("game1")) throw ConfigError("game1", "required for Custom scenarios");
    Scenario s;
    s.kind = kind;
    s.game0 = get_table(j["game0"], "game0");
    s.game1 = get_table(j["game1"], "game1");
    s.p_game1 = p;
    s.action_labels = {"a0", "a1"};
    if (j.contains("action_labels")) {
      const auto& l = j["action_labels"];
      if (!l.is_array() || l.size() != 2) throw ConfigError("action_labels", "expected two names");
      s.action_labels = {get_string(l[0], "action_labels"), get_string(l[1], "action_labels")};
    }
    if (j.contains("cooperative_action") && !j["cooperative_action"].is_null()) {
      const long long a = get_integer(j["cooperative_action"], "cooperative_action");
      if (a != 0 && a != 1) throw ConfigError("cooperative_action", "must be 0 or 1");
      s.cooperative_action = static_cast<Action>(a);
    }
    cfg.scenario = s;
  } else {
    for (const char* key : {"game0", "game1", "action_labels", "cooperative_action"})
      if (j.contains(key)) throw ConfigError(key, "only allowed with scenario = Custom");
    cfg.scenario = canonical_scenario(kind, num("b", 4.0), num("c", 1.0), p);
  }
  return cfg;
}

inline Json sim_config_to_json(const SimConfig& cfg) {
  Json j;
  j["M"] = cfg.M;
  j["T"] = cfg.T;
  j["K"] = cfg.K;
  j["A"] = cfg.A;
  j["alpha"] = cfg.alpha;
  j["scenario"] = to_string(cfg.scenario.kind);
  if (cfg.scenario.kind == ScenarioKind::Custom) {
    j["game0"] = detail::table_json(cfg.scenario.game0);
    j["game1"] = detail::table_json(cfg.scenario.game1);
    j["action_labels"] = Json::array({cfg.scenario.action_labels[0], cfg.scenario.action_labels[1]});
    if (cfg.scenario.cooperative_action) j["cooperative_action"] = *cfg.scenario.cooperative_action;
  } else {
    j["b"] = cfg.scenario.b;
    j["c"] = cfg.scenario.c;
  }
  j["p"] = cfg.scenario.p_game1;
  j["deliberation_rule"] = to_string(cfg.deliberation_rule);
  j["seed"] = cfg.seed;
  j["initial_memory"] = cfg.initial_memory;
  j["tie_epsilon"] = cfg.tie_epsilon;
  j["burn_in"] = cfg.burn_in;
  return j;
}

// Parses "path.to.key=value". The value is read as JSON when it parses,
// otherwise as a plain string, so `scenario=DoubleOneShot` and `axes.A=[0,1]`
// both work.
inline void apply_override(Json& spec, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &spec;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(path, "empty key in override path");
    if (!node->is_object()) throw ConfigError(path, "cannot descend into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

inline Json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  Json j = Json::parse(ss.str(), nullptr, false, true);
  if (j.is_discarded()) throw ConfigError("config", "'" + path + "' is not valid JSON");
  if (!j.is_object()) throw ConfigError("config", "top level of '" + path + "' must be an object");
  return j;
}

}  // namespace dpcoop

#endif  // DPCOOP_CONFIG_IO_HPP
