#ifndef DPCOOP_GAME_HPP
#define DPCOOP_GAME_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace dpcoop {

// Raised for any invalid model or run parameter. field() names the offending key
// so front ends can report it.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)), reason_(what) {}
  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

using Action = int;  // 0 or 1

// Row-player payoffs of a symmetric 2x2 game, indexed [own][opponent].
struct PayoffTable {
  std::array<std::array<double, 2>, 2> payoff{};

  double operator()(Action own, Action opp) const { return payoff[own][opp]; }
  double min() const;
  double max() const;
  bool operator==(const PayoffTable&) const = default;
};

inline double PayoffTable::min() const {
  double m = payoff[0][0];
  for (const auto& row : payoff)
    for (double v : row) m = v < m ? v : m;
  return m;
}

inline double PayoffTable::max() const {
  double m = payoff[0][0];
  for (const auto& row : payoff)
    for (double v : row) m = v > m ? v : m;
  return m;
}

enum class ScenarioKind { PDMixed, DoubleOneShot, DoubleRepeated, Custom };

inline std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::PDMixed: return "PDMixed";
    case ScenarioKind::DoubleOneShot: return "DoubleOneShot";
    case ScenarioKind::DoubleRepeated: return "DoubleRepeated";
    case ScenarioKind::Custom: return "Custom";
  }
  return "?";
}

inline ScenarioKind scenario_kind_from_string(const std::string& s) {
  if (s == "PDMixed") return ScenarioKind::PDMixed;
  if (s == "DoubleOneShot") return ScenarioKind::DoubleOneShot;
  if (s == "DoubleRepeated") return ScenarioKind::DoubleRepeated;
  if (s == "Custom") return ScenarioKind::Custom;
  throw ConfigError("scenario", "unknown scenario kind '" + s + "'");
}

// Two stage games; game1 is drawn with probability p_game1 for each pair.
struct Scenario {
  ScenarioKind kind = ScenarioKind::PDMixed;
  PayoffTable game0;
  PayoffTable game1;
  double p_game1 = 0.0;
  std::array<std::string, 2> action_labels{"C", "D"};
  std::optional<Action> cooperative_action;
  // Generating parameters of canonical scenarios; unused for Custom.
  double b = 0.0;
  double c = 0.0;

  const PayoffTable& game(int index) const { return index == 0 ? game0 : game1; }
  double min_payoff() const { return std::min(game0.min(), game1.min()); }
  double max_payoff() const { return std::max(game0.max(), game1.max()); }
};

inline bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

// PDMixed: game0 = one-shot PD, game1 = repeated PD (actions C, D).
// DoubleOneShot: game0 = one-shot PD with S dominant, game1 = its action-permuted twin.
// DoubleRepeated: game0 = repeated PD with S dominant, game1 = its action-permuted twin.
inline Scenario canonical_scenario(ScenarioKind kind, double b, double c, double p) {
  if (!(c > 0.0)) throw ConfigError("c", "must be > 0");
  if (!(b > c)) throw ConfigError("b", "must be > c");
  if (!is_probability(p)) throw ConfigError("p", "must lie in [0,1]");
  const double d = b + c;
  Scenario s;
  s.kind = kind;
  s.p_game1 = p;
  s.b = b;
  s.c = c;
  switch (kind) {
    case ScenarioKind::PDMixed:
      s.game0.payoff = {{{b, 0.0}, {d, c}}};
      s.game1.payoff = {{{b, c}, {c, c}}};
      s.action_labels = {"C", "D"};
      s.cooperative_action = 0;
      break;
    case ScenarioKind::DoubleOneShot:
      s.game0.payoff = {{{b, 0.0}, {d, c}}};
      s.game1.payoff = {{{c, d}, {0.0, b}}};
      s.action_labels = {"F", "S"};
      break;
    case ScenarioKind::DoubleRepeated:
      s.game0.payoff = {{{c, c}, {c, b}}};
      s.game1.payoff = {{{b, c}, {c, c}}};
      s.action_labels = {"F", "S"};
      break;
    case ScenarioKind::Custom:
      throw ConfigError("scenario", "Custom scenarios have no canonical tables");
  }
  return s;
}

// Swap the two action labels of a table: entry [a][o] moves to [1-a][1-o].
inline PayoffTable permute_actions(const PayoffTable& t) {
  PayoffTable out;
  for (int a = 0; a < 2; ++a)
    for (int o = 0; o < 2; ++o) out.payoff[1 - a][1 - o] = t.payoff[a][o];
  return out;
}

struct Dominance {
  Action action = 0;
  bool strict = false;
  bool operator==(const Dominance&) const = default;
};

// The action that does at least as well against both opponent actions and
// strictly better against at least one. Identical rows yield none.
inline std::optional<Dominance> dominant_action(const PayoffTable& g) {
  for (Action a = 0; a < 2; ++a) {
    const Action other = 1 - a;
    bool weak = true, strict = true, some = false;
    for (Action o = 0; o < 2; ++o) {
      const double mine = g(a, o), theirs = g(other, o);
      weak = weak && mine >= theirs;
      strict = strict && mine > theirs;
      some = some || mine > theirs;
    }
    if (weak && some) return Dominance{a, strict};
  }
  return std::nullopt;
}

enum class DeliberationRule { Prescribed, Learned };

inline std::string to_string(DeliberationRule r) {
  return r == DeliberationRule::Prescribed ? "Prescribed" : "Learned";
}

inline DeliberationRule deliberation_rule_from_string(const std::string& s) {
  if (s == "Prescribed") return DeliberationRule::Prescribed;
  if (s == "Learned") return DeliberationRule::Learned;
  throw ConfigError("deliberation_rule", "expected Prescribed or Learned, got '" + s + "'");
}

// Per-action reward statistics. The optional deliberative bank holds one
// statistic per (game, action), used only by the Learned deliberation rule.
struct AgentMemory {
  using Slots = std::array<double, 2>;
  Slots r_bar{0.0, 0.0};
  std::optional<std::array<Slots, 2>> deliberative;

  static AgentMemory initial(double value, bool with_deliberative) {
    AgentMemory m;
    m.r_bar = {value, value};
    if (with_deliberative) m.deliberative = std::array<Slots, 2>{Slots{value, value}, Slots{value, value}};
    return m;
  }
};

struct SimConfig {
  int M = 500;
  int T = 5000;
  double K = 0.5;
  double A = 0.0;
  double alpha = 0.5;
  Scenario scenario = canonical_scenario(ScenarioKind::PDMixed, 4.0, 1.0, 0.5);
  DeliberationRule deliberation_rule = DeliberationRule::Prescribed;
  std::uint64_t seed = 1;
  double initial_memory = 0.0;
  double tie_epsilon = 1e-9;
  int burn_in = 0;

  void validate() const;
};

inline void validate_table(const PayoffTable& t, const std::string& field) {
  for (const auto& row : t.payoff)
    for (double v : row)
      if (!(v >= 0.0)) throw ConfigError(field, "payoffs must be non-negative");
}

inline void SimConfig::validate() const {
  if (M < 2 || M % 2 != 0) throw ConfigError("M", "population size must be a positive even integer");
  if (T < 1) throw ConfigError("T", "number of periods must be positive");
  if (!is_probability(K)) throw ConfigError("K", "must lie in [0,1]");
  if (!is_probability(A)) throw ConfigError("A", "must lie in [0,1]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must lie in (0,1]");
  if (!is_probability(scenario.p_game1)) throw ConfigError("p", "must lie in [0,1]");
  if (!(tie_epsilon >= 0.0)) throw ConfigError("tie_epsilon", "must be non-negative");
  if (burn_in < 0 || burn_in >= T) throw ConfigError("burn_in", "must lie in [0,T)");
  validate_table(scenario.game0, "game0");
  validate_table(scenario.game1, "game1");
  if (deliberation_rule == DeliberationRule::Prescribed) {
    for (int g = 0; g < 2; ++g)
      if (!dominant_action(scenario.game(g)))
        throw ConfigError("deliberation_rule",
                          "Prescribed deliberation needs a dominant action in game" + std::to_string(g));
  }
}

}  // namespace dpcoop

#endif  // DPCOOP_GAME_HPP
