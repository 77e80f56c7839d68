#ifndef DPCOOP_ENGINE_HPP
#define DPCOOP_ENGINE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "dpcoop/game.hpp"
#include "dpcoop/matching.hpp"
#include "dpcoop/parallel.hpp"
#include "dpcoop/policy.hpp"
#include "dpcoop/random.hpp"

namespace dpcoop {

struct PeriodRecord {
  std::array<std::uint32_t, 2> intuitive_plays{};                       // [action]
  std::array<std::array<std::uint32_t, 2>, 2> deliberative_plays{};     // [game][action]
  double total_reward = 0.0;

  std::uint32_t intuitive_decisions() const { return intuitive_plays[0] + intuitive_plays[1]; }
  std::uint32_t deliberative_decisions() const {
    return deliberative_plays[0][0] + deliberative_plays[0][1] + deliberative_plays[1][0] + deliberative_plays[1][1];
  }
  std::uint32_t decisions() const { return intuitive_decisions() + deliberative_decisions(); }
};

namespace detail {
inline double ratio(double num, double den) {
  return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}
}  // namespace detail

// Pooled counts over a window of periods. Rates are per decision; a rate with
// no decisions behind it is NaN.
struct Aggregate {
  std::array<std::uint64_t, 2> intuitive_plays{};
  std::array<std::array<std::uint64_t, 2>, 2> deliberative_plays{};
  double total_reward = 0.0;
  std::uint64_t periods = 0;

  void add(const PeriodRecord& r) {
    for (int a = 0; a < 2; ++a) {
      intuitive_plays[a] += r.intuitive_plays[a];
      for (int g = 0; g < 2; ++g) deliberative_plays[g][a] += r.deliberative_plays[g][a];
    }
    total_reward += r.total_reward;
    ++periods;
  }

  std::uint64_t intuitive_decisions() const { return intuitive_plays[0] + intuitive_plays[1]; }
  std::uint64_t deliberative_in_game(int g) const { return deliberative_plays[g][0] + deliberative_plays[g][1]; }
  std::uint64_t deliberative_decisions() const { return deliberative_in_game(0) + deliberative_in_game(1); }
  std::uint64_t decisions() const { return intuitive_decisions() + deliberative_decisions(); }

  double intuitive_rate(Action a) const {
    return detail::ratio(static_cast<double>(intuitive_plays[a]), static_cast<double>(intuitive_decisions()));
  }
  double deliberative_rate(Action a) const {
    return detail::ratio(static_cast<double>(deliberative_plays[0][a] + deliberative_plays[1][a]),
                         static_cast<double>(deliberative_decisions()));
  }
  double deliberative_rate_in_game(int g, Action a) const {
    return detail::ratio(static_cast<double>(deliberative_plays[g][a]), static_cast<double>(deliberative_in_game(g)));
  }
  double total_rate(Action a) const {
    return detail::ratio(static_cast<double>(intuitive_plays[a] + deliberative_plays[0][a] + deliberative_plays[1][a]),
                         static_cast<double>(decisions()));
  }
  double mean_reward() const { return detail::ratio(total_reward, static_cast<double>(decisions())); }
};

inline Aggregate summarize(const std::vector<PeriodRecord>& periods, std::size_t first, std::size_t last) {
  Aggregate agg;
  for (std::size_t t = first; t < last && t < periods.size(); ++t) agg.add(periods[t]);
  return agg;
}

struct Metric {
  std::string name;
  double value;
};

// Fixed metric order shared by every CSV writer. Cooperation rates are NaN for
// scenarios without a cooperative action.
inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{
      "intuitive_coop_rate",   "deliberative_coop_rate", "total_coop_rate",
      "intuitive_rate_a0",     "intuitive_rate_a1",      "deliberative_rate_a0",
      "deliberative_rate_g0_a0", "deliberative_rate_g1_a0", "mean_reward"};
  return names;
}

inline std::vector<double> metric_values(const Aggregate& agg, std::optional<Action> coop) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {coop ? agg.intuitive_rate(*coop) : nan,
          coop ? agg.deliberative_rate(*coop) : nan,
          coop ? agg.total_rate(*coop) : nan,
          agg.intuitive_rate(0),
          agg.intuitive_rate(1),
          agg.deliberative_rate(0),
          agg.deliberative_rate_in_game(0, 0),
          agg.deliberative_rate_in_game(1, 0),
          agg.mean_reward()};
}

inline std::size_t metric_index(const std::string& name) {
  const auto& names = metric_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw ConfigError("metric", "unknown metric '" + name + "'");
}

struct MetricsSeries {
  int M = 0;
  std::optional<Action> cooperative_action;
  std::vector<PeriodRecord> periods;
  Aggregate aggregate;

  std::vector<double> values() const { return metric_values(aggregate, cooperative_action); }
  Aggregate window(std::size_t first, std::size_t last) const { return summarize(periods, first, last); }
};

// One simulation: every period re-pairs the population, then per pair draws the
// game and the two modes, lets both agents choose, pays them from the drawn
// table and applies both memory updates.
inline MetricsSeries run(const SimConfig& cfg) {
  cfg.validate();
  const Scenario& sc = cfg.scenario;
  const LearningParams params{cfg.alpha, cfg.tie_epsilon, cfg.deliberation_rule};
  const bool learned = cfg.deliberation_rule == DeliberationRule::Learned;
  std::array<Action, 2> best_reply{0, 0};
  if (!learned)
    for (int g = 0; g < 2; ++g) best_reply[g] = prescribed_deliberation(sc, g);

  Rng rng(cfg.seed);
  std::vector<AgentMemory> agents(cfg.M, AgentMemory::initial(cfg.initial_memory, learned));
  std::vector<int> order(cfg.M);
  std::iota(order.begin(), order.end(), 0);

  MetricsSeries out;
  out.M = cfg.M;
  out.cooperative_action = sc.cooperative_action;
  out.periods.reserve(cfg.T);

  auto choose = [&](const AgentMemory& m, CognitiveMode mode, int g) -> Action {
    if (mode == CognitiveMode::Intuition) return intuitive_choice(m, params, rng);
    return learned ? learned_deliberation(m, g, params, rng) : best_reply[g];
  };

  for (int t = 0; t < cfg.T; ++t) {
    shuffle_population(order, rng);
    PeriodRecord rec;
    for (int k = 0; k < cfg.M; k += 2) {
      AgentMemory& first = agents[order[k]];
      AgentMemory& second = agents[order[k + 1]];
      const int g = draw_game(sc.p_game1, rng);
      const auto [mode1, mode2] = draw_modes(cfg.K, cfg.A, rng);
      const Action a1 = choose(first, mode1, g);
      const Action a2 = choose(second, mode2, g);
      const PayoffTable& table = sc.game(g);
      const double r1 = table(a1, a2);
      const double r2 = table(a2, a1);
      update_memory_in_place(first, a1, r1, params, {mode1, g});
      update_memory_in_place(second, a2, r2, params, {mode2, g});
      for (auto [mode, a] : {std::pair{mode1, a1}, std::pair{mode2, a2}}) {
        if (mode == CognitiveMode::Intuition)
          ++rec.intuitive_plays[a];
        else
          ++rec.deliberative_plays[g][a];
      }
      rec.total_reward += r1 + r2;
    }
    out.periods.push_back(rec);
  }
  out.aggregate = summarize(out.periods, static_cast<std::size_t>(cfg.burn_in), out.periods.size());
  return out;
}

struct MetricStat {
  std::string name;
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// Sample mean and standard error (sample sd / sqrt(n)); SE is 0 for n = 1.
inline MetricStat mean_se(std::string name, const std::vector<double>& xs) {
  MetricStat s{std::move(name), 0.0, 0.0, xs.size()};
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
  }
  return s;
}

struct ReplicationOptions {
  unsigned threads = 0;
  bool keep_periods = false;
};

struct Replications {
  std::vector<MetricsSeries> runs;  // runs[i] used seed base + i

  std::vector<MetricStat> stats() const {
    std::vector<MetricStat> out;
    const auto& names = metric_names();
    std::vector<std::vector<double>> columns(names.size());
    for (const auto& r : runs) {
      const auto v = r.values();
      for (std::size_t m = 0; m < v.size(); ++m) columns[m].push_back(v[m]);
    }
    for (std::size_t m = 0; m < names.size(); ++m) out.push_back(mean_se(names[m], columns[m]));
    return out;
  }

  MetricStat stat(const std::string& name) const { return stats()[metric_index(name)]; }
};

inline Replications run_replications(const SimConfig& cfg, int n_seeds, ReplicationOptions opts = {}) {
  if (n_seeds < 1) throw ConfigError("n_seeds", "must be at least 1");
  cfg.validate();
  Replications reps;
  reps.runs = parallel_map(
      static_cast<std::size_t>(n_seeds),
      [&](std::size_t i) {
        SimConfig c = cfg;
        c.seed = cfg.seed + i;
        MetricsSeries s = run(c);
        if (!opts.keep_periods) {
          s.periods.clear();
          s.periods.shrink_to_fit();
        }
        return s;
      },
      opts.threads);
  return reps;
}

}  // namespace dpcoop

#endif  // DPCOOP_ENGINE_HPP
