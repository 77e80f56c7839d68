#ifndef DPCOOP_EXPERIMENTS_HPP
#define DPCOOP_EXPERIMENTS_HPP

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dpcoop/config_io.hpp"
#include "dpcoop/csv.hpp"
#include "dpcoop/engine.hpp"
#include "dpcoop/markov.hpp"
#include "dpcoop/parallel.hpp"
#include "dpcoop/sources.hpp"

namespace dpcoop::experiments {

enum class Command { Simulate, Sweep, Markov, Sources, OptimalK };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Sweep: return "sweep";
    case Command::Markov: return "markov";
    case Command::Sources: return "sources";
    case Command::OptimalK: return "optimal-k";
  }
  return "?";
}

inline Command command_from_string(const std::string& s) {
  if (s == "simulate") return Command::Simulate;
  if (s == "sweep") return Command::Sweep;
  if (s == "markov") return Command::Markov;
  if (s == "sources") return Command::Sources;
  if (s == "optimal-k") return Command::OptimalK;
  throw ConfigError("command", "unknown command '" + s + "'");
}

struct Axis {
  std::string name;
  std::vector<Json> values;
};

struct MarkovSpec {
  std::vector<double> K;
  std::vector<double> p;
  int grid_size = 1000;
  double tol = 1e-9;
};

struct SourcesSpec {
  bool state = true;
  std::vector<double> pA, kA, kB;
  bool type = true;
  std::vector<double> q, a_types, kX, kY;
};

struct OptimalKSpec {
  std::vector<double> p;
  std::vector<double> A;
  std::vector<double> K;
  std::string metric = "total_coop_rate";
};

struct ExperimentSpec {
  Json base = Json::object();  // run-configuration keys only
  SimConfig config;
  std::vector<Axis> axes;
  int n_seeds = 1;
  unsigned threads = 0;
  std::string output;
  bool svg = false;
  MarkovSpec markov;
  SourcesSpec sources;
  OptimalKSpec optimal_k;
};

// {first/denom, ..., last/denom}; each value is the double nearest the exact fraction.
inline std::vector<double> fractions(int first, int last, int denom) {
  std::vector<double> v;
  for (int k = first; k <= last; ++k) v.push_back(static_cast<double>(k) / denom);
  return v;
}

namespace detail {

inline const std::set<std::string>& sweepable_keys() {
  static const std::set<std::string> keys{"M", "T", "K", "A", "alpha", "scenario", "b", "c", "p",
                                          "deliberation_rule", "initial_memory", "tie_epsilon", "burn_in"};
  return keys;
}

inline std::vector<double> number_list(const Json& j, const std::string& key, bool probability = false) {
  if (!j.is_array() || j.empty()) throw ConfigError(key, "expected a non-empty list of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    const double x = dpcoop::detail::get_number(v, key);
    if (probability && !is_probability(x)) throw ConfigError(key, "values must lie in [0,1]");
    out.push_back(x);
  }
  return out;
}

inline void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
}

}  // namespace detail

inline ExperimentSpec parse_spec(const Json& j) {
  using detail::number_list;
  if (!j.is_object()) throw ConfigError("config", "expected an object");
  std::set<std::string> allowed = sim_config_keys();
  allowed.insert({"command", "n_seeds", "threads", "output", "svg", "axes", "markov", "sources", "optimal_k"});
  detail::reject_unknown(j, allowed, "");

  ExperimentSpec spec;
  for (const auto& [key, value] : j.items())
    if (sim_config_keys().count(key)) spec.base[key] = value;
  spec.config = sim_config_from_json(spec.base);
  spec.config.validate();

  if (j.contains("n_seeds")) {
    const auto n = dpcoop::detail::get_integer(j["n_seeds"], "n_seeds");
    if (n < 1) throw ConfigError("n_seeds", "must be at least 1");
    spec.n_seeds = static_cast<int>(n);
  }
  if (j.contains("threads")) {
    const auto n = dpcoop::detail::get_integer(j["threads"], "threads");
    if (n < 0) throw ConfigError("threads", "must be non-negative");
    spec.threads = static_cast<unsigned>(n);
  }
  if (j.contains("output")) spec.output = dpcoop::detail::get_string(j["output"], "output");
  if (j.contains("svg")) {
    if (!j["svg"].is_boolean()) throw ConfigError("svg", "expected true or false");
    spec.svg = j["svg"].get<bool>();
  }

  if (j.contains("axes")) {
    const Json& axes = j["axes"];
    if (!axes.is_object()) throw ConfigError("axes", "expected an object of name -> list of values");
    for (const auto& [name, values] : axes.items()) {
      if (!detail::sweepable_keys().count(name)) throw ConfigError("axes." + name, "not a sweepable field");
      if (!values.is_array() || values.empty()) throw ConfigError("axes." + name, "expected a non-empty list");
      Axis axis{name, {}};
      for (const auto& v : values) {
        Json probe = spec.base;
        probe[name] = v;
        try {
          sim_config_from_json(probe).validate();
        } catch (const ConfigError& e) {
          throw ConfigError("axes." + name, e.reason());
        }
        axis.values.push_back(v);
      }
      spec.axes.push_back(std::move(axis));
    }
  }

  spec.markov.K = {spec.config.K};
  spec.markov.p = {spec.config.scenario.p_game1};
  if (j.contains("markov")) {
    const Json& m = j["markov"];
    detail::reject_unknown(m, {"K", "p", "grid_size", "tol"}, "markov");
    if (m.contains("K")) spec.markov.K = number_list(m["K"], "markov.K", true);
    if (m.contains("p")) spec.markov.p = number_list(m["p"], "markov.p", true);
    if (m.contains("grid_size")) {
      const auto g = dpcoop::detail::get_integer(m["grid_size"], "markov.grid_size");
      if (g < 100) throw ConfigError("markov.grid_size", "must be at least 100");
      spec.markov.grid_size = static_cast<int>(g);
    }
    if (m.contains("tol")) {
      spec.markov.tol = dpcoop::detail::get_number(m["tol"], "markov.tol");
      if (!(spec.markov.tol > 0.0)) throw ConfigError("markov.tol", "must be positive");
    }
  }

  const auto ninths = fractions(1, 9, 10);
  spec.sources.pA = spec.sources.kA = spec.sources.kB = ninths;
  spec.sources.q = {0.25, 0.5, 0.75};
  spec.sources.a_types = {0.0, 0.25, 0.5, 0.75, 1.0};
  spec.sources.kX = spec.sources.kY = ninths;
  if (j.contains("sources")) {
    const Json& s = j["sources"];
    detail::reject_unknown(s, {"state", "type"}, "sources");
    auto grid = [&](const char* section, std::initializer_list<std::pair<const char*, std::vector<double>*>> fields,
                    bool& enabled) {
      if (!s.contains(section)) return;
      const Json& sec = s[section];
      if (sec.is_boolean()) {
        enabled = sec.get<bool>();
        return;
      }
      std::set<std::string> names;
      for (const auto& f : fields) names.insert(f.first);
      detail::reject_unknown(sec, names, std::string("sources.") + section);
      for (const auto& [name, target] : fields)
        if (sec.contains(name)) *target = number_list(sec[name], std::string("sources.") + section + "." + name, true);
    };
    grid("state", {{"pA", &spec.sources.pA}, {"kA", &spec.sources.kA}, {"kB", &spec.sources.kB}}, spec.sources.state);
    grid("type",
         {{"q", &spec.sources.q}, {"a_types", &spec.sources.a_types}, {"kX", &spec.sources.kX}, {"kY", &spec.sources.kY}},
         spec.sources.type);
  }

  spec.optimal_k.p = {spec.config.scenario.p_game1};
  spec.optimal_k.A = {spec.config.A};
  spec.optimal_k.K = fractions(0, 10, 10);
  if (j.contains("optimal_k")) {
    const Json& o = j["optimal_k"];
    detail::reject_unknown(o, {"p", "A", "K", "metric"}, "optimal_k");
    if (o.contains("p")) spec.optimal_k.p = number_list(o["p"], "optimal_k.p", true);
    if (o.contains("A")) spec.optimal_k.A = number_list(o["A"], "optimal_k.A", true);
    if (o.contains("K")) spec.optimal_k.K = number_list(o["K"], "optimal_k.K", true);
    if (o.contains("metric")) {
      std::string m = dpcoop::detail::get_string(o["metric"], "optimal_k.metric");
      if (m == "total_cooperation") m = "total_coop_rate";
      if (m != "total_coop_rate" && m != "mean_reward")
        throw ConfigError("optimal_k.metric", "expected total_cooperation or mean_reward");
      spec.optimal_k.metric = m;
    }
  }
  return spec;
}

// Runs every distinct configuration once per seed. Jobs are flattened over
// (configuration, seed) so grid points and seeds share the worker pool.
class ReplicationCache {
 public:
  ReplicationCache(int n_seeds, unsigned threads) : n_seeds_(n_seeds), threads_(threads) {}

  void request(const SimConfig& cfg, bool keep_periods = false) {
    const std::string key = sim_config_to_json(cfg).dump();
    auto [it, inserted] = pending_.try_emplace(key, Pending{cfg, keep_periods});
    if (!inserted) it->second.keep_periods = it->second.keep_periods || keep_periods;
  }

  void run_pending() {
    std::vector<std::pair<std::string, Pending>> todo;
    for (auto& kv : pending_)
      if (!done_.count(kv.first)) todo.emplace_back(kv.first, kv.second);
    const std::size_t seeds = static_cast<std::size_t>(n_seeds_);
    auto results = parallel_map(
        todo.size() * seeds,
        [&](std::size_t job) {
          const auto& [key, p] = todo[job / seeds];
          SimConfig c = p.cfg;
          c.seed = p.cfg.seed + job % seeds;
          MetricsSeries s = run(c);
          if (!p.keep_periods) {
            s.periods.clear();
            s.periods.shrink_to_fit();
          }
          return s;
        },
        threads_);
    for (std::size_t i = 0; i < todo.size(); ++i) {
      Replications r;
      for (std::size_t s = 0; s < seeds; ++s) r.runs.push_back(std::move(results[i * seeds + s]));
      done_.emplace(todo[i].first, std::move(r));
    }
  }

  const Replications& get(const SimConfig& cfg) const { return done_.at(sim_config_to_json(cfg).dump()); }

 private:
  struct Pending {
    SimConfig cfg;
    bool keep_periods;
  };
  int n_seeds_;
  unsigned threads_;
  std::map<std::string, Pending> pending_;
  std::map<std::string, Replications> done_;
};

using Outputs = std::vector<std::pair<std::string, CsvTable>>;

namespace detail {

inline std::string cell(const Json& v) {
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Cartesian product in axis order, first axis outermost.
inline std::vector<std::vector<Json>> grid_points(const std::vector<Axis>& axes) {
  std::vector<std::vector<Json>> points{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<Json>> next;
    for (const auto& prefix : points)
      for (const auto& v : axis.values) {
        auto p = prefix;
        p.push_back(v);
        next.push_back(std::move(p));
      }
    points = std::move(next);
  }
  return points;
}

inline SimConfig config_at(const ExperimentSpec& spec, const std::vector<Json>& point) {
  Json j = spec.base;
  for (std::size_t i = 0; i < spec.axes.size(); ++i) j[spec.axes[i].name] = point[i];
  return sim_config_from_json(j);
}

inline bool is_double_game(const SimConfig& cfg) {
  return cfg.scenario.kind == ScenarioKind::DoubleOneShot || cfg.scenario.kind == ScenarioKind::DoubleRepeated;
}

inline SimConfig with_A(SimConfig cfg, double A) {
  cfg.A = A;
  return cfg;
}

inline std::vector<std::string> period_cells(const Aggregate& agg, std::optional<Action> coop) {
  std::vector<std::string> cells{format_number(agg.intuitive_decisions()), format_number(agg.deliberative_decisions())};
  for (double v : metric_values(agg, coop)) cells.push_back(format_number(v));
  return cells;
}

}  // namespace detail

inline std::vector<std::string> simulate_header() {
  std::vector<std::string> h{"period", "intuitive_decisions", "deliberative_decisions"};
  for (const auto& m : metric_names()) h.push_back(m);
  return h;
}

inline Outputs compute_simulate(const ExperimentSpec& spec) {
  const MetricsSeries series = run(spec.config);
  CsvTable t{simulate_header(), {}};
  for (std::size_t i = 0; i < series.periods.size(); ++i) {
    Aggregate one;
    one.add(series.periods[i]);
    auto row = detail::period_cells(one, series.cooperative_action);
    row.insert(row.begin(), format_number(static_cast<unsigned long>(i + 1)));
    t.add_row(std::move(row));
  }
  auto row = detail::period_cells(series.aggregate, series.cooperative_action);
  row.insert(row.begin(), "aggregate");
  t.add_row(std::move(row));
  return {{"simulate.csv", std::move(t)}};
}

inline Outputs compute_sweep(const ExperimentSpec& spec) {
  const auto points = detail::grid_points(spec.axes);
  std::vector<SimConfig> configs;
  ReplicationCache cache(spec.n_seeds, spec.threads);
  bool any_learned = false;
  for (const auto& pt : points) {
    SimConfig cfg = detail::config_at(spec, pt);
    cfg.validate();
    const bool learned = cfg.deliberation_rule == DeliberationRule::Learned;
    any_learned = any_learned || learned;
    cache.request(cfg, learned);
    if (detail::is_double_game(cfg)) {
      cache.request(detail::with_A(cfg, 1.0));
      cache.request(detail::with_A(cfg, 0.0));
    }
    configs.push_back(std::move(cfg));
  }
  cache.run_pending();

  std::vector<std::string> axis_names;
  for (const auto& a : spec.axes) axis_names.push_back(a.name);

  CsvTable summary{axis_names, {}};
  for (const char* col : {"metric", "mean", "se", "n_seeds"}) summary.header.push_back(col);
  CsvTable series{axis_names, {}};
  for (const char* col : {"period", "deliberative_rate_g0_a0", "deliberative_rate_g1_a0"}) series.header.push_back(col);

  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<std::string> prefix;
    for (const auto& v : points[i]) prefix.push_back(detail::cell(v));
    auto emit = [&](const MetricStat& s) {
      auto row = prefix;
      row.insert(row.end(), {s.name, format_number(s.mean), format_number(s.se), format_number(s.n)});
      summary.add_row(std::move(row));
    };
    const SimConfig& cfg = configs[i];
    const Replications& reps = cache.get(cfg);
    for (const auto& s : reps.stats()) emit(s);

    if (detail::is_double_game(cfg)) {
      const auto hi = cache.get(detail::with_A(cfg, 1.0)).stats();
      const auto lo = cache.get(detail::with_A(cfg, 0.0)).stats();
      for (const char* name : {"mean_reward", "intuitive_rate_a0"}) {
        const auto k = metric_index(name);
        emit({std::string("diff_A1_A0_") + name, hi[k].mean - lo[k].mean,
              std::sqrt(hi[k].se * hi[k].se + lo[k].se * lo[k].se), hi[k].n});
      }
    }

    if (cfg.deliberation_rule == DeliberationRule::Learned) {
      for (int t = 0; t < cfg.T; ++t) {
        Aggregate pooled;
        for (const auto& r : reps.runs) pooled.add(r.periods[t]);
        auto row = prefix;
        row.insert(row.end(), {format_number(t + 1), format_number(pooled.deliberative_rate_in_game(0, 0)),
                               format_number(pooled.deliberative_rate_in_game(1, 0))});
        series.add_row(std::move(row));
      }
    }
  }
  Outputs out{{"sweep.csv", std::move(summary)}};
  if (any_learned) out.emplace_back("sweep_timeseries.csv", std::move(series));
  return out;
}

inline Outputs compute_markov(const ExperimentSpec& spec) {
  const auto& m = spec.markov;
  CsvTable fixed{{"K", "p", "x_star", "stability", "residual"}, {}};
  CsvTable curves{{"K", "p"}, {}};
  for (int j = 0; j <= m.grid_size; ++j) curves.header.push_back(format_number(static_cast<double>(j) / m.grid_size));

  struct Job {
    double K, p;
  };
  std::vector<Job> jobs;
  for (double K : m.K)
    for (double p : m.p) jobs.push_back({K, p});
  struct Result {
    std::vector<markov::FixedPoint> roots;
    std::vector<double> curve;
  };
  const auto results = parallel_map(
      jobs.size(),
      [&](std::size_t i) {
        return Result{markov::find_fixed_points(jobs[i].K, jobs[i].p, m.grid_size, m.tol),
                      markov::intuitive_coop_curve(jobs[i].K, jobs[i].p, m.grid_size)};
      },
      spec.threads);

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string K = format_number(jobs[i].K), p = format_number(jobs[i].p);
    for (const auto& fp : results[i].roots)
      fixed.add_row({K, p, format_number(fp.x), markov::to_string(fp.stability), format_number(fp.residual)});
    std::vector<std::string> row{K, p};
    for (double v : results[i].curve) row.push_back(format_number(v));
    curves.add_row(std::move(row));
  }
  return {{"markov_fixed_points.csv", std::move(fixed)}, {"markov_curves.csv", std::move(curves)}};
}

namespace detail {
inline void report_cells(std::vector<std::string>& row, const std::optional<sources::CognitionAssortReport>& r,
                         double pD, double pI) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.push_back(format_number(pD));
  row.push_back(format_number(pI));
  row.push_back(format_number(r ? r->pD_given_D : nan));
  row.push_back(format_number(r ? r->pD_given_I : nan));
  row.push_back(format_number(r ? r->delta : nan));
  row.push_back(r ? "0" : "1");
}
}  // namespace detail

inline Outputs compute_sources(const ExperimentSpec& spec) {
  const auto& s = spec.sources;
  Outputs out;
  const std::vector<std::string> tail{"pD", "pI", "pD_given_D", "pD_given_I", "delta", "undefined"};
  if (s.state) {
    CsvTable t{{"pA", "kA", "kB"}, {}};
    t.header.insert(t.header.end(), tail.begin(), tail.end());
    for (double pA : s.pA)
      for (double kA : s.kA)
        for (double kB : s.kB) {
          sources::StateBasedParams params{pA, kA, kB};
          std::optional<sources::CognitionAssortReport> rep;
          try {
            rep = sources::state_based_report(params);
          } catch (const sources::UndefinedConditional&) {
          }
          std::vector<std::string> row{format_number(pA), format_number(kA), format_number(kB)};
          detail::report_cells(row, rep, pA * (1 - kA) + (1 - pA) * (1 - kB), pA * kA + (1 - pA) * kB);
          t.add_row(std::move(row));
        }
    out.emplace_back("sources_state.csv", std::move(t));
  }
  if (s.type) {
    CsvTable t{{"q", "a_types", "kX", "kY"}, {}};
    t.header.insert(t.header.end(), tail.begin(), tail.end());
    for (double q : s.q)
      for (double a : s.a_types)
        for (double kX : s.kX)
          for (double kY : s.kY) {
            sources::TypeBasedParams params{q, a, kX, kY};
            std::optional<sources::CognitionAssortReport> rep;
            try {
              rep = sources::type_based_report(params);
            } catch (const sources::UndefinedConditional&) {
            }
            std::vector<std::string> row{format_number(q), format_number(a), format_number(kX), format_number(kY)};
            detail::report_cells(row, rep, q * (1 - kX) + (1 - q) * (1 - kY), q * kX + (1 - q) * kY);
            t.add_row(std::move(row));
          }
    out.emplace_back("sources_type.csv", std::move(t));
  }
  return out;
}

struct OptimalKRow {
  double p = 0.0, A = 0.0;
  double K_star = 0.0;
  MetricStat best;
  std::optional<double> runner_up_K;
  double runner_up_gap = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, MetricStat>> scan;  // (K, metric) in grid order
};

// Argmax of the metric's replication mean over the K grid; the first grid
// point wins ties.
inline std::vector<OptimalKRow> optimal_k_search(const ExperimentSpec& spec) {
  const auto& o = spec.optimal_k;
  ReplicationCache cache(spec.n_seeds, spec.threads);
  auto cfg_at = [&](double p, double A, double K) {
    Json j = spec.base;
    j["p"] = p;
    j["A"] = A;
    j["K"] = K;
    SimConfig c = sim_config_from_json(j);
    c.validate();
    return c;
  };
  for (double p : o.p)
    for (double A : o.A)
      for (double K : o.K) cache.request(cfg_at(p, A, K));
  cache.run_pending();

  std::vector<OptimalKRow> rows;
  for (double p : o.p)
    for (double A : o.A) {
      OptimalKRow row;
      row.p = p;
      row.A = A;
      for (double K : o.K) row.scan.emplace_back(K, cache.get(cfg_at(p, A, K)).stat(o.metric));
      std::size_t best = 0;
      for (std::size_t i = 1; i < row.scan.size(); ++i)
        if (row.scan[i].second.mean > row.scan[best].second.mean) best = i;
      row.K_star = row.scan[best].first;
      row.best = row.scan[best].second;
      std::optional<std::size_t> second;
      for (std::size_t i = 0; i < row.scan.size(); ++i)
        if (i != best && (!second || row.scan[i].second.mean > row.scan[*second].second.mean)) second = i;
      if (second) {
        row.runner_up_K = row.scan[*second].first;
        row.runner_up_gap = row.best.mean - row.scan[*second].second.mean;
      }
      rows.push_back(std::move(row));
    }
  return rows;
}

inline Outputs compute_optimal_k(const ExperimentSpec& spec) {
  const auto rows = optimal_k_search(spec);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CsvTable best{{"p", "A", "K_star", "metric", "mean", "se", "runner_up_K", "runner_up_gap", "n_seeds"}, {}};
  CsvTable scan{{"p", "A", "K", "metric", "mean", "se", "n_seeds"}, {}};
  for (const auto& r : rows) {
    best.add_row({format_number(r.p), format_number(r.A), format_number(r.K_star), spec.optimal_k.metric,
                  format_number(r.best.mean), format_number(r.best.se), format_number(r.runner_up_K.value_or(nan)),
                  format_number(r.runner_up_gap), format_number(r.best.n)});
    for (const auto& [K, s] : r.scan)
      scan.add_row({format_number(r.p), format_number(r.A), format_number(K), spec.optimal_k.metric,
                    format_number(s.mean), format_number(s.se), format_number(s.n)});
  }
  return {{"optimal_k.csv", std::move(best)}, {"optimal_k_scan.csv", std::move(scan)}};
}

inline Outputs compute(Command cmd, const ExperimentSpec& spec) {
  switch (cmd) {
    case Command::Simulate: return compute_simulate(spec);
    case Command::Sweep: return compute_sweep(spec);
    case Command::Markov: return compute_markov(spec);
    case Command::Sources: return compute_sources(spec);
    case Command::OptimalK: return compute_optimal_k(spec);
  }
  return {};
}

inline std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir, const Outputs& outputs) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [name, table] : outputs) {
    const auto path = dir / name;
    table.write(path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace dpcoop::experiments

#endif  // DPCOOP_EXPERIMENTS_HPP
