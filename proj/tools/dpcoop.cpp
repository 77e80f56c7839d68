// Command-line front end: simulate | sweep | markov | sources | optimal-k.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dpcoop/config_io.hpp"
#include "dpcoop/experiments.hpp"
#include "dpcoop/svg.hpp"

namespace {

using dpcoop::CsvTable;
using dpcoop::experiments::Command;
using dpcoop::experiments::Outputs;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;

double to_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (...) {
    return std::nan("");
  }
}

std::size_t column(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  return t.header.size();
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
  return out;
}

std::vector<dpcoop::svg::LineChart> charts_for(Command cmd, const Outputs& outputs) {
  using dpcoop::svg::LineChart;
  using dpcoop::svg::Series;
  std::vector<LineChart> charts;
  for (const auto& [name, t] : outputs) {
    if (name == "sweep.csv") {
      const std::size_t metric = column(t, "metric"), mean = column(t, "mean");
      if (metric == 0) continue;  // no axes
      for (const std::string wanted : {"intuitive_coop_rate", "mean_reward"}) {
        LineChart c{"sweep: " + wanted, t.header[0], wanted, {}, 0, 0, 0, 0};
        std::map<std::string, Series> by_group;
        std::vector<std::string> order;
        bool first = true;
        for (const auto& row : t.rows) {
          if (row[metric] != wanted) continue;
          const double x = to_double(row[0]), y = to_double(row[mean]);
          if (!std::isfinite(x) || !std::isfinite(y)) continue;
          std::vector<std::string> rest;
          for (std::size_t k = 1; k < metric; ++k) rest.push_back(t.header[k] + "=" + row[k]);
          const std::string key = join(rest);
          if (!by_group.count(key)) order.push_back(key);
          by_group[key].name = key.empty() ? wanted : key;
          by_group[key].x.push_back(x);
          by_group[key].y.push_back(y);
          if (first) c.x_min = c.x_max = x, c.y_min = c.y_max = y, first = false;
          c.x_min = std::min(c.x_min, x), c.x_max = std::max(c.x_max, x);
          c.y_min = std::min(c.y_min, y), c.y_max = std::max(c.y_max, y);
        }
        if (first) continue;
        for (const auto& k : order) c.series.push_back(by_group[k]);
        charts.push_back(std::move(c));
      }
    } else if (name == "markov_curves.csv") {
      LineChart c{"intuitive cooperation x_i against population rate", "population intuitive cooperation",
                  "x_i", {}, 0, 1, 0, 1};
      std::vector<double> xs;
      for (std::size_t k = 2; k < t.header.size(); ++k) xs.push_back(to_double(t.header[k]));
      for (const auto& row : t.rows) {
        Series s{"K=" + row[0] + " p=" + row[1], xs, {}, false};
        for (std::size_t k = 2; k < row.size(); ++k) s.y.push_back(to_double(row[k]));
        c.series.push_back(std::move(s));
      }
      c.series.push_back(Series{"45 degree line", {0.0, 1.0}, {0.0, 1.0}, true});
      charts.push_back(std::move(c));
    } else if (name == "optimal_k.csv") {
      LineChart c{"cooperation-maximizing K", "p", "K*", {}, 0, 1, 0, 1};
      std::map<std::string, Series> by_A;
      for (const auto& row : t.rows) {
        auto& s = by_A[row[1]];
        s.name = "A=" + row[1];
        s.x.push_back(to_double(row[0]));
        s.y.push_back(to_double(row[2]));
      }
      for (auto& [k, s] : by_A) c.series.push_back(std::move(s));
      charts.push_back(std::move(c));
    } else if (name == "simulate.csv" && cmd == Command::Simulate) {
      LineChart c{"per-period play rates", "period", "rate", {}, 1, static_cast<double>(t.rows.size() - 1), 0, 1};
      for (const std::string col : {"intuitive_rate_a0", "deliberative_rate_a0"}) {
        Series s{col, {}, {}, false};
        const std::size_t k = column(t, col);
        for (std::size_t r = 0; r + 1 < t.rows.size(); ++r) {
          s.x.push_back(static_cast<double>(r + 1));
          s.y.push_back(to_double(t.rows[r][k]));
        }
        c.series.push_back(std::move(s));
      }
      charts.push_back(std::move(c));
    }
  }
  return charts;
}

int execute(Command cmd, const std::string& config_path, const std::string& out_flag, int seeds,
            const std::vector<std::string>& overrides, bool svg_flag, int threads) {
  dpcoop::Json raw = config_path.empty() ? dpcoop::Json::object() : dpcoop::load_json_file(config_path);
  if (raw.contains("command") && raw["command"].is_string() &&
      dpcoop::experiments::command_from_string(raw["command"].get<std::string>()) != cmd)
    throw dpcoop::ConfigError("command", "spec file is for '" + raw["command"].get<std::string>() + "'");
  for (const auto& o : overrides) dpcoop::apply_override(raw, o);
  if (seeds > 0) raw["n_seeds"] = seeds;
  if (threads >= 0) raw["threads"] = threads;
  if (svg_flag) raw["svg"] = true;

  const auto spec = dpcoop::experiments::parse_spec(raw);
  std::string dir = out_flag;
  if (dir.empty()) dir = spec.output;
  if (dir.empty()) {
    const char* env = std::getenv("DPCOOP_OUT_DIR");
    dir = env ? env : ".";
  }

  const Outputs outputs = dpcoop::experiments::compute(cmd, spec);
  for (const auto& path : dpcoop::experiments::write_outputs(dir, outputs)) std::cerr << "wrote " << path.string() << "\n";
  if (spec.svg) {
    int n = 0;
    for (const auto& chart : charts_for(cmd, outputs)) {
      const auto path = std::filesystem::path(dir) /
                        (dpcoop::experiments::to_string(cmd) + "_" + std::to_string(n++) + ".svg");
      std::ofstream(path) << dpcoop::svg::render(chart);
      std::cerr << "wrote " << path.string() << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-process cooperation with assortativity in cognition"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int seeds = 0;
  int threads = -1;
  bool svg = false;
  std::vector<std::string> overrides;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "run one simulation; per-period rows plus an aggregate row"},
      {"sweep", "replicated runs over the Cartesian product of parameter axes"},
      {"markov", "fixed points and x_i curves of the single-agent memory chain (A=1, alpha=1)"},
      {"sources", "state- and type-based assortativity in cognition calculators"},
      {"optimal-k", "intuition probability K maximizing cooperation or reward"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON spec file");
    sub->add_option("--out", out_dir, "output directory (default: spec 'output', then $DPCOOP_OUT_DIR, then .)");
    sub->add_option("--seeds", seeds, "number of replications (overrides n_seeds)");
    sub->add_option("--set", overrides, "override a spec key, e.g. --set K=0.8 --set axes.A=[0,1]")->take_all();
    sub->add_option("--threads", threads, "worker threads, 0 = hardware concurrency");
    sub->add_flag("--svg", svg, "also write best-effort SVG charts");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    for (const auto& [name, help] : commands)
      if (app.got_subcommand(name))
        return execute(dpcoop::experiments::command_from_string(name), config_path, out_dir, seeds, overrides, svg,
                       threads);
  } catch (const dpcoop::ConfigError& e) {
    std::cerr << "config error in '" << e.field() << "': " << e.reason() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
