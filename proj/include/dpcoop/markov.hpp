#ifndef DPCOOP_MARKOV_HPP
#define DPCOOP_MARKOV_HPP

// Single-agent memory chain for perfect assortativity (A = 1) and learning
// rate 1. With alpha = 1 each slot holds the last reward earned by its action,
// so the cooperate slot takes values in {0, c, b} and the defect slot in
// {c, d = b + c}. Given the population's intuitive cooperation probability
// x_bar, the chain's invariant distribution gives the agent's own intuitive
// cooperation probability x_i; equilibria solve x_i(x) = x.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpcoop/game.hpp"

namespace dpcoop::markov {

enum class CoopReward { Zero = 0, Low = 1, High = 2 };  // 0, c, b
enum class DefectReward { Low = 0, High = 1 };          // c, d
enum class StateClass { S1, S2, S3 };                   // r_c > r_d, r_c = r_d, r_c < r_d

inline constexpr int kStates = 6;

struct MemoryState {
  CoopReward r_c;
  DefectReward r_d;

  // Rank in the ordering 0 < c < b < d.
  static int rank(CoopReward r) { return static_cast<int>(r); }
  static int rank(DefectReward r) { return r == DefectReward::Low ? 1 : 3; }

  StateClass state_class() const {
    const int lc = rank(r_c), ld = rank(r_d);
    return lc > ld ? StateClass::S1 : (lc == ld ? StateClass::S2 : StateClass::S3);
  }
  // Order: {0,c} {c,c} {b,c} {0,d} {c,d} {b,d}
  int index() const { return static_cast<int>(r_d) * 3 + static_cast<int>(r_c); }
  static MemoryState from_index(int i) { return {static_cast<CoopReward>(i % 3), static_cast<DefectReward>(i / 3)}; }

  std::string label() const {
    static const char* coop[] = {"0", "c", "b"};
    static const char* defect[] = {"c", "d"};
    return std::string("{") + coop[static_cast<int>(r_c)] + "," + defect[static_cast<int>(r_d)] + "}";
  }
  bool operator==(const MemoryState&) const = default;
};

inline const std::array<MemoryState, kStates>& all_states() {
  static const std::array<MemoryState, kStates> states = [] {
    std::array<MemoryState, kStates> s{};
    for (int i = 0; i < kStates; ++i) s[i] = MemoryState::from_index(i);
    return s;
  }();
  return states;
}

inline int index_of(CoopReward c, DefectReward d) { return MemoryState{c, d}.index(); }

// Per-period probabilities of the reward credited to each slot; exactly one of
// the five events happens each period.
struct RewardDistribution {
  std::array<double, 3> cooperate{};  // P[R_C = 0], P[R_C = c], P[R_C = b]
  std::array<double, 2> defect{};     // P[R_D = c], P[R_D = d]

  double total() const { return cooperate[0] + cooperate[1] + cooperate[2] + defect[0] + defect[1]; }
};

// Under A = 1 both partners share the mode. Deliberators play D in the one-shot
// game and C in the repeated one; intuitive partners cooperate with prob x_bar.
inline RewardDistribution reward_distribution(StateClass cls, double K, double p, double x_bar) {
  RewardDistribution r;
  switch (cls) {
    case StateClass::S1:
      r.cooperate = {K * (1 - p) * (1 - x_bar), K * p * (1 - x_bar), (1 - K) * p + K * x_bar};
      r.defect = {(1 - K) * (1 - p), 0.0};
      break;
    case StateClass::S2:
      r.cooperate = {0.5 * K * (1 - p) * (1 - x_bar), 0.5 * K * p * (1 - x_bar), (1 - K) * p + 0.5 * K * x_bar};
      r.defect = {(1 - K) * (1 - p) + 0.5 * K * (1 - x_bar) + 0.5 * K * p * x_bar, 0.5 * K * (1 - p) * x_bar};
      break;
    case StateClass::S3:
      r.cooperate = {0.0, 0.0, (1 - K) * p};
      r.defect = {(1 - K) * (1 - p) + K * (1 - x_bar) + K * p * x_bar, K * (1 - p) * x_bar};
      break;
  }
  return r;
}

struct TransitionMatrix {
  Eigen::Matrix<double, kStates, kStates> entries = Eigen::Matrix<double, kStates, kStates>::Zero();

  double operator()(int from, int to) const { return entries(from, to); }
  double operator()(const MemoryState& from, const MemoryState& to) const { return entries(from.index(), to.index()); }
};

// A period changes at most one slot: the slot of the action played.
inline TransitionMatrix build_transition(double K, double p, double x_bar) {
  TransitionMatrix T;
  for (const auto& s : all_states()) {
    const auto dist = reward_distribution(s.state_class(), K, p, x_bar);
    const int from = s.index();
    for (int rc = 0; rc < 3; ++rc) {
      const int to = index_of(static_cast<CoopReward>(rc), s.r_d);
      T.entries(from, to) += dist.cooperate[rc];
    }
    for (int rd = 0; rd < 2; ++rd) {
      const int to = index_of(s.r_c, static_cast<DefectReward>(rd));
      T.entries(from, to) += dist.defect[rd];
    }
  }
  return T;
}

class DegenerateChain : public std::runtime_error {
 public:
  DegenerateChain(const std::string& what, int n_classes) : std::runtime_error(what), n_classes_(n_classes) {}
  int recurrent_classes() const noexcept { return n_classes_; }

 private:
  int n_classes_;
};

// Closed communicating classes of the support graph.
inline std::vector<std::vector<int>> recurrent_classes(const TransitionMatrix& T) {
  std::array<std::array<bool, kStates>, kStates> reach{};
  for (int i = 0; i < kStates; ++i)
    for (int j = 0; j < kStates; ++j) reach[i][j] = (i == j) || T(i, j) > 0.0;
  for (int k = 0; k < kStates; ++k)
    for (int i = 0; i < kStates; ++i)
      for (int j = 0; j < kStates; ++j) reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);

  std::vector<std::vector<int>> classes;
  std::array<bool, kStates> seen{};
  for (int i = 0; i < kStates; ++i) {
    if (seen[i]) continue;
    std::vector<int> cls;
    for (int j = 0; j < kStates; ++j)
      if (reach[i][j] && reach[j][i]) {
        cls.push_back(j);
        seen[j] = true;
      }
    bool closed = true;
    for (int a : cls)
      for (int j = 0; j < kStates; ++j)
        if (reach[a][j] && !reach[j][a]) closed = false;
    if (closed) classes.push_back(std::move(cls));
  }
  return classes;
}

using Distribution = Eigen::Matrix<double, 1, kStates>;

inline double stationarity_residual(const TransitionMatrix& T, const Distribution& pi) {
  return (pi * T.entries - pi).cwiseAbs().maxCoeff();
}

// Iterates the lazy chain (I + T) / 2, which shares T's stationary and
// absorption behaviour but is aperiodic.
inline Distribution limit_distribution(const TransitionMatrix& T, const Distribution& start, double tol = 1e-12,
                                       int max_iter = 1000000) {
  const Eigen::Matrix<double, kStates, kStates> lazy =
      0.5 * (Eigen::Matrix<double, kStates, kStates>::Identity() + T.entries);
  Distribution pi = start / start.sum();
  for (int it = 0; it < max_iter; ++it) {
    Distribution next = pi * lazy;
    const double change = (next - pi).cwiseAbs().maxCoeff();
    pi = next;
    if (change < tol && stationarity_residual(T, pi) < tol) break;
  }
  return pi;
}

// Solves pi (T - I) = 0 with sum(pi) = 1. Requires a unique recurrent class.
inline Distribution invariant_distribution(const TransitionMatrix& T) {
  const auto classes = recurrent_classes(T);
  if (classes.size() != 1)
    throw DegenerateChain("transition matrix has " + std::to_string(classes.size()) + " recurrent classes",
                          static_cast<int>(classes.size()));

  Eigen::Matrix<double, kStates, kStates> system =
      T.entries.transpose() - Eigen::Matrix<double, kStates, kStates>::Identity();
  system.row(kStates - 1).setOnes();
  Eigen::Matrix<double, kStates, 1> rhs = Eigen::Matrix<double, kStates, 1>::Zero();
  rhs(kStates - 1) = 1.0;
  Distribution pi = system.fullPivLu().solve(rhs).transpose();
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();

  if (!(stationarity_residual(T, pi) <= 1e-10))
    pi = limit_distribution(T, Distribution::Constant(1.0 / kStates));
  return pi;
}

inline double intuitive_coop_from(const Distribution& pi) {
  return pi(index_of(CoopReward::High, DefectReward::Low)) + 0.5 * pi(index_of(CoopReward::Low, DefectReward::Low));
}

// x_i: long-run probability that the agent cooperates under intuition.
inline double intuitive_coop_rate(double K, double p, double x_bar) {
  return intuitive_coop_from(invariant_distribution(build_transition(K, p, x_bar)));
}

enum class Stability { Attracting, Repelling };

inline std::string to_string(Stability s) { return s == Stability::Attracting ? "attracting" : "repelling"; }

struct FixedPoint {
  double x = 0.0;
  Stability stability = Stability::Repelling;
  double residual = 0.0;  // x_i(x) - x at the reported root
};

// Roots of g(x) = x_i(x) - x on [0,1] by grid scan and bisection. Stability
// follows the monotone-adjustment heuristic: the aggregate rises where g > 0 and
// falls where g < 0, so a root is attracting when g > 0 below and g < 0 above.
// x = 1 is always reported; its label uses only the side below.
inline std::vector<FixedPoint> find_fixed_points(double K, double p, int grid_size = 1000, double tol = 1e-9) {
  if (grid_size < 100) throw ConfigError("grid_size", "must be at least 100");
  if (!is_probability(K)) throw ConfigError("K", "must lie in [0,1]");
  if (!is_probability(p)) throw ConfigError("p", "must lie in [0,1]");

  auto g = [&](double x) { return intuitive_coop_rate(K, p, x) - x; };
  const double h = 1.0 / grid_size;
  std::vector<double> gx(grid_size);  // grid points 0 .. grid_size-1; x = 1 handled apart
  for (int j = 0; j < grid_size; ++j) gx[j] = g(j * h);

  auto label = [](double below, double above) {
    return (below > 0.0 && above < 0.0) ? Stability::Attracting : Stability::Repelling;
  };

  std::vector<FixedPoint> roots;
  for (int j = 0; j < grid_size; ++j) {
    if (gx[j] == 0.0) {
      const double below = j > 0 ? gx[j - 1] : 1.0;  // one-sided at x = 0
      const double above = j + 1 < grid_size ? gx[j + 1] : -1.0;
      roots.push_back({j * h, label(below, above), 0.0});
      continue;
    }
    if (j + 1 >= grid_size || gx[j + 1] == 0.0 || (gx[j] > 0.0) == (gx[j + 1] > 0.0)) continue;
    double lo = j * h, hi = (j + 1) * h, glo = gx[j], mid = lo, gmid = glo;
    for (int it = 0; it < 200; ++it) {
      mid = 0.5 * (lo + hi);
      gmid = g(mid);
      if (std::abs(gmid) <= tol || hi - lo < 1e-15) break;
      if ((gmid > 0.0) == (glo > 0.0)) {
        lo = mid;
        glo = gmid;
      } else {
        hi = mid;
      }
    }
    roots.push_back({mid, label(gx[j], gx[j + 1]), gmid});
  }

  double g_one = 0.0;
  try {
    g_one = g(1.0);
  } catch (const DegenerateChain&) {
    // Boundary K or p can leave x = 1 with several recurrent classes; it is
    // still a consistent state because every agent keeps cooperating.
  }
  roots.push_back({1.0, gx[grid_size - 1] > 0.0 ? Stability::Attracting : Stability::Repelling, g_one});
  return roots;
}

// Samples x_i on n + 1 evenly spaced values of x_bar in [0,1]; NaN where the
// chain has no unique recurrent class.
inline std::vector<double> intuitive_coop_curve(double K, double p, int n) {
  std::vector<double> out;
  out.reserve(n + 1);
  for (int j = 0; j <= n; ++j) {
    try {
      out.push_back(intuitive_coop_rate(K, p, static_cast<double>(j) / n));
    } catch (const DegenerateChain&) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

}  // namespace dpcoop::markov

#endif  // DPCOOP_MARKOV_HPP
