#ifndef DPCOOP_MATCHING_HPP
#define DPCOOP_MATCHING_HPP

#include <numeric>
#include <utility>
#include <vector>

#include "dpcoop/game.hpp"
#include "dpcoop/policy.hpp"
#include "dpcoop/random.hpp"

namespace dpcoop {

using Pair = std::pair<int, int>;
using ModePair = std::pair<CognitiveMode, CognitiveMode>;

struct MatchDraw {
  std::vector<Pair> pairs;
  std::vector<int> game_index;
  std::vector<ModePair> modes;
};

// Fisher-Yates over an existing buffer; adjacent entries form the pairs.
inline void shuffle_population(std::vector<int>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(order[i - 1], order[j]);
  }
}

inline std::vector<Pair> pair_population(int M, Rng& rng) {
  if (M < 2 || M % 2 != 0) throw ConfigError("M", "population size must be a positive even integer");
  std::vector<int> order(M);
  std::iota(order.begin(), order.end(), 0);
  shuffle_population(order, rng);
  std::vector<Pair> pairs;
  pairs.reserve(M / 2);
  for (int k = 0; k < M; k += 2) pairs.emplace_back(order[k], order[k + 1]);
  return pairs;
}

// With probability A one Bernoulli(K) draw sets both modes; otherwise each
// agent draws independently. Success means Intuition.
inline ModePair draw_modes(double K, double A, Rng& rng) {
  auto mode = [&] { return bernoulli(rng, K) ? CognitiveMode::Intuition : CognitiveMode::Deliberation; };
  if (bernoulli(rng, A)) {
    const auto shared = mode();
    return {shared, shared};
  }
  const auto first = mode();
  return {first, mode()};
}

inline int draw_game(double p_game1, Rng& rng) { return bernoulli(rng, p_game1) ? 1 : 0; }

// Full per-period draw in the engine's stream order: pairing, then per pair game and modes.
inline MatchDraw draw_match(int M, double K, double A, double p_game1, Rng& rng) {
  MatchDraw draw;
  draw.pairs = pair_population(M, rng);
  draw.game_index.reserve(draw.pairs.size());
  draw.modes.reserve(draw.pairs.size());
  for (std::size_t k = 0; k < draw.pairs.size(); ++k) {
    draw.game_index.push_back(draw_game(p_game1, rng));
    draw.modes.push_back(draw_modes(K, A, rng));
  }
  return draw;
}

}  // namespace dpcoop

#endif  // DPCOOP_MATCHING_HPP
