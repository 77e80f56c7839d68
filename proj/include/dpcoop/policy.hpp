#ifndef DPCOOP_POLICY_HPP
#define DPCOOP_POLICY_HPP

#include <cmath>
#include <stdexcept>

#include "dpcoop/game.hpp"
#include "dpcoop/random.hpp"

namespace dpcoop {

enum class CognitiveMode { Intuition, Deliberation };

struct LearningParams {
  double alpha = 0.5;
  double tie_epsilon = 1e-9;
  DeliberationRule rule = DeliberationRule::Prescribed;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must lie in (0,1]");
    if (!(tie_epsilon >= 0.0)) throw ConfigError("tie_epsilon", "must be non-negative");
  }
};

// Argmax of two slots; slots within tie_epsilon of each other are a tie, broken
// by one fair coin from the stream. No draw is consumed otherwise.
inline Action argmax_with_ties(const AgentMemory::Slots& slots, double tie_epsilon, Rng& rng) {
  const double diff = slots[0] - slots[1];
  if (std::abs(diff) <= tie_epsilon) return bernoulli(rng, 0.5) ? 0 : 1;
  return diff > 0.0 ? 0 : 1;
}

// Game-blind choice from the intuitive memory.
inline Action intuitive_choice(const AgentMemory& memory, const LearningParams& params, Rng& rng) {
  return argmax_with_ties(memory.r_bar, params.tie_epsilon, rng);
}

// Best reply under deliberation: the dominant action of the recognised game.
inline Action prescribed_deliberation(const Scenario& scenario, int game_index) {
  const auto dom = dominant_action(scenario.game(game_index));
  if (!dom)
    throw ConfigError("deliberation_rule",
                      "game" + std::to_string(game_index) + " has no dominant action");
  return dom->action;
}

inline Action learned_deliberation(const AgentMemory& memory, int game_index, const LearningParams& params,
                                   Rng& rng) {
  if (!memory.deliberative)
    throw ConfigError("deliberation_rule", "Learned deliberation requires deliberative memories");
  return argmax_with_ties((*memory.deliberative)[game_index], params.tie_epsilon, rng);
}

struct DecisionContext {
  CognitiveMode mode = CognitiveMode::Intuition;
  int game_index = 0;
};

inline void smooth(double& slot, double reward, double alpha) { slot = (1.0 - alpha) * slot + alpha * reward; }

// Exponential smoothing of the chosen action's slot; the other slot is untouched.
// The intuitive memory learns from every decision. Under the Learned rule a
// deliberative decision also updates the bank of the game that was played.
inline void update_memory_in_place(AgentMemory& memory, Action chosen, double reward, const LearningParams& params,
                                   DecisionContext context) {
  smooth(memory.r_bar[chosen], reward, params.alpha);
  if (params.rule == DeliberationRule::Learned && context.mode == CognitiveMode::Deliberation &&
      memory.deliberative)
    smooth((*memory.deliberative)[context.game_index][chosen], reward, params.alpha);
}

inline AgentMemory update_memory(AgentMemory memory, Action chosen, double reward, const LearningParams& params,
                                 DecisionContext context) {
  update_memory_in_place(memory, chosen, reward, params, context);
  return memory;
}

}  // namespace dpcoop

#endif  // DPCOOP_POLICY_HPP
