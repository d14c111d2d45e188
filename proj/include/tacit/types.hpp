#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tacit/tokens.hpp"

namespace tacit {

// One rendered environment state in text form. Immutable value object.
struct TextObservation {
  std::string scenario_id;
  std::int64_t episode_index = 0;
  std::int64_t step_index = 0;
  std::string body;
  std::int64_t token_estimate = 0;
};

inline TextObservation make_observation(std::string scenario_id, std::int64_t episode,
                                        std::int64_t step, std::string body) {
  TextObservation o;
  o.scenario_id = std::move(scenario_id);
  o.episode_index = episode;
  o.step_index = step;
  o.token_estimate = estimate_tokens(body);
  o.body = std::move(body);
  return o;
}

// Directive arguments. Unit tags are opaque strings (hex "0x..." or decimal);
// coordinates are integer pairs rendered as "[x, y]".
struct UnitTag {
  std::string value;
  bool operator==(const UnitTag&) const = default;
};
struct ScreenCoord {
  int x = 0, y = 0;
  bool operator==(const ScreenCoord&) const = default;
};
struct MinimapCoord {
  int x = 0, y = 0;
  bool operator==(const MinimapCoord&) const = default;
};
using ActionArg = std::variant<UnitTag, ScreenCoord, MinimapCoord>;

struct ActionDirective {
  std::string verb;
  std::vector<ActionArg> args;
  bool operator==(const ActionDirective&) const = default;
};

// The raw answer region of an LLM reply plus the directives extracted from it.
struct TextAction {
  std::string body;
  std::vector<ActionDirective> directives;
};

// One (observation, action, next observation) triple; the unit of learning.
struct Transition {
  TextObservation before;
  TextAction action;
  TextObservation after;
};

inline void validate_transition(const Transition& t) {
  if (t.after.step_index != t.before.step_index + 1)
    throw std::invalid_argument("transition: after.step_index must be before.step_index + 1");
  if (t.after.scenario_id != t.before.scenario_id ||
      t.after.episode_index != t.before.episode_index)
    throw std::invalid_argument("transition: scenario/episode mismatch");
}

// Retrieval knobs for one database: score threshold, top-k, update rate.
struct DatabaseConfig {
  double threshold = 0.0;
  int top_k = 5;
  double update_rate = 0.0;
};

inline void validate_config(const DatabaseConfig& c) {
  if (c.threshold < 0.0 || c.threshold > 1.0)
    throw std::invalid_argument("database config: threshold must be in [0,1]");
  if (c.top_k < 1) throw std::invalid_argument("database config: top_k must be >= 1");
  if (c.update_rate < 0.0 || c.update_rate > 1.0)
    throw std::invalid_argument("database config: update_rate must be in [0,1]");
}

struct RunConfig {
  int parallel_size = 1;
  int checkpoint_interval = 5;
  int eval_games = 20;
  std::int64_t rng_seed = 0;
  bool learning_enabled = true;
  int max_steps = 200;  // per-episode safety cap on top of the env's own limit
};

inline void validate_config(const RunConfig& c) {
  if (c.parallel_size < 1) throw std::invalid_argument("run config: parallel_size must be >= 1");
  if (c.checkpoint_interval < 1)
    throw std::invalid_argument("run config: checkpoint_interval must be >= 1");
  if (c.eval_games < 1) throw std::invalid_argument("run config: eval_games must be >= 1");
  if (c.max_steps < 1) throw std::invalid_argument("run config: max_steps must be >= 1");
}

}  // namespace tacit
