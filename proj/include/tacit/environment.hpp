#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tacit/grammar.hpp"
#include "tacit/types.hpp"

namespace tacit {

struct EnvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EnvStatus { Live, Won, Lost, Truncated };
std::string to_string(EnvStatus status);
inline bool is_terminal(EnvStatus s) { return s != EnvStatus::Live; }

struct OutcomeSummary {
  bool won = false;
  double value_killed = 0.0;  // summed unit values of destroyed enemies
  double value_lost = 0.0;    // summed unit values of destroyed allies
  int steps = 0;
};

// Text-in/text-out sequential decision environment. Reward is deliberately
// absent from this contract. External environments plug in through the same
// interface.
class EnvironmentInterface {
 public:
  virtual ~EnvironmentInterface() = default;
  virtual const ActionVocabulary& vocabulary() const = 0;
  virtual std::string scenario_id() const = 0;
  virtual TextObservation reset() = 0;
  virtual TextObservation observe() const = 0;  // current state, no advance
  virtual void submit(const TextAction& action) = 0;
  virtual std::pair<TextObservation, EnvStatus> advance() = 0;  // error after terminal
  virtual EnvStatus status() const = 0;
  virtual OutcomeSummary outcome() const = 0;
  virtual TextAction noop_action() const { return {}; }
};

using EnvFactory =
    std::function<std::unique_ptr<EnvironmentInterface>(int episode_index, std::uint64_t seed)>;

enum class Team { Ally, Enemy };

struct Unit {
  std::string tag;
  Team team = Team::Ally;
  std::string type;
  double hp = 0.0;
  double dps = 0.0;
  double range = 1.0;
  double speed = 0.0;
  int x = 0, y = 0;
  int minerals = 0;
  int gas = 0;
  // runtime combat state
  double initial_hp = 0.0;
  std::optional<std::string> target_tag;
  std::optional<std::pair<int, int>> move_dest;

  bool alive() const { return hp > 0.0; }
};

struct SkirmishState {
  std::vector<Unit> units;
  int tick = 0;
  std::uint64_t rng_seed = 0;
};

// Declarative scenario: team rosters with stats and training costs, the
// victory condition, the tick cap.
struct ScenarioConfig {
  std::string name;
  int max_ticks = 60;
  std::string victory = "eliminate_all";
  std::vector<Unit> allies;
  std::vector<Unit> enemies;

  static ScenarioConfig load(const std::filesystem::path& path);
  void validate() const;
};

// Deterministic text renderer: rosters (tag, type, hp, position), nearest
// enemy distances, the available-actions block.
std::string render_observation_text(const SkirmishState& state, const std::string& scenario_name,
                                    int max_ticks, const ActionVocabulary& vocab);

// Built-in micro-skirmish. One tick per step: movement (per-axis clamp by
// speed), simultaneous damage from every in-range attacker, death removal,
// then the victory check. Fully deterministic in (config, seed, actions).
class SkirmishEnv final : public EnvironmentInterface {
 public:
  SkirmishEnv(ScenarioConfig config, int episode_index, std::uint64_t seed);

  const ActionVocabulary& vocabulary() const override { return vocab_; }
  std::string scenario_id() const override { return config_.name; }
  TextObservation reset() override;
  TextObservation observe() const override;
  void submit(const TextAction& action) override;
  std::pair<TextObservation, EnvStatus> advance() override;
  EnvStatus status() const override { return status_; }
  OutcomeSummary outcome() const override;

  const SkirmishState& state() const { return state_; }

 private:
  Unit* find_unit(const std::string& tag);
  void apply_directive(const ActionDirective& d);

  ScenarioConfig config_;
  ActionVocabulary vocab_;
  SkirmishState state_;
  EnvStatus status_ = EnvStatus::Live;
  int episode_index_ = 0;
  double value_killed_ = 0.0;
  double value_lost_ = 0.0;
  double total_enemy_value_ = 0.0;
};

// {Attack_Unit(tag), Move_Screen(screen), Select_Unit_Attack_Unit(tag, tag),
//  Select_Unit_Move_Screen(tag, screen)}
ActionVocabulary default_skirmish_vocabulary();

EnvFactory make_skirmish_factory(ScenarioConfig config);

}  // namespace tacit
