#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "tacit/gateway.hpp"

namespace tacit {

struct UnitCost {
  int minerals = 0;
  int gas = 0;
};

// Training value of one unit; gas counts double (halved collection speed).
inline double unit_value(const UnitCost& cost) { return cost.minerals + 2.0 * cost.gas; }

// Kill/death value ratio. Conventions for empty denominators: 0/0 -> 0,
// x/0 -> +infinity (serialized as the string "inf").
inline double kd(double value_killed, double value_lost) {
  if (value_lost == 0.0)
    return value_killed == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return value_killed / value_lost;
}

// Win rate in percent, exact rational times 100.
inline double wr(int wins, int games) {
  if (games < 1) throw std::invalid_argument("wr: games must be >= 1");
  if (wins < 0 || wins > games) throw std::invalid_argument("wr: wins must be in [0, games]");
  return 100.0 * static_cast<double>(wins) / static_cast<double>(games);
}

// One checkpoint evaluation: fixed games with learning disabled.
struct CheckpointRecord {
  int after_episodes = 0;
  int games = 0;
  int wins = 0;
  double wr_percent = 0.0;
  double kd_ratio = 0.0;
  double value_killed_mean = 0.0;
  UsageStats usage;
  // per-mode step counts observed across the evaluation games
  std::int64_t direct_steps = 0;
  std::int64_t explore_steps = 0;
  std::int64_t exploit_steps = 0;
  int faults = 0;  // environment faults, counted as losses
};

}  // namespace tacit
