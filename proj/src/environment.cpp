#include "tacit/environment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tacit/util.hpp"

namespace tacit {

std::string to_string(EnvStatus status) {
  switch (status) {
    case EnvStatus::Live: return "live";
    case EnvStatus::Won: return "won";
    case EnvStatus::Lost: return "lost";
    case EnvStatus::Truncated: return "truncated";
  }
  return "?";
}

namespace {

double unit_training_value(const Unit& u) { return u.minerals + 2.0 * u.gas; }

double distance(const Unit& a, const Unit& b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

Unit unit_from_json(const nlohmann::json& j, Team team) {
  Unit u;
  u.tag = j.at("tag").get<std::string>();
  u.team = team;
  u.type = j.at("type").get<std::string>();
  u.hp = j.at("hp").get<double>();
  u.dps = j.at("dps").get<double>();
  u.range = j.at("range").get<double>();
  u.speed = j.at("speed").get<double>();
  u.x = j.at("pos").at(0).get<int>();
  u.y = j.at("pos").at(1).get<int>();
  u.minerals = j.value("minerals", 0);
  u.gas = j.value("gas", 0);
  u.initial_hp = u.hp;
  return u;
}

std::string format_hp(double hp) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", hp);
  return buf;
}

std::string format_distance(double d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", d);
  return buf;
}

std::string kind_placeholder(ArgKind kind) {
  switch (kind) {
    case ArgKind::Tag: return "tag";
    case ArgKind::Screen: return "screen";
    case ArgKind::Minimap: return "minimap";
  }
  return "?";
}

}  // namespace

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path));
  ScenarioConfig config;
  config.name = j.at("name").get<std::string>();
  config.max_ticks = j.value("max_ticks", 60);
  config.victory = j.value("victory", "eliminate_all");
  for (const auto& uj : j.at("teams").at("ally")) config.allies.push_back(unit_from_json(uj, Team::Ally));
  for (const auto& uj : j.at("teams").at("enemy")) config.enemies.push_back(unit_from_json(uj, Team::Enemy));
  config.validate();
  return config;
}

void ScenarioConfig::validate() const {
  if (name.empty()) throw EnvError("scenario: name must be non-empty");
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      throw EnvError("scenario: name must be filename-safe ([A-Za-z0-9_-]): " + name);
  if (max_ticks < 1) throw EnvError("scenario: max_ticks must be >= 1");
  if (victory != "eliminate_all") throw EnvError("scenario: unsupported victory condition: " + victory);
  if (allies.empty() || enemies.empty())
    throw EnvError("scenario: both teams need at least one unit");
  std::vector<std::string> tags;
  for (const auto& list : {allies, enemies})
    for (const Unit& u : list) {
      if (u.hp <= 0) throw EnvError("scenario: unit " + u.tag + " must spawn with hp > 0");
      if (u.minerals < 0 || u.gas < 0) throw EnvError("scenario: negative training cost");
      tags.push_back(u.tag);
    }
  std::sort(tags.begin(), tags.end());
  if (std::adjacent_find(tags.begin(), tags.end()) != tags.end())
    throw EnvError("scenario: unit tags must be unique");
}

ActionVocabulary default_skirmish_vocabulary() {
  return ActionVocabulary({
      {"Attack_Unit", {ArgKind::Tag}},
      {"Move_Screen", {ArgKind::Screen}},
      {"Select_Unit_Attack_Unit", {ArgKind::Tag, ArgKind::Tag}},
      {"Select_Unit_Move_Screen", {ArgKind::Tag, ArgKind::Screen}},
  });
}

std::string render_observation_text(const SkirmishState& state, const std::string& scenario_name,
                                    int max_ticks, const ActionVocabulary& vocab) {
  std::ostringstream out;
  out << "Scenario: " << scenario_name << "\n";
  out << "Tick: " << state.tick << " / " << max_ticks << "\n";

  std::vector<const Unit*> allies, enemies;
  for (const Unit& u : state.units) {
    if (!u.alive()) continue;
    (u.team == Team::Ally ? allies : enemies).push_back(&u);
  }

  out << "Your units:\n";
  if (allies.empty()) {
    out << "  (none alive)\n";
  } else {
    for (const Unit* u : allies) {
      out << "  - tag " << u->tag << " " << u->type << " hp " << format_hp(u->hp) << " pos ["
          << u->x << ", " << u->y << "]";
      const Unit* nearest = nullptr;
      double best = 0.0;
      for (const Unit* e : enemies) {
        double d = distance(*u, *e);
        if (!nearest || d < best || (d == best && e->tag < nearest->tag)) {
          nearest = e;
          best = d;
        }
      }
      if (nearest)
        out << " nearest enemy " << nearest->tag << " dist " << format_distance(best);
      out << "\n";
    }
  }

  out << "Enemy units:\n";
  if (enemies.empty()) {
    out << "  (no visible enemies)\n";
  } else {
    for (const Unit* u : enemies) {
      out << "  - tag " << u->tag << " " << u->type << " hp " << format_hp(u->hp) << " pos ["
          << u->x << ", " << u->y << "]\n";
    }
  }

  out << "Available actions:\n";
  for (const VocabularyEntry& e : vocab.entries()) {
    out << "  <" << e.verb << "(";
    for (std::size_t i = 0; i < e.arg_kinds.size(); ++i) {
      if (i > 0) out << ", ";
      out << kind_placeholder(e.arg_kinds[i]);
    }
    out << ")>\n";
  }
  return out.str();
}

SkirmishEnv::SkirmishEnv(ScenarioConfig config, int episode_index, std::uint64_t seed)
    : config_(std::move(config)),
      vocab_(default_skirmish_vocabulary()),
      episode_index_(episode_index) {
  config_.validate();
  state_.rng_seed = seed;
  reset();
}

TextObservation SkirmishEnv::reset() {
  state_.units.clear();
  for (const Unit& u : config_.allies) state_.units.push_back(u);
  for (const Unit& u : config_.enemies) state_.units.push_back(u);
  for (Unit& u : state_.units) {
    u.initial_hp = u.hp;
    u.target_tag.reset();
    u.move_dest.reset();
  }
  state_.tick = 0;
  status_ = EnvStatus::Live;
  value_killed_ = 0.0;
  value_lost_ = 0.0;
  total_enemy_value_ = 0.0;
  for (const Unit& u : config_.enemies) total_enemy_value_ += unit_training_value(u);
  return observe();
}

TextObservation SkirmishEnv::observe() const {
  return make_observation(config_.name, episode_index_, state_.tick,
                          render_observation_text(state_, config_.name, config_.max_ticks, vocab_));
}

Unit* SkirmishEnv::find_unit(const std::string& tag) {
  for (Unit& u : state_.units)
    if (u.tag == tag && u.alive()) return &u;
  return nullptr;
}

void SkirmishEnv::apply_directive(const ActionDirective& d) {
  auto tag_of = [](const ActionArg& a) { return std::get<UnitTag>(a).value; };
  auto coord_of = [](const ActionArg& a) {
    if (const auto* sc = std::get_if<ScreenCoord>(&a)) return std::pair<int, int>{sc->x, sc->y};
    const auto& mm = std::get<MinimapCoord>(a);
    return std::pair<int, int>{mm.x, mm.y};
  };

  if (d.verb == "Attack_Unit") {
    Unit* target = find_unit(tag_of(d.args[0]));
    if (!target || target->team != Team::Enemy) return;
    for (Unit& u : state_.units)
      if (u.team == Team::Ally && u.alive()) {
        u.target_tag = target->tag;
        u.move_dest.reset();
      }
  } else if (d.verb == "Move_Screen") {
    auto [x, y] = coord_of(d.args[0]);
    for (Unit& u : state_.units)
      if (u.team == Team::Ally && u.alive()) {
        u.move_dest = std::make_pair(x, y);
        u.target_tag.reset();
      }
  } else if (d.verb == "Select_Unit_Attack_Unit") {
    Unit* actor = find_unit(tag_of(d.args[0]));
    Unit* target = find_unit(tag_of(d.args[1]));
    if (!actor || actor->team != Team::Ally || !target || target->team != Team::Enemy) return;
    actor->target_tag = target->tag;
    actor->move_dest.reset();
  } else if (d.verb == "Select_Unit_Move_Screen") {
    Unit* actor = find_unit(tag_of(d.args[0]));
    if (!actor || actor->team != Team::Ally) return;
    auto [x, y] = coord_of(d.args[1]);
    actor->move_dest = std::make_pair(x, y);
    actor->target_tag.reset();
  }
}

void SkirmishEnv::submit(const TextAction& action) {
  if (is_terminal(status_)) throw EnvError("submit after terminal state");
  for (const ActionDirective& d : action.directives) apply_directive(d);
}

std::pair<TextObservation, EnvStatus> SkirmishEnv::advance() {
  if (is_terminal(status_)) throw EnvError("advance after terminal state");

  // enemy AI: chase and strike the nearest living ally, ties to the smaller tag
  for (Unit& u : state_.units) {
    if (u.team != Team::Enemy || !u.alive()) continue;
    const Unit* nearest = nullptr;
    double best = 0.0;
    for (const Unit& a : state_.units) {
      if (a.team != Team::Ally || !a.alive()) continue;
      double d = distance(u, a);
      if (!nearest || d < best || (d == best && a.tag < nearest->tag)) {
        nearest = &a;
        best = d;
      }
    }
    if (nearest) u.target_tag = nearest->tag;
  }

  // movement: explicit destinations first, then chase when out of range
  for (Unit& u : state_.units) {
    if (!u.alive()) continue;
    std::optional<std::pair<int, int>> goal;
    if (u.move_dest) {
      goal = u.move_dest;
    } else if (u.target_tag) {
      Unit* target = find_unit(*u.target_tag);
      if (target && distance(u, *target) > u.range) goal = std::make_pair(target->x, target->y);
    }
    if (!goal) continue;
    int step = static_cast<int>(u.speed);
    u.x += std::clamp(goal->first - u.x, -step, step);
    u.y += std::clamp(goal->second - u.y, -step, step);
    if (u.move_dest && u.x == goal->first && u.y == goal->second) u.move_dest.reset();
  }

  // simultaneous damage
  std::vector<double> incoming(state_.units.size(), 0.0);
  for (const Unit& u : state_.units) {
    if (!u.alive() || !u.target_tag) continue;
    for (std::size_t i = 0; i < state_.units.size(); ++i) {
      Unit& t = state_.units[i];
      if (t.tag == *u.target_tag && t.alive() && t.team != u.team &&
          distance(u, t) <= u.range) {
        incoming[i] += u.dps;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < state_.units.size(); ++i) {
    if (incoming[i] <= 0.0) continue;
    Unit& t = state_.units[i];
    t.hp = std::max(0.0, t.hp - incoming[i]);
    if (!t.alive()) {
      if (t.team == Team::Enemy) value_killed_ += unit_training_value(t);
      else value_lost_ += unit_training_value(t);
      t.target_tag.reset();
      t.move_dest.reset();
    }
  }

  state_.tick += 1;

  bool allies_alive = false, enemies_alive = false;
  for (const Unit& u : state_.units) {
    if (!u.alive()) continue;
    (u.team == Team::Ally ? allies_alive : enemies_alive) = true;
  }
  if (!enemies_alive && allies_alive) status_ = EnvStatus::Won;
  else if (!allies_alive) status_ = EnvStatus::Lost;
  else if (state_.tick >= config_.max_ticks) status_ = EnvStatus::Truncated;

  return {observe(), status_};
}

OutcomeSummary SkirmishEnv::outcome() const {
  OutcomeSummary out;
  out.won = status_ == EnvStatus::Won;
  out.value_killed = value_killed_;
  out.value_lost = value_lost_;
  out.steps = state_.tick;
  return out;
}

EnvFactory make_skirmish_factory(ScenarioConfig config) {
  return [config](int episode_index, std::uint64_t seed) {
    return std::make_unique<SkirmishEnv>(config, episode_index, seed);
  };
}

}  // namespace tacit
