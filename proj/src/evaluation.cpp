#include "tacit/evaluation.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tacit/util.hpp"

namespace tacit {

using ordered_json = nlohmann::ordered_json;

CheckpointEval run_checkpoint_eval(const EnvFactory& env_factory, DatabaseStore& dbs,
                                   ChatBackend& backend, const PromptLibrary& prompts, int games,
                                   const OrchestratorOptions& options, std::uint64_t seed,
                                   int checkpoint_index, int after_episodes, int max_steps) {
  if (games < 1) throw std::invalid_argument("run_checkpoint_eval: games must be >= 1");

  const std::uint64_t hash_before = dbs.content_hash();
  LearningToggles toggles{false};

  CheckpointEval eval;
  eval.record.after_episodes = after_episodes;
  eval.record.games = games;

  double total_killed = 0.0, total_lost = 0.0;
  for (int game = 0; game < games; ++game) {
    std::uint64_t game_seed =
        SeededRng::derive(SeededRng::derive(seed, 0xC4u, checkpoint_index), game);
    auto env = env_factory(game, game_seed);
    SeededRng rng(game_seed);
    EpisodeResult episode =
        run_episode(*env, dbs, backend, prompts, toggles, rng, options, max_steps);
    if (episode.faulted) {
      eval.record.faults += 1;  // counted as a loss
    } else if (episode.status == EnvStatus::Won) {
      eval.record.wins += 1;
    }
    total_killed += episode.outcome.value_killed;
    total_lost += episode.outcome.value_lost;
    eval.record.usage += episode.usage_total;
    for (const StepReport& s : episode.steps) {
      switch (s.mode) {
        case ModeKind::Direct: eval.record.direct_steps += 1; break;
        case ModeKind::Explore: eval.record.explore_steps += 1; break;
        case ModeKind::Exploit: eval.record.exploit_steps += 1; break;
      }
    }
    for (StepReport& s : episode.steps) eval.steps.push_back(std::move(s));
  }

  eval.record.wr_percent = wr(eval.record.wins, games);
  eval.record.kd_ratio = kd(total_killed, total_lost);
  eval.record.value_killed_mean = total_killed / games;

  if (dbs.content_hash() != hash_before)
    throw std::logic_error("checkpoint evaluation modified a database");
  return eval;
}

UsageReport usage_report(const std::vector<StepReport>& steps) {
  UsageReport report;
  if (steps.empty()) return report;

  struct Sum {
    std::int64_t n = 0;
    double input = 0, output = 0, wait = 0, calls = 0;
  };
  std::map<ModeKind, Sum> sums;
  for (const StepReport& s : steps) {
    Sum& sum = sums[s.mode];
    sum.n += 1;
    sum.input += static_cast<double>(s.usage.input_tokens);
    sum.output += static_cast<double>(s.usage.output_tokens);
    sum.wait += s.usage.latency_s;
    sum.calls += s.llm_calls;
  }
  for (const auto& [mode, sum] : sums) {
    ModeUsage usage;
    usage.steps = sum.n;
    usage.mean_input_tokens = sum.input / sum.n;
    usage.mean_output_tokens = sum.output / sum.n;
    usage.mean_waiting_s = sum.wait / sum.n;
    usage.mean_llm_calls = sum.calls / sum.n;
    report.modes[mode] = usage;
  }
  auto direct = report.modes.find(ModeKind::Direct);
  if (direct != report.modes.end()) {
    const ModeUsage& base = direct->second;
    // a zero baseline only matches a zero value (ratio 1 by construction);
    // anything above a zero baseline is reported as infinite
    auto ratio = [](double value, double baseline) {
      if (baseline == 0.0)
        return value == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
      return value / baseline;
    };
    for (auto& [mode, usage] : report.modes) {
      usage.input_ratio = ratio(usage.mean_input_tokens, base.mean_input_tokens);
      usage.output_ratio = ratio(usage.mean_output_tokens, base.mean_output_tokens);
      usage.waiting_ratio = ratio(usage.mean_waiting_s, base.mean_waiting_s);
    }
  }
  return report;
}

std::string usage_report_to_json(const UsageReport& report) {
  ordered_json j = ordered_json::object();
  for (const auto& [mode, usage] : report.modes) {
    ordered_json m;
    m["steps"] = usage.steps;
    m["mean_input_tokens"] = usage.mean_input_tokens;
    m["mean_output_tokens"] = usage.mean_output_tokens;
    m["mean_waiting_s"] = usage.mean_waiting_s;
    m["mean_llm_calls"] = usage.mean_llm_calls;
    if (usage.input_ratio) {
      auto ratio_json = [](double r) -> ordered_json {
        if (std::isinf(r)) return "inf";
        return r;
      };
      ordered_json r;
      r["input"] = ratio_json(*usage.input_ratio);
      r["output"] = ratio_json(*usage.output_ratio);
      r["waiting"] = ratio_json(*usage.waiting_ratio);
      m["relative_to_direct"] = r;
    }
    j[to_string(mode)] = m;
  }
  return j.dump(2) + "\n";
}

namespace {

ordered_json curve_row(const CheckpointRecord& c) {
  ordered_json row;
  row["after_episodes"] = c.after_episodes;
  row["wr"] = c.wr_percent;
  if (std::isinf(c.kd_ratio)) row["kd"] = "inf";
  else row["kd"] = c.kd_ratio;
  row["value_killed_mean"] = c.value_killed_mean;
  return row;
}

}  // namespace

void export_curve(const std::vector<CheckpointRecord>& checkpoints, CurveFormat format,
                  const std::filesystem::path& path) {
  if (format == CurveFormat::Csv) {
    std::ostringstream out;
    out << "after_episodes,wr,kd,value_killed_mean\n";
    for (const CheckpointRecord& c : checkpoints) {
      out << c.after_episodes << "," << double_to_string(c.wr_percent) << ","
          << double_to_string(c.kd_ratio) << "," << double_to_string(c.value_killed_mean) << "\n";
    }
    atomic_write_file(path, out.str());
  } else {
    ordered_json rows = ordered_json::array();
    for (const CheckpointRecord& c : checkpoints) rows.push_back(curve_row(c));
    atomic_write_file(path, rows.dump(2) + "\n");
  }
}

std::vector<CheckpointRecord> import_curve(CurveFormat format, const std::filesystem::path& path) {
  std::vector<CheckpointRecord> out;
  std::string content = read_file(path);
  if (format == CurveFormat::Csv) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line) || line != "after_episodes,wr,kd,value_killed_mean")
      throw std::runtime_error("curve csv: bad header in " + path.string());
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string field;
      CheckpointRecord c;
      std::getline(row, field, ',');
      c.after_episodes = std::stoi(field);
      std::getline(row, field, ',');
      c.wr_percent = double_from_string(field);
      std::getline(row, field, ',');
      c.kd_ratio = double_from_string(field);
      std::getline(row, field, ',');
      c.value_killed_mean = double_from_string(field);
      out.push_back(c);
    }
  } else {
    ordered_json rows = ordered_json::parse(content);
    for (const auto& row : rows) {
      CheckpointRecord c;
      c.after_episodes = row.at("after_episodes").get<int>();
      c.wr_percent = row.at("wr").get<double>();
      if (row.at("kd").is_string()) c.kd_ratio = double_from_string(row.at("kd").get<std::string>());
      else c.kd_ratio = row.at("kd").get<double>();
      c.value_killed_mean = row.at("value_killed_mean").get<double>();
      out.push_back(c);
    }
  }
  return out;
}

std::string checkpoint_to_json(const CheckpointRecord& c) {
  ordered_json j;
  j["after_episodes"] = c.after_episodes;
  j["games"] = c.games;
  j["wins"] = c.wins;
  j["wr_percent"] = c.wr_percent;
  if (std::isinf(c.kd_ratio)) j["kd"] = "inf";
  else j["kd"] = c.kd_ratio;
  j["value_killed_mean"] = c.value_killed_mean;
  j["direct_steps"] = c.direct_steps;
  j["explore_steps"] = c.explore_steps;
  j["exploit_steps"] = c.exploit_steps;
  j["faults"] = c.faults;
  ordered_json usage;
  usage["input_tokens"] = c.usage.input_tokens;
  usage["output_tokens"] = c.usage.output_tokens;
  usage["latency_s"] = c.usage.latency_s;
  j["usage"] = usage;
  return j.dump();
}

CheckpointRecord checkpoint_from_json(const std::string& line) {
  ordered_json j = ordered_json::parse(line);
  CheckpointRecord c;
  c.after_episodes = j.at("after_episodes").get<int>();
  c.games = j.at("games").get<int>();
  c.wins = j.at("wins").get<int>();
  c.wr_percent = j.at("wr_percent").get<double>();
  if (j.at("kd").is_string()) c.kd_ratio = double_from_string(j.at("kd").get<std::string>());
  else c.kd_ratio = j.at("kd").get<double>();
  c.value_killed_mean = j.at("value_killed_mean").get<double>();
  c.direct_steps = j.value("direct_steps", 0);
  c.explore_steps = j.value("explore_steps", 0);
  c.exploit_steps = j.value("exploit_steps", 0);
  c.faults = j.value("faults", 0);
  if (j.contains("usage")) {
    c.usage.input_tokens = j["usage"].value("input_tokens", 0);
    c.usage.output_tokens = j["usage"].value("output_tokens", 0);
    c.usage.latency_s = j["usage"].value("latency_s", 0.0);
  }
  return c;
}

std::string step_report_to_json(const StepReport& report) {
  ordered_json j;
  j["episode"] = report.episode;
  j["step"] = report.step;
  j["mode"] = to_string(report.mode);
  ordered_json tasks = ordered_json::array();
  for (LearningTask t : report.tasks) tasks.push_back(to_string(t));
  j["tasks"] = tasks;
  ordered_json writes = ordered_json::array();
  for (const WriteRecord& w : report.writes) {
    ordered_json wj;
    wj["db"] = to_string(w.db);
    wj["outcome"] = w.kind == WriteOutcome::Kind::Created ? "created" : "updated";
    wj["id"] = w.segment_id;
    writes.push_back(wj);
  }
  j["writes"] = writes;
  ordered_json usage;
  usage["input_tokens"] = report.usage.input_tokens;
  usage["output_tokens"] = report.usage.output_tokens;
  usage["latency_s"] = report.usage.latency_s;
  j["usage"] = usage;
  j["llm_calls"] = report.llm_calls;
  j["action_failed"] = report.action_failed;
  j["counts"] = {{"h", report.count_h}, {"v", report.count_v}, {"e", report.count_e}};
  j["warnings"] = report.warnings;
  return j.dump();
}

StepReport step_report_from_json(const std::string& line) {
  ordered_json j = ordered_json::parse(line);
  StepReport r;
  r.episode = j.at("episode").get<int>();
  r.step = j.at("step").get<int>();
  std::string mode = j.at("mode").get<std::string>();
  r.mode = mode == "Direct" ? ModeKind::Direct
           : mode == "Explore" ? ModeKind::Explore
                               : ModeKind::Exploit;
  for (const auto& t : j.value("tasks", ordered_json::array())) {
    std::string name = t.get<std::string>();
    if (name == "Hypothesize") r.tasks.insert(LearningTask::Hypothesize);
    else if (name == "Validate") r.tasks.insert(LearningTask::Validate);
    else if (name == "Summarize") r.tasks.insert(LearningTask::Summarize);
  }
  for (const auto& wj : j.value("writes", ordered_json::array())) {
    WriteRecord w;
    w.db = db_name_from_string(wj.at("db").get<std::string>());
    w.kind = wj.at("outcome").get<std::string>() == "created" ? WriteOutcome::Kind::Created
                                                              : WriteOutcome::Kind::Updated;
    w.segment_id = wj.at("id").get<std::string>();
    r.writes.push_back(w);
  }
  if (j.contains("usage")) {
    r.usage.input_tokens = j["usage"].value("input_tokens", 0);
    r.usage.output_tokens = j["usage"].value("output_tokens", 0);
    r.usage.latency_s = j["usage"].value("latency_s", 0.0);
  }
  r.llm_calls = j.value("llm_calls", 0);
  r.action_failed = j.value("action_failed", false);
  if (j.contains("counts")) {
    r.count_h = j["counts"].value("h", 0);
    r.count_v = j["counts"].value("v", 0);
    r.count_e = j["counts"].value("e", 0);
  }
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

}  // namespace tacit
