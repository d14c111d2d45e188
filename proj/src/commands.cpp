#include "tacit/commands.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tacit/environment.hpp"
#include "tacit/evaluation.hpp"
#include "tacit/util.hpp"

namespace tacit {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

AppConfig load_effective_config(const std::string& config_path, const CliOverrides& overrides) {
  AppConfig config = load_app_config(config_path);
  apply_env_overrides(config);
  apply_cli_overrides(config, overrides);
  return config;
}

void write_manifest(const std::filesystem::path& dir, const AppConfig& config,
                    const std::string& command, int episodes_or_games) {
  ordered_json j;
  j["artifact_version"] = kArtifactVersion;
  j["schema_version"] = kSnapshotSchemaVersion;
  j["command"] = command;
  j["count"] = episodes_or_games;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "0x%016" PRIx64, config_hash(config));
  j["config_hash"] = hash;
  j["rng_seed"] = config.run.rng_seed;
  j["created_at"] = format_rfc3339_ns(wall_clock_ns());
  j["config"] = ordered_json::parse(config_to_json(config));
  atomic_write_file(dir / "manifest.json", j.dump(2) + "\n");
}

void write_steps_jsonl(const std::filesystem::path& path, const std::vector<StepReport>& steps) {
  std::ostringstream out;
  for (const StepReport& s : steps) out << step_report_to_json(s) << "\n";
  atomic_write_file(path, out.str());
}

std::vector<StepReport> read_steps_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read step reports: " + path.string());
  std::vector<StepReport> steps;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) steps.push_back(step_report_from_json(line));
  return steps;
}

void print_usage_table(const UsageReport& report) {
  std::printf("%-10s %8s %18s %18s %14s %8s\n", "mode", "steps", "in-tokens", "out-tokens",
              "wait-s", "calls");
  for (const auto& [mode, usage] : report.modes) {
    char in[64], out[64], wait[64];
    if (usage.input_ratio) {
      std::snprintf(in, sizeof(in), "%.1f (%.2f)", usage.mean_input_tokens, *usage.input_ratio);
      std::snprintf(out, sizeof(out), "%.1f (%.2f)", usage.mean_output_tokens,
                    *usage.output_ratio);
      std::snprintf(wait, sizeof(wait), "%.2f (%.2f)", usage.mean_waiting_s, *usage.waiting_ratio);
    } else {
      std::snprintf(in, sizeof(in), "%.1f", usage.mean_input_tokens);
      std::snprintf(out, sizeof(out), "%.1f", usage.mean_output_tokens);
      std::snprintf(wait, sizeof(wait), "%.2f", usage.mean_waiting_s);
    }
    std::printf("%-10s %8lld %18s %18s %14s %8.2f\n", to_string(mode).c_str(),
                static_cast<long long>(usage.steps), in, out, wait, usage.mean_llm_calls);
  }
}

}  // namespace

std::unique_ptr<DatabaseStore> open_snapshot_store(const std::filesystem::path& dir,
                                                   const HashEmbeddingConfig& embedding) {
  SnapshotManifest manifest = read_snapshot_manifest(dir);
  HashEmbeddingConfig effective = embedding;
  if (manifest.embedding_dimension != 0) effective.dimension = manifest.embedding_dimension;
  auto provider = std::make_shared<HashEmbeddingProvider>(effective);
  DatabaseConfig h = manifest.configs.count("H") ? manifest.configs.at("H") : DatabaseConfig{};
  DatabaseConfig v = manifest.configs.count("V") ? manifest.configs.at("V") : DatabaseConfig{};
  DatabaseConfig e = manifest.configs.count("E") ? manifest.configs.at("E") : DatabaseConfig{};
  auto store = std::make_unique<DatabaseStore>(h, v, e, provider);
  import_snapshot(*store, dir, /*replace=*/false);
  return store;
}

int cmd_learn(const LearnArgs& args) {
  if (args.episodes < 1) throw ConfigError("episodes: must be >= 1");
  if (args.out_dir.empty()) throw ConfigError("out: run directory is required");
  AppConfig config = load_effective_config(args.config_path, args.overrides);
  if (args.seed) config.run.rng_seed = *args.seed;
  if (config.scenario_path.empty()) throw ConfigError("scenario: required for learn");

  std::filesystem::path run_dir(args.out_dir);
  DirectoryLock lock(run_dir);

  auto store = make_store(config);
  auto backend = make_backend(config);
  PromptLibrary prompts = PromptLibrary::load(config.templates_dir);
  ScenarioConfig scenario = ScenarioConfig::load(config.scenario_path);
  EnvFactory factory = make_skirmish_factory(scenario);

  std::uint64_t seed = static_cast<std::uint64_t>(config.run.rng_seed);

  // episode-0 baseline, before any learning
  CheckpointEval baseline =
      run_checkpoint_eval(factory, *store, *backend, prompts, config.run.eval_games,
                          config.options, seed, /*checkpoint_index=*/0, /*after_episodes=*/0,
                          config.run.max_steps);
  atomic_write_file(run_dir / "baseline.json", checkpoint_to_json(baseline.record) + "\n");

  int interval = config.run.checkpoint_interval;
  auto checkpoint_fn = [&](int after_episodes) {
    int index = (after_episodes + interval - 1) / interval;
    return run_checkpoint_eval(factory, *store, *backend, prompts, config.run.eval_games,
                               config.options, seed, index, after_episodes, config.run.max_steps)
        .record;
  };

  RunResult result = run_learning(factory, *store, *backend, prompts, args.episodes, config.run,
                                  config.options, checkpoint_fn);

  write_manifest(run_dir, config, "learn", args.episodes);

  std::vector<StepReport> all_steps;
  for (const EpisodeResult& e : result.episodes)
    for (const StepReport& s : e.steps) all_steps.push_back(s);
  write_steps_jsonl(run_dir / "steps.jsonl", all_steps);

  std::ostringstream checkpoints_out;
  for (const CheckpointRecord& c : result.checkpoints)
    checkpoints_out << checkpoint_to_json(c) << "\n";
  atomic_write_file(run_dir / "checkpoints.jsonl", checkpoints_out.str());

  std::vector<CheckpointRecord> curve;
  curve.push_back(baseline.record);
  for (const CheckpointRecord& c : result.checkpoints) curve.push_back(c);
  export_curve(curve, CurveFormat::Csv, run_dir / "curve.csv");
  export_curve(curve, CurveFormat::Json, run_dir / "curve.json");

  atomic_write_file(run_dir / "usage_report.json", usage_report_to_json(usage_report(all_steps)));
  export_snapshot(*store, run_dir / "dbs", backend->describe());

  const CheckpointRecord& last = result.checkpoints.back();
  std::printf("learned %d episodes: wr %.1f%% -> %.1f%%, exploit steps %lld, run dir %s\n",
              args.episodes, baseline.record.wr_percent, last.wr_percent,
              static_cast<long long>(last.exploit_steps), run_dir.string().c_str());
  return 0;
}

int cmd_eval(const EvalArgs& args) {
  if (args.games < 1) throw ConfigError("games: must be >= 1");
  if (args.out_dir.empty()) throw ConfigError("out: output directory is required");
  if (args.mode != "ral" && args.mode != "direct" && args.mode != "reflection")
    throw ConfigError("mode: expected ral|direct|reflection, got \"" + args.mode + "\"");
  if (args.mode == "ral" && args.db_imports.empty())
    throw ConfigError("mode ral requires at least one --db snapshot to exploit");
  if (args.mode != "ral" && !args.db_imports.empty())
    throw ConfigError("mode " + args.mode + " must not import database snapshots");

  AppConfig config = load_effective_config(args.config_path, args.overrides);
  if (args.seed) config.run.rng_seed = *args.seed;
  if (config.scenario_path.empty()) throw ConfigError("scenario: required for eval");
  config.options.reflection = args.mode == "reflection";

  std::filesystem::path out_dir(args.out_dir);
  DirectoryLock lock(out_dir);

  auto store = make_store(config);
  for (const std::string& snapshot : args.db_imports)
    import_snapshot(*store, snapshot, /*replace=*/false);
  ScenarioConfig scenario = ScenarioConfig::load(config.scenario_path);
  if (args.mode == "ral") {
    std::size_t e_segments = 0;
    for (const Segment& s : store->e().snapshot())
      if (s.scenario_tag == scenario.name) ++e_segments;
    if (e_segments == 0)
      throw ConfigError("mode ral: imported snapshots hold no experience for scenario " +
                        scenario.name);
  }

  auto backend = make_backend(config);
  PromptLibrary prompts = PromptLibrary::load(config.templates_dir);
  EnvFactory factory = make_skirmish_factory(scenario);

  CheckpointEval eval = run_checkpoint_eval(
      factory, *store, *backend, prompts, args.games, config.options,
      static_cast<std::uint64_t>(config.run.rng_seed), /*checkpoint_index=*/0,
      /*after_episodes=*/0, config.run.max_steps);

  write_manifest(out_dir, config, "eval-" + args.mode, args.games);
  atomic_write_file(out_dir / "eval_record.json", checkpoint_to_json(eval.record) + "\n");
  write_steps_jsonl(out_dir / "steps.jsonl", eval.steps);
  atomic_write_file(out_dir / "usage_report.json", usage_report_to_json(usage_report(eval.steps)));

  std::printf("eval %s: %d games, wr %.1f%%, kd %s, exploit steps %lld\n", args.mode.c_str(),
              args.games, eval.record.wr_percent, double_to_string(eval.record.kd_ratio).c_str(),
              static_cast<long long>(eval.record.exploit_steps));
  return 0;
}

int cmd_db_export(const DbExportArgs& args) {
  SnapshotManifest manifest = read_snapshot_manifest(args.from_dir);
  auto store = open_snapshot_store(args.from_dir, HashEmbeddingConfig{});
  export_snapshot(*store, args.out_dir,
                  args.source_model.value_or(manifest.source_model));
  std::printf("exported snapshot to %s\n", args.out_dir.c_str());
  return 0;
}

int cmd_db_import(const DbImportArgs& args) {
  SnapshotManifest incoming = read_snapshot_manifest(args.snapshot_dir);
  std::unique_ptr<DatabaseStore> store;
  std::string source_model = incoming.source_model;
  if (std::filesystem::exists(std::filesystem::path(args.into_dir) / "manifest.json")) {
    store = open_snapshot_store(args.into_dir, HashEmbeddingConfig{});
    SnapshotManifest existing = read_snapshot_manifest(args.into_dir);
    if (!existing.source_model.empty()) source_model = existing.source_model;
  } else {
    HashEmbeddingConfig emb;
    if (incoming.embedding_dimension != 0) emb.dimension = incoming.embedding_dimension;
    auto provider = std::make_shared<HashEmbeddingProvider>(emb);
    DatabaseConfig h = incoming.configs.count("H") ? incoming.configs.at("H") : DatabaseConfig{};
    DatabaseConfig v = incoming.configs.count("V") ? incoming.configs.at("V") : DatabaseConfig{};
    DatabaseConfig e = incoming.configs.count("E") ? incoming.configs.at("E") : DatabaseConfig{};
    store = std::make_unique<DatabaseStore>(h, v, e, provider);
  }
  import_snapshot(*store, args.snapshot_dir, /*replace=*/!args.merge);
  export_snapshot(*store, args.into_dir, source_model);
  DbCounts counts = count_segments(*store);
  std::printf("imported into %s (H %zu, V %zu, E %zu)\n", args.into_dir.c_str(),
              counts.per_db["H"], counts.per_db["V"], counts.per_db["E"]);
  return 0;
}

int cmd_db_inspect(const DbInspectArgs& args) {
  SnapshotManifest manifest = read_snapshot_manifest(args.dir);
  auto store = open_snapshot_store(args.dir, HashEmbeddingConfig{});
  DbCounts counts = count_segments(*store);
  std::printf("snapshot %s (schema v%d, source model: %s)\n", args.dir.c_str(),
              manifest.schema_version,
              manifest.source_model.empty() ? "unknown" : manifest.source_model.c_str());
  for (const auto& [db, n] : counts.per_db) {
    std::printf("  %s: %zu segments\n", db.c_str(), n);
    auto it = counts.per_db_scenario.find(db);
    if (it != counts.per_db_scenario.end())
      for (const auto& [scenario, count] : it->second)
        std::printf("    %s: %zu\n", scenario.c_str(), count);
  }
  // newest segments per database
  for (DbName name : {DbName::H, DbName::V, DbName::E}) {
    const Database& db = store->by_name(name);
    const Segment* newest = nullptr;
    for (const Segment& s : db.snapshot())
      if (!newest || s.updated_at_ns > newest->updated_at_ns) newest = &s;
    if (newest)
      std::printf("  newest %s: %s (rev %lld, %s)\n", to_string(name).c_str(),
                  newest->id.c_str(), static_cast<long long>(newest->revision),
                  format_rfc3339_ns(newest->updated_at_ns).c_str());
  }
  return 0;
}

int cmd_stats(const StatsArgs& args) {
  std::filesystem::path steps_path = std::filesystem::path(args.run_dir) / "steps.jsonl";
  if (!std::filesystem::exists(steps_path))
    throw std::runtime_error("no step reports found at " + steps_path.string() +
                             " (is this a run directory?)");
  UsageReport report = usage_report(read_steps_jsonl(steps_path));
  print_usage_table(report);
  if (args.out_path) atomic_write_file(*args.out_path, usage_report_to_json(report));
  return 0;
}

int cmd_curve(const CurveArgs& args) {
  if (args.format != "csv" && args.format != "json")
    throw ConfigError("format: expected csv|json");
  std::filesystem::path run_dir(args.run_dir);
  std::vector<CheckpointRecord> checkpoints;
  std::filesystem::path baseline_path = run_dir / "baseline.json";
  if (std::filesystem::exists(baseline_path)) {
    std::string content = read_file(baseline_path);
    if (!content.empty()) checkpoints.push_back(checkpoint_from_json(content));
  }
  std::filesystem::path checkpoints_path = run_dir / "checkpoints.jsonl";
  if (!std::filesystem::exists(checkpoints_path))
    throw std::runtime_error("no checkpoints found at " + checkpoints_path.string());
  std::ifstream in(checkpoints_path);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) checkpoints.push_back(checkpoint_from_json(line));
  export_curve(checkpoints, args.format == "csv" ? CurveFormat::Csv : CurveFormat::Json,
               args.out_path);
  std::printf("wrote %zu checkpoint rows to %s\n", checkpoints.size(), args.out_path.c_str());
  return 0;
}

}  // namespace tacit
