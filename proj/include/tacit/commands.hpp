#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tacit/config.hpp"

namespace tacit {

struct LearnArgs {
  std::string config_path;
  int episodes = 25;
  std::optional<std::int64_t> seed;
  std::string out_dir;
  CliOverrides overrides;
};

// Full learning run: baseline evaluation, the learning episodes with interval
// checkpoints, then run artifacts (manifest, steps.jsonl, checkpoints.jsonl,
// baseline.json, curve files, usage report, database snapshot) under out_dir.
int cmd_learn(const LearnArgs& args);

struct EvalArgs {
  std::string config_path;
  std::string mode = "direct";  // "ral" | "direct" | "reflection"
  int games = 20;
  std::vector<std::string> db_imports;  // snapshot dirs; required for ral
  std::optional<std::int64_t> seed;
  std::string out_dir;
  CliOverrides overrides;
};

int cmd_eval(const EvalArgs& args);

struct DbExportArgs {
  std::string from_dir;  // an existing snapshot (run dir "dbs/" or standalone)
  std::string out_dir;
  std::optional<std::string> source_model;
};
int cmd_db_export(const DbExportArgs& args);

struct DbImportArgs {
  std::string snapshot_dir;
  std::string into_dir;
  bool merge = false;  // default replaces per (db, scenario)
};
int cmd_db_import(const DbImportArgs& args);

struct DbInspectArgs {
  std::string dir;
};
int cmd_db_inspect(const DbInspectArgs& args);

struct StatsArgs {
  std::string run_dir;
  std::optional<std::string> out_path;  // also write the JSON report
};
int cmd_stats(const StatsArgs& args);

struct CurveArgs {
  std::string run_dir;
  std::string format = "csv";  // "csv" | "json"
  std::string out_path;
};
int cmd_curve(const CurveArgs& args);

// Opens a snapshot directory with a store sized to its manifest configs.
std::unique_ptr<DatabaseStore> open_snapshot_store(const std::filesystem::path& dir,
                                                   const HashEmbeddingConfig& embedding);

}  // namespace tacit
