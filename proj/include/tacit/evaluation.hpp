#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "tacit/orchestrator.hpp"

namespace tacit {

struct CheckpointEval {
  CheckpointRecord record;
  std::vector<StepReport> steps;  // all evaluation-game step reports
};

// Runs `games` fresh episodes with learning disabled and aggregates the
// outcomes. Asserts that all three databases hash identically before and
// after. Game seeds derive from (seed, checkpoint_index, game).
CheckpointEval run_checkpoint_eval(const EnvFactory& env_factory, DatabaseStore& dbs,
                                   ChatBackend& backend, const PromptLibrary& prompts, int games,
                                   const OrchestratorOptions& options, std::uint64_t seed,
                                   int checkpoint_index, int after_episodes, int max_steps);

struct ModeUsage {
  std::int64_t steps = 0;
  double mean_input_tokens = 0.0;
  double mean_output_tokens = 0.0;
  double mean_waiting_s = 0.0;
  double mean_llm_calls = 0.0;
  // relative to the Direct-mode means; absent when the run has no Direct step
  std::optional<double> input_ratio, output_ratio, waiting_ratio;
};

struct UsageReport {
  std::map<ModeKind, ModeUsage> modes;  // empty for an empty run
};

UsageReport usage_report(const std::vector<StepReport>& steps);
std::string usage_report_to_json(const UsageReport& report);

enum class CurveFormat { Csv, Json };

// One row per checkpoint, columns (after_episodes, wr, kd, value_killed_mean),
// stable order, lossless round-trip. kd serializes infinities as "inf".
void export_curve(const std::vector<CheckpointRecord>& checkpoints, CurveFormat format,
                  const std::filesystem::path& path);
std::vector<CheckpointRecord> import_curve(CurveFormat format, const std::filesystem::path& path);

// Full checkpoint serialization for run artifacts (all fields, JSONL).
std::string checkpoint_to_json(const CheckpointRecord& record);
CheckpointRecord checkpoint_from_json(const std::string& line);

std::string step_report_to_json(const StepReport& report);
StepReport step_report_from_json(const std::string& line);

}  // namespace tacit
