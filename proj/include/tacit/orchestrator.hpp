#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tacit/environment.hpp"
#include "tacit/metrics.hpp"
#include "tacit/persistence.hpp"
#include "tacit/prompts.hpp"
#include "tacit/rng.hpp"

namespace tacit {

enum class LearningTask { Hypothesize, Validate, Summarize };
std::string to_string(LearningTask task);

struct LearningToggles {
  bool learning_enabled = true;
};

// What the previous step left behind. prev_hypothesis is set only when the
// previous step ran in Explore mode.
struct AgentState {
  std::optional<TextObservation> prev_observation;
  std::optional<TextAction> prev_action;
  std::optional<HypothesisRecord> prev_hypothesis;
  std::vector<ScoredSegment> prev_retrieved_h;
  std::vector<ScoredSegment> prev_retrieved_v;
  std::vector<ScoredSegment> prev_retrieved_e;
};

struct StepPlan {
  DecisionMode mode;
  std::set<LearningTask> tasks;
};

struct WriteRecord {
  DbName db = DbName::H;
  WriteOutcome::Kind kind = WriteOutcome::Kind::Created;
  std::string segment_id;
};

struct StepReport {
  int episode = 0;
  int step = 0;
  ModeKind mode = ModeKind::Direct;
  std::set<LearningTask> tasks;
  std::vector<WriteRecord> writes;
  UsageStats usage;        // token sums; latency = reflection + max(concurrent)
  int llm_calls = 0;
  bool action_failed = false;
  std::vector<std::string> warnings;
  std::size_t count_h = 0, count_v = 0, count_e = 0;  // retrieval result sizes
};

// Exploit iff the experience retrieval saturates exactly at k_e; else Explore
// iff any hypothesis was retrieved; else Direct.
ModeKind select_mode_kind(std::size_t count_e, std::size_t k_e, std::size_t count_h);

// Same decision, materialized: Explore draws one retrieved hypothesis
// uniformly (seeded).
DecisionMode select_mode(const std::vector<ScoredSegment>& retrieved_e, std::size_t k_e,
                         const std::vector<ScoredSegment>& retrieved_h, SeededRng& rng);

// Hypothesize iff count_h < k_h; Validate iff a previous hypothesis exists and
// count_v < k_v; Summarize iff count_e < k_e and count_v == k_v. Empty when
// learning is disabled.
std::set<LearningTask> plan_learning(std::size_t count_h, std::size_t k_h, bool has_prev_h,
                                     std::size_t count_v, std::size_t k_v, std::size_t count_e,
                                     std::size_t k_e, const LearningToggles& toggles);

struct OrchestratorOptions {
  bool reflection = false;  // one extra pre-decision critique call per step
  double temperature_action = 0.2;
  double temperature_learning = 0.7;
  int max_output_tokens = 2048;
};

// One full pass: observe, retrieve, decide, launch the action and all planned
// learning queries concurrently, join, write results, submit the action.
// Failed learning queries are dropped (logged in the report); a failed action
// query degrades to the environment's no-op action.
std::pair<TextAction, StepReport> step(EnvironmentInterface& env, DatabaseStore& dbs,
                                       ChatBackend& backend, const PromptLibrary& prompts,
                                       AgentState& state, const LearningToggles& toggles,
                                       SeededRng& rng, const OrchestratorOptions& options);

struct EpisodeResult {
  EnvStatus status = EnvStatus::Live;
  OutcomeSummary outcome;
  std::vector<StepReport> steps;
  UsageStats usage_total;
  bool faulted = false;
  std::string fault;
};

EpisodeResult run_episode(EnvironmentInterface& env, DatabaseStore& dbs, ChatBackend& backend,
                          const PromptLibrary& prompts, const LearningToggles& toggles,
                          SeededRng& rng, const OrchestratorOptions& options, int max_steps);

struct RunResult {
  std::vector<EpisodeResult> episodes;
  std::vector<CheckpointRecord> checkpoints;
  UsageStats usage_total;
};

// Runs `episodes` learning episodes against the shared databases, invoking
// `checkpoint_fn` after every checkpoint_interval episodes (plus once at the
// end when the last interval is partial). parallel_size > 1 runs episodes of
// a batch on worker threads; database writes stay serialized by the store.
RunResult run_learning(const EnvFactory& env_factory, DatabaseStore& dbs, ChatBackend& backend,
                       const PromptLibrary& prompts, int episodes, const RunConfig& run_config,
                       const OrchestratorOptions& options,
                       const std::function<CheckpointRecord(int after_episodes)>& checkpoint_fn);

}  // namespace tacit
