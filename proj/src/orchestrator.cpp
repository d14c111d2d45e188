#include "tacit/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <thread>

namespace tacit {

std::string to_string(LearningTask task) {
  switch (task) {
    case LearningTask::Hypothesize: return "Hypothesize";
    case LearningTask::Validate: return "Validate";
    case LearningTask::Summarize: return "Summarize";
  }
  return "?";
}

ModeKind select_mode_kind(std::size_t count_e, std::size_t k_e, std::size_t count_h) {
  if (count_e == k_e) return ModeKind::Exploit;
  if (count_h > 0) return ModeKind::Explore;
  return ModeKind::Direct;
}

DecisionMode select_mode(const std::vector<ScoredSegment>& retrieved_e, std::size_t k_e,
                         const std::vector<ScoredSegment>& retrieved_h, SeededRng& rng) {
  switch (select_mode_kind(retrieved_e.size(), k_e, retrieved_h.size())) {
    case ModeKind::Exploit: {
      Exploit exploit;
      exploit.experiences.reserve(retrieved_e.size());
      for (const ScoredSegment& s : retrieved_e)
        exploit.experiences.push_back({s.segment.query_text, s.segment.answer_text});
      return exploit;
    }
    case ModeKind::Explore: {
      const ScoredSegment& pick = retrieved_h[rng.uniform_index(retrieved_h.size())];
      return Explore{{pick.segment.query_text, pick.segment.answer_text}};
    }
    case ModeKind::Direct:
      break;
  }
  return Direct{};
}

std::set<LearningTask> plan_learning(std::size_t count_h, std::size_t k_h, bool has_prev_h,
                                     std::size_t count_v, std::size_t k_v, std::size_t count_e,
                                     std::size_t k_e, const LearningToggles& toggles) {
  std::set<LearningTask> tasks;
  if (!toggles.learning_enabled) return tasks;
  if (count_h < k_h) tasks.insert(LearningTask::Hypothesize);
  if (has_prev_h && count_v < k_v) tasks.insert(LearningTask::Validate);
  if (count_e < k_e && count_v == k_v) tasks.insert(LearningTask::Summarize);
  return tasks;
}

namespace {

std::vector<HypothesisRecord> to_hypothesis_records(const std::vector<ScoredSegment>& segments) {
  std::vector<HypothesisRecord> records;
  records.reserve(segments.size());
  for (const ScoredSegment& s : segments)
    records.push_back({s.segment.query_text, s.segment.answer_text});
  return records;
}

std::vector<ValidationRecord> to_validation_records(const std::vector<ScoredSegment>& segments) {
  std::vector<ValidationRecord> records;
  records.reserve(segments.size());
  for (const ScoredSegment& s : segments) {
    auto [obs, hyp] = split_pair_query(s.segment.query_text);
    records.push_back({obs, hyp, s.segment.answer_text});
  }
  return records;
}

ChatRequest make_request(const PromptLibrary& prompts, Role role, const RenderedPrompt& rendered,
                         const OrchestratorOptions& options) {
  ChatRequest request;
  request.profile = prompts.profile(role);
  request.user_text = rendered.user_text;
  request.temperature =
      role == Role::Action ? options.temperature_action : options.temperature_learning;
  request.max_output_tokens = options.max_output_tokens;
  return request;
}

}  // namespace

std::pair<TextAction, StepReport> step(EnvironmentInterface& env, DatabaseStore& dbs,
                                       ChatBackend& backend, const PromptLibrary& prompts,
                                       AgentState& state, const LearningToggles& toggles,
                                       SeededRng& rng, const OrchestratorOptions& options) {
  const TextObservation observation = env.observe();
  const std::string scenario = observation.scenario_id;

  StepReport report;
  report.episode = static_cast<int>(observation.episode_index);
  report.step = static_cast<int>(observation.step_index);

  // retrievals: E and H on the current observation, V on the previous
  // (observation, hypothesis) pair when one exists
  std::vector<ScoredSegment> retrieved_e = dbs.e().retrieve(observation.body, scenario);
  std::vector<ScoredSegment> retrieved_h = dbs.h().retrieve(observation.body, scenario);
  std::vector<ScoredSegment> retrieved_v;
  std::optional<std::string> pair_query;
  if (state.prev_observation && state.prev_hypothesis) {
    pair_query = compose_pair_query(state.prev_observation->body,
                                    state.prev_hypothesis->hypothesis_text);
    retrieved_v = dbs.v().retrieve(*pair_query, scenario);
  }
  report.count_e = retrieved_e.size();
  report.count_h = retrieved_h.size();
  report.count_v = retrieved_v.size();

  const std::size_t k_h = static_cast<std::size_t>(dbs.h().config().top_k);
  const std::size_t k_v = static_cast<std::size_t>(dbs.v().config().top_k);
  const std::size_t k_e = static_cast<std::size_t>(dbs.e().config().top_k);

  DecisionMode mode = select_mode(retrieved_e, k_e, retrieved_h, rng);
  report.mode = mode_kind(mode);

  const bool has_prev_transition = state.prev_observation && state.prev_action;
  std::set<LearningTask> tasks;
  if (has_prev_transition) {
    tasks = plan_learning(retrieved_h.size(), k_h, state.prev_hypothesis.has_value(),
                          retrieved_v.size(), k_v, retrieved_e.size(), k_e, toggles);
  }
  report.tasks = tasks;

  std::optional<Transition> prev_transition;
  if (has_prev_transition)
    prev_transition = Transition{*state.prev_observation, *state.prev_action, observation};

  // optional sequential critique call, its output rides on the action prompt
  double reflection_latency = 0.0;
  std::optional<std::string> reflection_text;
  if (options.reflection) {
    try {
      ChatRequest request = make_request(prompts, Role::Reflection,
                                         prompts.render_reflection(prev_transition), options);
      ChatResponse response = backend.complete(request);
      report.usage.input_tokens += response.usage.input_tokens;
      report.usage.output_tokens += response.usage.output_tokens;
      reflection_latency = response.usage.latency_s;
      report.llm_calls += 1;
      reflection_text = parse_reflection_reply(response);
    } catch (const std::runtime_error& e) {
      report.warnings.push_back(std::string("reflection dropped: ") + e.what());
    }
  }

  RenderedPrompt action_prompt = prompts.render_action(observation, mode);
  if (reflection_text)
    action_prompt.user_text = PromptLibrary::append_reflection(action_prompt.user_text,
                                                               *reflection_text);
  ChatRequest action_request = make_request(prompts, Role::Action, action_prompt, options);

  std::optional<ChatRequest> hypothesis_request, validation_request, experience_request;
  if (tasks.count(LearningTask::Hypothesize)) {
    hypothesis_request = make_request(
        prompts, Role::Hypothesis,
        prompts.render_hypothesis(*prev_transition, to_hypothesis_records(state.prev_retrieved_h)),
        options);
  }
  if (tasks.count(LearningTask::Validate)) {
    validation_request = make_request(
        prompts, Role::Validation,
        prompts.render_validation(*prev_transition, *state.prev_hypothesis), options);
  }
  if (tasks.count(LearningTask::Summarize)) {
    experience_request = make_request(
        prompts, Role::Experience,
        prompts.render_experience(*state.prev_hypothesis, to_validation_records(retrieved_v)),
        options);
  }

  // launch the action query and every planned learning query concurrently
  auto launch = [&backend](const ChatRequest& request) {
    return std::async(std::launch::async, [&backend, request] { return backend.complete(request); });
  };
  std::future<ChatResponse> action_future = launch(action_request);
  std::optional<std::future<ChatResponse>> hypothesis_future, validation_future, experience_future;
  if (hypothesis_request) hypothesis_future = launch(*hypothesis_request);
  if (validation_request) validation_future = launch(*validation_request);
  if (experience_request) experience_future = launch(*experience_request);

  double max_concurrent_latency = 0.0;
  auto account = [&report, &max_concurrent_latency](const ChatResponse& response) {
    report.usage.input_tokens += response.usage.input_tokens;
    report.usage.output_tokens += response.usage.output_tokens;
    max_concurrent_latency = std::max(max_concurrent_latency, response.usage.latency_s);
    report.llm_calls += 1;
  };

  // join all; a lost learning reply never blocks the action
  TextAction action;
  bool have_action = false;
  try {
    ChatResponse response = action_future.get();
    account(response);
    ParsedAction parsed = parse_action_reply(response, env.vocabulary());
    for (std::string& w : parsed.warnings) report.warnings.push_back(std::move(w));
    action = std::move(parsed.action);
    have_action = true;
  } catch (const std::runtime_error& e) {
    report.warnings.push_back(std::string("action query failed: ") + e.what());
  }
  if (!have_action) {
    action = env.noop_action();
    report.action_failed = true;
  }

  auto join_learning = [&](std::optional<std::future<ChatResponse>>& future, const char* label,
                           auto parser) -> std::optional<std::string> {
    if (!future) return std::nullopt;
    try {
      ChatResponse response = future->get();
      account(response);
      return parser(response);
    } catch (const std::runtime_error& e) {
      report.warnings.push_back(std::string(label) + " dropped: " + e.what());
      return std::nullopt;
    }
  };
  std::optional<std::string> hypothesis_text =
      join_learning(hypothesis_future, "hypothesis", parse_hypothesis_reply);
  std::optional<std::string> validation_text =
      join_learning(validation_future, "validation", parse_validation_reply);
  std::optional<std::string> experience_text =
      join_learning(experience_future, "experience", parse_experience_reply);

  report.usage.latency_s = reflection_latency + max_concurrent_latency;

  // writes, keyed on the previous observation, in fixed H, V, E order
  if (hypothesis_text) {
    WriteOutcome outcome = dbs.h().store_or_update(state.prev_observation->body, *hypothesis_text,
                                                   scenario, state.prev_retrieved_h, rng);
    report.writes.push_back({DbName::H, outcome.kind, outcome.segment.id});
  }
  if (validation_text) {
    WriteOutcome outcome = dbs.v().store_or_update(*pair_query, *validation_text, scenario,
                                                   retrieved_v, rng);
    report.writes.push_back({DbName::V, outcome.kind, outcome.segment.id});
  }
  if (experience_text) {
    WriteOutcome outcome = dbs.e().store_or_update(state.prev_observation->body, *experience_text,
                                                   scenario, state.prev_retrieved_e, rng);
    report.writes.push_back({DbName::E, outcome.kind, outcome.segment.id});
  }

  env.submit(action);

  state.prev_observation = observation;
  state.prev_action = action;
  if (const auto* explore = std::get_if<Explore>(&mode))
    state.prev_hypothesis = explore->hypothesis;
  else
    state.prev_hypothesis.reset();
  state.prev_retrieved_h = std::move(retrieved_h);
  state.prev_retrieved_v = std::move(retrieved_v);
  state.prev_retrieved_e = std::move(retrieved_e);

  return {std::move(action), std::move(report)};
}

EpisodeResult run_episode(EnvironmentInterface& env, DatabaseStore& dbs, ChatBackend& backend,
                          const PromptLibrary& prompts, const LearningToggles& toggles,
                          SeededRng& rng, const OrchestratorOptions& options, int max_steps) {
  EpisodeResult result;
  try {
    env.reset();
    AgentState state;
    for (int i = 0; i < max_steps && !is_terminal(env.status()); ++i) {
      auto [action, report] = step(env, dbs, backend, prompts, state, toggles, rng, options);
      result.usage_total += report.usage;
      result.steps.push_back(std::move(report));
      env.advance();
    }
    result.status = is_terminal(env.status()) ? env.status() : EnvStatus::Truncated;
    result.outcome = env.outcome();
  } catch (const EnvError& e) {
    result.faulted = true;
    result.fault = e.what();
    result.status = EnvStatus::Lost;
  }
  return result;
}

RunResult run_learning(const EnvFactory& env_factory, DatabaseStore& dbs, ChatBackend& backend,
                       const PromptLibrary& prompts, int episodes, const RunConfig& run_config,
                       const OrchestratorOptions& options,
                       const std::function<CheckpointRecord(int after_episodes)>& checkpoint_fn) {
  if (episodes < 1) throw std::invalid_argument("run_learning: episodes must be >= 1");
  validate_config(run_config);

  RunResult run;
  run.episodes.resize(static_cast<std::size_t>(episodes));
  LearningToggles toggles{run_config.learning_enabled};

  int done = 0;
  while (done < episodes) {
    int batch = std::min(run_config.checkpoint_interval, episodes - done);
    int workers = std::min(run_config.parallel_size, batch);
    std::atomic<int> next{done};
    int batch_end = done + batch;

    auto work = [&]() {
      for (;;) {
        int index = next.fetch_add(1);
        if (index >= batch_end) break;
        auto env = env_factory(index, SeededRng::derive(run_config.rng_seed, 0xEAu, index));
        SeededRng rng(SeededRng::derive(run_config.rng_seed, 0x51u, index));
        run.episodes[static_cast<std::size_t>(index)] =
            run_episode(*env, dbs, backend, prompts, toggles, rng, options, run_config.max_steps);
      }
    };
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(work);
      for (std::thread& t : pool) t.join();
    }
    done = batch_end;
    if (checkpoint_fn) run.checkpoints.push_back(checkpoint_fn(done));
  }

  for (const EpisodeResult& e : run.episodes) run.usage_total += e.usage_total;
  return run;
}

}  // namespace tacit
