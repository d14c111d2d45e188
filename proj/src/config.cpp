#include "tacit/config.hpp"

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "tacit/util.hpp"

namespace tacit {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string resolve_path(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return value;
  std::filesystem::path p(value);
  if (p.is_absolute()) return p.string();
  return (base / p).lexically_normal().string();
}

DatabaseConfig parse_db(const ordered_json& j, const std::string& path, DatabaseConfig fallback) {
  DatabaseConfig c = fallback;
  c.threshold = j.value("threshold", c.threshold);
  c.top_k = j.value("top_k", c.top_k);
  c.update_rate = j.value("update_rate", c.update_rate);
  try {
    validate_config(c);
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

}  // namespace

void apply_database_preset(AppConfig& config, const std::string& preset) {
  if (preset == "standard") {
    config.db_h = {0.99, 5, 0.0};
    config.db_v = {0.97, 5, 0.1};
    config.db_e = {0.99, 5, 0.1};
  } else if (preset == "strict") {
    config.db_h = {0.995, 5, 0.0};
    config.db_v = {0.97, 5, 0.1};
    config.db_e = {0.995, 5, 0.1};
  } else {
    throw ConfigError("databases.preset: unknown preset \"" + preset +
                      "\" (expected \"standard\" or \"strict\")");
  }
}

std::string default_template_dir() { return std::string(TACIT_ASSET_DIR) + "/templates"; }

AppConfig load_app_config(const std::filesystem::path& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const ordered_json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  std::filesystem::path base = path.parent_path();
  AppConfig config;
  config.templates_dir = default_template_dir();

  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    config.backend.kind = b.value("kind", "scripted");
    if (config.backend.kind != "scripted" && config.backend.kind != "remote")
      throw ConfigError("backend.kind: expected \"scripted\" or \"remote\", got \"" +
                        config.backend.kind + "\"");
    config.backend.script_path = resolve_path(base, b.value("script", ""));
    config.backend.remote.endpoint = b.value("endpoint", "");
    config.backend.remote.model = b.value("model", "");
    config.backend.remote.timeout_s = b.value("timeout_s", 120.0);
    config.backend.remote.max_retries = b.value("max_retries", 3);
    config.backend.remote.backoff_initial_s = b.value("backoff_initial_s", 0.5);
    config.backend.remote.strip_thinking = b.value("strip_thinking", false);
    if (config.backend.remote.timeout_s <= 0) throw ConfigError("backend.timeout_s: must be > 0");
    if (config.backend.remote.max_retries < 0)
      throw ConfigError("backend.max_retries: must be >= 0");
  }

  config.scenario_path = resolve_path(base, j.value("scenario", ""));
  if (j.contains("templates"))
    config.templates_dir = resolve_path(base, j.at("templates").get<std::string>());

  if (j.contains("databases")) {
    const auto& d = j.at("databases");
    if (d.contains("preset")) apply_database_preset(config, d.at("preset").get<std::string>());
    if (d.contains("H")) config.db_h = parse_db(d.at("H"), "databases.H", config.db_h);
    if (d.contains("V")) config.db_v = parse_db(d.at("V"), "databases.V", config.db_v);
    if (d.contains("E")) config.db_e = parse_db(d.at("E"), "databases.E", config.db_e);
  }

  if (j.contains("embedding")) {
    const auto& e = j.at("embedding");
    config.embedding.seed = e.value("seed", config.embedding.seed);
    config.embedding.dimension = e.value("dimension", config.embedding.dimension);
    config.embedding.token_limit = e.value("token_limit", config.embedding.token_limit);
    if (config.embedding.dimension == 0) throw ConfigError("embedding.dimension: must be > 0");
    if (config.embedding.token_limit < 1) throw ConfigError("embedding.token_limit: must be >= 1");
  }

  if (j.contains("run")) {
    const auto& r = j.at("run");
    config.run.parallel_size = r.value("parallel_size", config.run.parallel_size);
    config.run.checkpoint_interval = r.value("checkpoint_interval", config.run.checkpoint_interval);
    config.run.eval_games = r.value("eval_games", config.run.eval_games);
    config.run.rng_seed = r.value("rng_seed", config.run.rng_seed);
    config.run.learning_enabled = r.value("learning_enabled", config.run.learning_enabled);
    config.run.max_steps = r.value("max_steps", config.run.max_steps);
    try {
      validate_config(config.run);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("run: ") + e.what());
    }
  }

  if (j.contains("llm")) {
    const auto& l = j.at("llm");
    config.options.temperature_action = l.value("temperature_action", 0.2);
    config.options.temperature_learning = l.value("temperature_learning", 0.7);
    config.options.max_output_tokens = l.value("max_output_tokens", 2048);
    if (config.options.max_output_tokens < 1)
      throw ConfigError("llm.max_output_tokens: must be >= 1");
  }
  return config;
}

void apply_env_overrides(AppConfig& config) {
  if (const char* endpoint = std::getenv("TACIT_ENDPOINT")) config.backend.remote.endpoint = endpoint;
  if (const char* key = std::getenv("TACIT_API_KEY")) config.backend.remote.api_key = key;
  if (const char* model = std::getenv("TACIT_MODEL")) config.backend.remote.model = model;
}

void apply_cli_overrides(AppConfig& config, const CliOverrides& overrides) {
  if (overrides.endpoint) config.backend.remote.endpoint = *overrides.endpoint;
  if (overrides.model) config.backend.remote.model = *overrides.model;
  if (overrides.templates_dir) config.templates_dir = *overrides.templates_dir;
  if (overrides.seed) config.run.rng_seed = *overrides.seed;
}

std::string config_to_json(const AppConfig& config) {
  ordered_json j;
  ordered_json backend;
  backend["kind"] = config.backend.kind;
  backend["script"] = config.backend.script_path;
  backend["endpoint"] = config.backend.remote.endpoint;
  backend["model"] = config.backend.remote.model;
  backend["timeout_s"] = config.backend.remote.timeout_s;
  backend["max_retries"] = config.backend.remote.max_retries;
  backend["strip_thinking"] = config.backend.remote.strip_thinking;
  j["backend"] = backend;  // note: api_key deliberately not serialized
  j["scenario"] = config.scenario_path;
  j["templates"] = config.templates_dir;
  ordered_json dbs;
  for (auto [name, c] : {std::pair{"H", config.db_h}, {"V", config.db_v}, {"E", config.db_e}}) {
    ordered_json d;
    d["threshold"] = c.threshold;
    d["top_k"] = c.top_k;
    d["update_rate"] = c.update_rate;
    dbs[name] = d;
  }
  j["databases"] = dbs;
  ordered_json emb;
  emb["seed"] = config.embedding.seed;
  emb["dimension"] = config.embedding.dimension;
  emb["token_limit"] = config.embedding.token_limit;
  j["embedding"] = emb;
  ordered_json run;
  run["parallel_size"] = config.run.parallel_size;
  run["checkpoint_interval"] = config.run.checkpoint_interval;
  run["eval_games"] = config.run.eval_games;
  run["rng_seed"] = config.run.rng_seed;
  run["learning_enabled"] = config.run.learning_enabled;
  run["max_steps"] = config.run.max_steps;
  j["run"] = run;
  ordered_json llm;
  llm["temperature_action"] = config.options.temperature_action;
  llm["temperature_learning"] = config.options.temperature_learning;
  llm["max_output_tokens"] = config.options.max_output_tokens;
  j["llm"] = llm;
  return j.dump(2) + "\n";
}

std::uint64_t config_hash(const AppConfig& config) { return fnv1a64(config_to_json(config)); }

std::unique_ptr<DatabaseStore> make_store(const AppConfig& config) {
  auto provider = std::make_shared<HashEmbeddingProvider>(config.embedding);
  return std::make_unique<DatabaseStore>(config.db_h, config.db_v, config.db_e, provider);
}

std::unique_ptr<ChatBackend> make_backend(const AppConfig& config) {
  if (config.backend.kind == "scripted") {
    if (config.backend.script_path.empty())
      throw ConfigError("backend.script: scripted backend requires a rule file");
    return load_scripted_backend(config.backend.script_path);
  }
  if (config.backend.remote.endpoint.empty())
    throw ConfigError("backend.endpoint: remote backend requires an endpoint "
                      "(config field or TACIT_ENDPOINT)");
  return std::make_unique<RemoteBackend>(config.backend.remote);
}

}  // namespace tacit
