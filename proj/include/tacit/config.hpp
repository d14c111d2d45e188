#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "tacit/embedding.hpp"
#include "tacit/gateway.hpp"
#include "tacit/orchestrator.hpp"
#include "tacit/persistence.hpp"
#include "tacit/types.hpp"

namespace tacit {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BackendSettings {
  std::string kind = "scripted";  // "scripted" | "remote"
  std::string script_path;        // scripted rule table
  RemoteBackendConfig remote;
};

// Declarative application config. Paths inside the file resolve relative to
// the file's own directory. Precedence per field: CLI flag > environment
// variable > config file > built-in default.
struct AppConfig {
  BackendSettings backend;
  std::string scenario_path;
  std::string templates_dir;
  DatabaseConfig db_h{0.99, 5, 0.0};
  DatabaseConfig db_v{0.97, 5, 0.1};
  DatabaseConfig db_e{0.99, 5, 0.1};
  HashEmbeddingConfig embedding;
  RunConfig run;
  OrchestratorOptions options;
};

// Threshold presets selectable via databases.preset:
//   "standard" (default): H 0.99/5/0,  V 0.97/5/0.1, E 0.99/5/0.1
//   "strict":             H 0.995/5/0, V 0.97/5/0.1, E 0.995/5/0.1
void apply_database_preset(AppConfig& config, const std::string& preset);

AppConfig load_app_config(const std::filesystem::path& path);

// TACIT_ENDPOINT, TACIT_API_KEY, TACIT_MODEL.
void apply_env_overrides(AppConfig& config);

struct CliOverrides {
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  std::optional<std::string> templates_dir;
  std::optional<std::int64_t> seed;
};
void apply_cli_overrides(AppConfig& config, const CliOverrides& overrides);

std::string default_template_dir();
std::uint64_t config_hash(const AppConfig& config);
std::string config_to_json(const AppConfig& config);

std::unique_ptr<DatabaseStore> make_store(const AppConfig& config);
std::unique_ptr<ChatBackend> make_backend(const AppConfig& config);

}  // namespace tacit
