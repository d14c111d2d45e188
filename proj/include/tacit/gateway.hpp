#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tacit {

enum class Role { Action, Hypothesis, Validation, Experience, Reflection };
std::string to_string(Role role);

// System prompt plus the ordered reply-section schema for one role.
struct PromptProfile {
  Role role = Role::Action;
  std::string system_text;
  std::vector<std::string> reply_schema;  // e.g. {"Analysis", "Actions"}
};

struct ChatRequest {
  PromptProfile profile;
  std::string user_text;
  double temperature = 0.7;
  int max_output_tokens = 2048;
  std::optional<std::uint64_t> request_seed;
};

struct UsageStats {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double latency_s = 0.0;

  UsageStats& operator+=(const UsageStats& other) {
    input_tokens += other.input_tokens;
    output_tokens += other.output_tokens;
    latency_s += other.latency_s;
    return *this;
  }
};

struct Section {
  std::string label;
  std::string content;  // trimmed of surrounding whitespace
};

enum class SectionErrorKind { MissingSection, EmptyFinalSection };

struct SectionError : std::runtime_error {
  SectionError(SectionErrorKind kind_, std::string label_)
      : std::runtime_error(kind_ == SectionErrorKind::MissingSection
                               ? "missing reply section: " + label_
                               : "final reply section is empty: " + label_),
        kind(kind_),
        label(std::move(label_)) {}
  SectionErrorKind kind;
  std::string label;
};

// Splits raw_text at the first occurrence of each schema label, in schema
// order. Labels match case-insensitively at line starts (optional leading
// whitespace, optional trailing colon). Throws SectionError naming the first
// absent label, or EmptyFinalSection when the terminal section is blank.
std::vector<Section> parse_sections(const std::string& raw_text,
                                    const std::vector<std::string>& schema);

struct SectionIssue {
  SectionErrorKind kind;
  std::string label;
};

// An LLM reply: the raw text, its CoT section decomposition (when the
// profile's schema parsed), the terminal section's content, and usage.
struct ChatResponse {
  std::string raw_text;
  std::vector<Section> sections;
  std::string final_payload;
  std::optional<SectionIssue> parse_issue;
  UsageStats usage;
};

enum class GatewayErrorKind { Timeout, Auth, MalformedReply, RetryExhausted, Transport, Config };

struct GatewayError : std::runtime_error {
  GatewayError(GatewayErrorKind kind_, const std::string& message)
      : std::runtime_error(message), kind(kind_) {}
  GatewayErrorKind kind;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string describe() const = 0;
};

// Removes <think>...</think> blocks emitted by reasoning models.
std::string strip_thinking_blocks(const std::string& text);

// ---------------------------------------------------------------------------
// Scripted backend: a pure function of (rule table, request). The first rule
// whose role filter and required substrings all match the request wins.

struct ScriptedRule {
  std::optional<Role> role;           // match any role when absent
  std::vector<std::string> contains;  // all must appear in user_text
  std::string reply;
  std::optional<UsageStats> usage;    // injected; defaults to token estimates
};

struct ScriptedCall {
  Role role;
  std::string system_text;
  std::string user_text;
  std::string reply;
};

class ScriptedBackend final : public ChatBackend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<ScriptedRule> rules, std::string default_reply = "");

  void add_rule(ScriptedRule rule);
  void set_default_reply(std::string reply);

  ChatResponse complete(const ChatRequest& request) override;
  std::string describe() const override { return "scripted"; }

  std::vector<ScriptedCall> call_log() const;
  std::size_t call_count() const;

 private:
  std::vector<ScriptedRule> rules_;
  std::string default_reply_;
  mutable std::mutex mutex_;
  std::vector<ScriptedCall> calls_;
};

// Loads a rule table from a JSON file:
// {"default_reply": "...", "rules": [{"role": "action", "contains": [...],
//  "reply": "...", "usage": {"input_tokens":..,"output_tokens":..,"latency_s":..}}]}
std::unique_ptr<ScriptedBackend> load_scripted_backend(const std::string& path);

// ---------------------------------------------------------------------------
// Remote backend speaking the de-facto chat-completions JSON shape.

struct RemoteBackendConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080/v1/chat/completions"
  std::string api_key;
  std::string model;
  double timeout_s = 120.0;
  int max_retries = 3;          // retries after the first attempt
  double backoff_initial_s = 0.5;
  double backoff_factor = 2.0;
  bool strip_thinking = false;  // reasoning models wrap thought in <think> tags
};

class RemoteBackend final : public ChatBackend {
 public:
  explicit RemoteBackend(RemoteBackendConfig config);
  ChatResponse complete(const ChatRequest& request) override;
  std::string describe() const override { return "remote:" + config_.model; }

 private:
  RemoteBackendConfig config_;
  std::string host_;  // scheme://host:port
  std::string path_;  // /v1/chat/completions
};

// Fills sections/final_payload on a response using the profile's schema,
// recording a parse issue instead of throwing.
void attach_sections(ChatResponse& response, const std::vector<std::string>& schema);

}  // namespace tacit
