#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tacit/gateway.hpp"
#include "tacit/grammar.hpp"
#include "tacit/types.hpp"

namespace tacit {

struct HypothesisRecord {
  std::string observation_text;
  std::string hypothesis_text;
};

struct ValidationRecord {
  std::string observation_text;
  std::string hypothesis_text;
  std::string validation_text;
};

struct ExperienceRecord {
  std::string observation_text;
  std::string experience_text;
};

// The per-step action mode: act unaided, trial one retrieved hypothesis, or
// apply saturated experience.
struct Direct {};
struct Explore {
  HypothesisRecord hypothesis;
};
struct Exploit {
  std::vector<ExperienceRecord> experiences;  // non-empty
};
using DecisionMode = std::variant<Direct, Explore, Exploit>;

enum class ModeKind { Direct, Explore, Exploit };
std::string to_string(ModeKind kind);
ModeKind mode_kind(const DecisionMode& mode);

struct RenderedPrompt {
  std::string system_text;
  std::string user_text;
};

struct TemplateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Substitutes {{name}} slots; unknown names and leftover slots are errors.
std::string render_template(const std::string& tpl,
                            const std::map<std::string, std::string>& values);

// "=== LABEL index ===\n body \n=== END LABEL index ===" (no trailing newline).
std::string fenced_block(const std::string& label, int index, const std::string& body);

// Joins the issued directives in canonical grammar form; "(no orders issued)"
// when the action carries none.
std::string format_action_for_prompt(const TextAction& action);

// The four role prompts plus the reflection baseline, loaded from editable
// text assets. Loading fails unless every core template is present.
class PromptLibrary {
 public:
  static PromptLibrary load(const std::filesystem::path& template_dir);

  PromptProfile profile(Role role) const;

  RenderedPrompt render_action(const TextObservation& observation,
                               const DecisionMode& mode) const;
  RenderedPrompt render_hypothesis(const Transition& transition,
                                   const std::vector<HypothesisRecord>& existing) const;
  RenderedPrompt render_validation(const Transition& transition,
                                   const HypothesisRecord& hypothesis) const;
  RenderedPrompt render_experience(const HypothesisRecord& hypothesis,
                                   const std::vector<ValidationRecord>& validations) const;
  RenderedPrompt render_reflection(const std::optional<Transition>& transition) const;

  // Appends a fenced REFLECTION block to an already-rendered action prompt.
  static std::string append_reflection(std::string user_text, const std::string& reflection_text);

  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::string tpl(const std::string& name) const;

  std::filesystem::path dir_;
  std::map<std::string, std::string> templates_;
};

struct NoValidDirectiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParsedAction {
  TextAction action;
  std::vector<std::string> warnings;  // dropped directive candidates
};

// Extracts the ordered directives from the Actions section and validates them
// against the vocabulary. Throws SectionError when the reply failed its
// schema, NoValidDirectiveError when no parseable directive survives.
ParsedAction parse_action_reply(const ChatResponse& response, const ActionVocabulary& vocab);

// The terminal section's content (non-empty, trimmed). Throws SectionError
// when the reply failed its schema.
std::string parse_hypothesis_reply(const ChatResponse& response);
std::string parse_validation_reply(const ChatResponse& response);
std::string parse_experience_reply(const ChatResponse& response);
std::string parse_reflection_reply(const ChatResponse& response);

}  // namespace tacit
