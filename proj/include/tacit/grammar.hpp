#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tacit/types.hpp"

namespace tacit {

enum class ArgKind { Tag, Screen, Minimap };

struct VocabularyEntry {
  std::string verb;
  std::vector<ArgKind> arg_kinds;
};

// The environment's declared action vocabulary. Directive validation checks
// verb membership, arity, and argument kinds against it.
class ActionVocabulary {
 public:
  ActionVocabulary() = default;
  explicit ActionVocabulary(std::vector<VocabularyEntry> entries)
      : entries_(std::move(entries)) {}

  const VocabularyEntry* find(std::string_view verb) const;
  const std::vector<VocabularyEntry>& entries() const { return entries_; }

 private:
  std::vector<VocabularyEntry> entries_;
};

struct GrammarError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Grammar: <Verb(arg1, arg2)>. Tags are 0x-prefixed hex or decimal strings
// (kept verbatim); coordinates are "[x, y]" integer pairs. Throws
// GrammarError on malformed text. Purely syntactic; vocabulary not consulted.
ActionDirective parse_directive(std::string_view text);

// Canonical rendering: single space after commas, "[x, y]" coordinates.
std::string format_directive(const ActionDirective& d);

// Empty result means the directive is valid against the vocabulary; otherwise
// a human-readable reason. Coordinate args satisfy either Screen or Minimap
// as declared (the grammar cannot distinguish them).
std::optional<std::string> validate_directive(const ActionDirective& d,
                                              const ActionVocabulary& vocab);

struct ExtractedDirectives {
  std::vector<ActionDirective> directives;  // valid ones, in text order
  std::vector<std::string> warnings;        // dropped candidates with reasons
};

// Scan free text for <...> directive candidates, parse and validate each.
// Malformed or out-of-vocabulary candidates are dropped with a warning.
ExtractedDirectives extract_directives(std::string_view text, const ActionVocabulary& vocab);

}  // namespace tacit
