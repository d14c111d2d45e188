#include "tacit/grammar.hpp"

#include <cctype>
#include <charconv>

namespace tacit {

namespace {

void skip_spaces(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_tag_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c));
}

int parse_int(std::string_view text, std::size_t& pos) {
  std::size_t start = pos;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + pos, value);
  if (ec != std::errc{} || ptr != text.data() + pos || pos == start)
    throw GrammarError("expected integer at offset " + std::to_string(start));
  return value;
}

ActionArg parse_arg(std::string_view text, std::size_t& pos) {
  skip_spaces(text, pos);
  if (pos >= text.size()) throw GrammarError("unexpected end of directive");
  if (text[pos] == '[') {
    ++pos;
    skip_spaces(text, pos);
    int x = parse_int(text, pos);
    skip_spaces(text, pos);
    if (pos >= text.size() || text[pos] != ',') throw GrammarError("expected ',' in coordinate");
    ++pos;
    skip_spaces(text, pos);
    int y = parse_int(text, pos);
    skip_spaces(text, pos);
    if (pos >= text.size() || text[pos] != ']') throw GrammarError("expected ']' in coordinate");
    ++pos;
    return ScreenCoord{x, y};  // Screen vs Minimap resolved against the vocabulary
  }
  std::size_t start = pos;
  while (pos < text.size() && is_tag_char(text[pos])) ++pos;
  if (pos == start) throw GrammarError("expected tag or coordinate");
  std::string raw(text.substr(start, pos - start));
  bool hex = raw.size() > 2 && raw[0] == '0' && (raw[1] == 'x' || raw[1] == 'X');
  bool decimal = !raw.empty();
  if (decimal)
    for (char c : raw)
      if (!std::isdigit(static_cast<unsigned char>(c))) decimal = false;
  if (hex) {
    for (std::size_t i = 2; i < raw.size(); ++i)
      if (!std::isxdigit(static_cast<unsigned char>(raw[i])))
        throw GrammarError("bad hex tag: " + raw);
  } else if (!decimal) {
    throw GrammarError("bad tag: " + raw);
  }
  return UnitTag{std::move(raw)};
}

}  // namespace

const VocabularyEntry* ActionVocabulary::find(std::string_view verb) const {
  for (const auto& e : entries_)
    if (e.verb == verb) return &e;
  return nullptr;
}

ActionDirective parse_directive(std::string_view text) {
  std::size_t pos = 0;
  skip_spaces(text, pos);
  if (pos >= text.size() || text[pos] != '<') throw GrammarError("directive must start with '<'");
  ++pos;
  skip_spaces(text, pos);
  std::size_t verb_start = pos;
  if (pos >= text.size() || !is_ident_start(text[pos])) throw GrammarError("expected verb");
  while (pos < text.size() && is_ident_char(text[pos])) ++pos;
  ActionDirective d;
  d.verb = std::string(text.substr(verb_start, pos - verb_start));
  skip_spaces(text, pos);
  if (pos >= text.size() || text[pos] != '(') throw GrammarError("expected '(' after verb");
  ++pos;
  skip_spaces(text, pos);
  if (pos < text.size() && text[pos] != ')') {
    while (true) {
      d.args.push_back(parse_arg(text, pos));
      skip_spaces(text, pos);
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      break;
    }
  }
  if (pos >= text.size() || text[pos] != ')') throw GrammarError("expected ')'");
  ++pos;
  skip_spaces(text, pos);
  if (pos >= text.size() || text[pos] != '>') throw GrammarError("directive must end with '>'");
  ++pos;
  skip_spaces(text, pos);
  if (pos != text.size()) throw GrammarError("trailing characters after directive");
  return d;
}

std::string format_directive(const ActionDirective& d) {
  std::string out = "<" + d.verb + "(";
  for (std::size_t i = 0; i < d.args.size(); ++i) {
    if (i > 0) out += ", ";
    const ActionArg& a = d.args[i];
    if (const auto* tag = std::get_if<UnitTag>(&a)) {
      out += tag->value;
    } else if (const auto* sc = std::get_if<ScreenCoord>(&a)) {
      out += "[" + std::to_string(sc->x) + ", " + std::to_string(sc->y) + "]";
    } else {
      const auto& mm = std::get<MinimapCoord>(a);
      out += "[" + std::to_string(mm.x) + ", " + std::to_string(mm.y) + "]";
    }
  }
  out += ")>";
  return out;
}

std::optional<std::string> validate_directive(const ActionDirective& d,
                                              const ActionVocabulary& vocab) {
  const VocabularyEntry* entry = vocab.find(d.verb);
  if (!entry) return "unknown verb: " + d.verb;
  if (entry->arg_kinds.size() != d.args.size())
    return d.verb + ": expected " + std::to_string(entry->arg_kinds.size()) + " args, got " +
           std::to_string(d.args.size());
  for (std::size_t i = 0; i < d.args.size(); ++i) {
    ArgKind want = entry->arg_kinds[i];
    bool is_tag = std::holds_alternative<UnitTag>(d.args[i]);
    if (want == ArgKind::Tag && !is_tag)
      return d.verb + ": arg " + std::to_string(i + 1) + " must be a unit tag";
    if (want != ArgKind::Tag && is_tag)
      return d.verb + ": arg " + std::to_string(i + 1) + " must be a coordinate";
  }
  return std::nullopt;
}

ExtractedDirectives extract_directives(std::string_view text, const ActionVocabulary& vocab) {
  ExtractedDirectives out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find('<', pos);
    if (open == std::string_view::npos) break;
    std::size_t close = text.find('>', open + 1);
    if (close == std::string_view::npos) break;
    std::string_view candidate = text.substr(open, close - open + 1);
    pos = close + 1;
    ActionDirective d;
    try {
      d = parse_directive(candidate);
    } catch (const GrammarError&) {
      continue;  // angle-bracketed prose, not a directive
    }
    if (auto reason = validate_directive(d, vocab)) {
      out.warnings.push_back("dropped directive " + std::string(candidate) + ": " + *reason);
      continue;
    }
    // Re-type coordinates to the vocabulary's declared kinds.
    const VocabularyEntry* entry = vocab.find(d.verb);
    for (std::size_t i = 0; i < d.args.size(); ++i) {
      if (entry->arg_kinds[i] == ArgKind::Minimap) {
        auto sc = std::get<ScreenCoord>(d.args[i]);
        d.args[i] = MinimapCoord{sc.x, sc.y};
      }
    }
    out.directives.push_back(std::move(d));
  }
  return out;
}

}  // namespace tacit
