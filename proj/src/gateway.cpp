#include "tacit/gateway.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "tacit/tokens.hpp"
#include "tacit/util.hpp"

namespace tacit {

std::string to_string(Role role) {
  switch (role) {
    case Role::Action: return "action";
    case Role::Hypothesis: return "hypothesis";
    case Role::Validation: return "validation";
    case Role::Experience: return "experience";
    case Role::Reflection: return "reflection";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

// Position of the first line starting (after optional whitespace) with
// `label`, searching from `from`. Returns {line_start, content_start} or npos.
struct LabelHit {
  std::size_t label_pos = std::string::npos;
  std::size_t content_pos = std::string::npos;
};

LabelHit find_label(const std::string& text, const std::string& label, std::size_t from) {
  std::size_t line_start = from;
  while (line_start <= text.size()) {
    std::size_t p = line_start;
    while (p < text.size() && (text[p] == ' ' || text[p] == '\t')) ++p;
    if (p + label.size() <= text.size() && iequals({text.data() + p, label.size()}, label)) {
      std::size_t after = p + label.size();
      // a label must be followed by a colon, whitespace, or end of line
      if (after >= text.size() || text[after] == ':' || text[after] == ' ' ||
          text[after] == '\t' || text[after] == '\r' || text[after] == '\n') {
        std::size_t content = after;
        if (content < text.size() && text[content] == ':') ++content;
        return {p, content};
      }
    }
    std::size_t nl = text.find('\n', line_start);
    if (nl == std::string::npos) break;
    line_start = nl + 1;
  }
  return {};
}

}  // namespace

std::vector<Section> parse_sections(const std::string& raw_text,
                                    const std::vector<std::string>& schema) {
  if (schema.empty()) throw std::invalid_argument("parse_sections: schema must be non-empty");
  std::vector<LabelHit> hits;
  std::size_t from = 0;
  for (const std::string& label : schema) {
    LabelHit hit = find_label(raw_text, label, from);
    if (hit.label_pos == std::string::npos)
      throw SectionError(SectionErrorKind::MissingSection, label);
    hits.push_back(hit);
    from = hit.content_pos;
  }
  std::vector<Section> sections;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    std::size_t begin = hits[i].content_pos;
    std::size_t end = i + 1 < schema.size() ? hits[i + 1].label_pos : raw_text.size();
    sections.push_back({schema[i], trim(raw_text.substr(begin, end - begin))});
  }
  if (sections.back().content.empty())
    throw SectionError(SectionErrorKind::EmptyFinalSection, schema.back());
  return sections;
}

void attach_sections(ChatResponse& response, const std::vector<std::string>& schema) {
  try {
    response.sections = parse_sections(response.raw_text, schema);
    response.final_payload = response.sections.back().content;
    response.parse_issue.reset();
  } catch (const SectionError& e) {
    response.sections.clear();
    response.final_payload.clear();
    response.parse_issue = SectionIssue{e.kind, e.label};
  }
}

std::string strip_thinking_blocks(const std::string& text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find("<think>", pos);
    if (open == std::string::npos) {
      out.append(text, pos, text.size() - pos);
      break;
    }
    std::size_t close = text.find("</think>", open);
    if (close == std::string::npos) {
      out.append(text, pos, text.size() - pos);
      break;
    }
    out.append(text, pos, open - pos);
    pos = close + 8;
  }
  return out;
}

// --------------------------------------------------------------------------
// Scripted backend

ScriptedBackend::ScriptedBackend(std::vector<ScriptedRule> rules, std::string default_reply)
    : rules_(std::move(rules)), default_reply_(std::move(default_reply)) {}

void ScriptedBackend::add_rule(ScriptedRule rule) { rules_.push_back(std::move(rule)); }

void ScriptedBackend::set_default_reply(std::string reply) { default_reply_ = std::move(reply); }

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
  const ScriptedRule* matched = nullptr;
  for (const ScriptedRule& rule : rules_) {
    if (rule.role && *rule.role != request.profile.role) continue;
    bool ok = true;
    for (const std::string& needle : rule.contains) {
      if (request.user_text.find(needle) == std::string::npos) {
        ok = false;
        break;
      }
    }
    if (ok) {
      matched = &rule;
      break;
    }
  }
  ChatResponse response;
  response.raw_text = matched ? matched->reply : default_reply_;
  if (matched && matched->usage) {
    response.usage = *matched->usage;
  } else {
    response.usage.input_tokens =
        estimate_tokens(request.profile.system_text) + estimate_tokens(request.user_text);
    response.usage.output_tokens = estimate_tokens(response.raw_text);
    response.usage.latency_s = 0.0;
  }
  attach_sections(response, request.profile.reply_schema);
  {
    std::scoped_lock lock(mutex_);
    calls_.push_back({request.profile.role, request.profile.system_text, request.user_text,
                      response.raw_text});
  }
  return response;
}

std::vector<ScriptedCall> ScriptedBackend::call_log() const {
  std::scoped_lock lock(mutex_);
  return calls_;
}

std::size_t ScriptedBackend::call_count() const {
  std::scoped_lock lock(mutex_);
  return calls_.size();
}

std::unique_ptr<ScriptedBackend> load_scripted_backend(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path));
  std::vector<ScriptedRule> rules;
  for (const auto& rj : j.value("rules", nlohmann::json::array())) {
    ScriptedRule rule;
    if (rj.contains("role")) {
      std::string role = rj.at("role").get<std::string>();
      if (role == "action") rule.role = Role::Action;
      else if (role == "hypothesis") rule.role = Role::Hypothesis;
      else if (role == "validation") rule.role = Role::Validation;
      else if (role == "experience") rule.role = Role::Experience;
      else if (role == "reflection") rule.role = Role::Reflection;
      else throw GatewayError(GatewayErrorKind::Config, "scripted rule: unknown role " + role);
    }
    rule.contains = rj.value("contains", std::vector<std::string>{});
    rule.reply = rj.at("reply").get<std::string>();
    if (rj.contains("usage")) {
      UsageStats u;
      u.input_tokens = rj.at("usage").value("input_tokens", 0);
      u.output_tokens = rj.at("usage").value("output_tokens", 0);
      u.latency_s = rj.at("usage").value("latency_s", 0.0);
      rule.usage = u;
    }
    rules.push_back(std::move(rule));
  }
  return std::make_unique<ScriptedBackend>(std::move(rules), j.value("default_reply", ""));
}

}  // namespace tacit
