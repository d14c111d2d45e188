#include "tacit/prompts.hpp"

#include "tacit/util.hpp"

namespace tacit {

std::string to_string(ModeKind kind) {
  switch (kind) {
    case ModeKind::Direct: return "Direct";
    case ModeKind::Explore: return "Explore";
    case ModeKind::Exploit: return "Exploit";
  }
  return "?";
}

ModeKind mode_kind(const DecisionMode& mode) {
  if (std::holds_alternative<Direct>(mode)) return ModeKind::Direct;
  if (std::holds_alternative<Explore>(mode)) return ModeKind::Explore;
  return ModeKind::Exploit;
}

std::string render_template(const std::string& tpl,
                            const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tpl.size());
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    std::size_t open = tpl.find("{{", pos);
    if (open == std::string::npos) {
      out.append(tpl, pos, tpl.size() - pos);
      break;
    }
    std::size_t close = tpl.find("}}", open + 2);
    if (close == std::string::npos)
      throw TemplateError("unterminated placeholder near offset " + std::to_string(open));
    out.append(tpl, pos, open - pos);
    std::string name = tpl.substr(open + 2, close - open - 2);
    auto it = values.find(name);
    if (it == values.end()) throw TemplateError("unknown placeholder {{" + name + "}}");
    out += it->second;
    pos = close + 2;
  }
  return out;
}

std::string fenced_block(const std::string& label, int index, const std::string& body) {
  std::string n = std::to_string(index);
  return "=== " + label + " " + n + " ===\n" + body + "\n=== END " + label + " " + n + " ===";
}

namespace {

std::string join_blocks(const std::string& label, const std::vector<std::string>& bodies,
                        const std::string& empty_text) {
  if (bodies.empty()) return empty_text;
  std::string out;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    if (i > 0) out += "\n";
    out += fenced_block(label, static_cast<int>(i) + 1, bodies[i]);
  }
  return out;
}

const std::vector<std::string> kCoreTemplates = {
    "action_system",     "action_user_direct", "action_user_explore", "action_user_exploit",
    "hypothesis_system", "hypothesis_user",    "validation_system",   "validation_user",
    "experience_system", "experience_user",    "reflection_system",   "reflection_user"};

}  // namespace

std::string format_action_for_prompt(const TextAction& action) {
  if (action.directives.empty()) return "(no orders issued)";
  std::string out;
  for (std::size_t i = 0; i < action.directives.size(); ++i) {
    if (i > 0) out += " ";
    out += format_directive(action.directives[i]);
  }
  return out;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& template_dir) {
  PromptLibrary lib;
  lib.dir_ = template_dir;
  for (const std::string& name : kCoreTemplates) {
    std::filesystem::path file = template_dir / (name + ".txt");
    if (!std::filesystem::exists(file))
      throw TemplateError("missing template: " + file.string());
    lib.templates_[name] = read_file(file);
  }
  return lib;
}

std::string PromptLibrary::tpl(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw TemplateError("template not loaded: " + name);
  return it->second;
}

PromptProfile PromptLibrary::profile(Role role) const {
  switch (role) {
    case Role::Action:
      return {role, tpl("action_system"), {"Analysis", "Actions"}};
    case Role::Hypothesis:
      return {role, tpl("hypothesis_system"), {"Analysis", "Hypothesis"}};
    case Role::Validation:
      return {role, tpl("validation_system"), {"Analysis", "Validation"}};
    case Role::Experience:
      return {role, tpl("experience_system"), {"Analysis", "Experience"}};
    case Role::Reflection:
      return {role, tpl("reflection_system"), {"Analysis", "Reflection"}};
  }
  throw TemplateError("unknown role");
}

RenderedPrompt PromptLibrary::render_action(const TextObservation& observation,
                                            const DecisionMode& mode) const {
  RenderedPrompt out;
  out.system_text = tpl("action_system");
  if (std::holds_alternative<Direct>(mode)) {
    out.user_text = render_template(tpl("action_user_direct"), {{"observation", observation.body}});
  } else if (const auto* explore = std::get_if<Explore>(&mode)) {
    out.user_text = render_template(
        tpl("action_user_explore"),
        {{"observation", observation.body},
         {"hypothesis_block", fenced_block("HYPOTHESIS", 1, explore->hypothesis.hypothesis_text)}});
  } else {
    const auto& exploit = std::get<Exploit>(mode);
    if (exploit.experiences.empty())
      throw TemplateError("exploit mode requires at least one experience");
    std::vector<std::string> bodies;
    bodies.reserve(exploit.experiences.size());
    for (const auto& e : exploit.experiences) bodies.push_back(e.experience_text);
    out.user_text = render_template(tpl("action_user_exploit"),
                                    {{"observation", observation.body},
                                     {"experience_blocks", join_blocks("EXPERIENCE", bodies, "")}});
  }
  return out;
}

RenderedPrompt PromptLibrary::render_hypothesis(const Transition& transition,
                                                const std::vector<HypothesisRecord>& existing) const {
  std::vector<std::string> bodies;
  bodies.reserve(existing.size());
  for (const auto& h : existing) bodies.push_back(h.hypothesis_text);
  RenderedPrompt out;
  out.system_text = tpl("hypothesis_system");
  out.user_text = render_template(
      tpl("hypothesis_user"),
      {{"before", transition.before.body},
       {"action", format_action_for_prompt(transition.action)},
       {"after", transition.after.body},
       {"existing_blocks", join_blocks("EXISTING HYPOTHESIS", bodies, "(none yet)")}});
  return out;
}

RenderedPrompt PromptLibrary::render_validation(const Transition& transition,
                                                const HypothesisRecord& hypothesis) const {
  RenderedPrompt out;
  out.system_text = tpl("validation_system");
  out.user_text = render_template(
      tpl("validation_user"),
      {{"before", transition.before.body},
       {"action", format_action_for_prompt(transition.action)},
       {"after", transition.after.body},
       {"hypothesis_block", fenced_block("HYPOTHESIS", 1, hypothesis.hypothesis_text)}});
  return out;
}

RenderedPrompt PromptLibrary::render_experience(
    const HypothesisRecord& hypothesis, const std::vector<ValidationRecord>& validations) const {
  if (validations.empty())
    throw TemplateError("experience prompt requires at least one validation");
  std::vector<std::string> bodies;
  bodies.reserve(validations.size());
  for (const auto& v : validations) bodies.push_back(v.validation_text);
  RenderedPrompt out;
  out.system_text = tpl("experience_system");
  out.user_text = render_template(
      tpl("experience_user"),
      {{"hypothesis_block", fenced_block("HYPOTHESIS", 1, hypothesis.hypothesis_text)},
       {"validation_blocks", join_blocks("VALIDATION", bodies, "")}});
  return out;
}

RenderedPrompt PromptLibrary::render_reflection(const std::optional<Transition>& transition) const {
  std::string block;
  if (transition) {
    block = fenced_block("SITUATION BEFORE", 1, transition->before.body) + "\n" +
            fenced_block("ORDERS ISSUED", 1, format_action_for_prompt(transition->action)) + "\n" +
            fenced_block("SITUATION AFTER", 1, transition->after.body);
  } else {
    block = "(no previous transition)";
  }
  RenderedPrompt out;
  out.system_text = tpl("reflection_system");
  out.user_text = render_template(tpl("reflection_user"), {{"transition_block", block}});
  return out;
}

std::string PromptLibrary::append_reflection(std::string user_text,
                                             const std::string& reflection_text) {
  user_text += "\n\n=== REFLECTION ===\n" + reflection_text + "\n=== END REFLECTION ===\n";
  return user_text;
}

namespace {

std::string payload_or_throw(const ChatResponse& response) {
  if (response.parse_issue)
    throw SectionError(response.parse_issue->kind, response.parse_issue->label);
  return response.final_payload;
}

}  // namespace

ParsedAction parse_action_reply(const ChatResponse& response, const ActionVocabulary& vocab) {
  std::string payload = payload_or_throw(response);
  ExtractedDirectives extracted = extract_directives(payload, vocab);
  if (extracted.directives.empty())
    throw NoValidDirectiveError("reply contains no valid directive: " + payload);
  ParsedAction out;
  out.action.body = payload;
  out.action.directives = std::move(extracted.directives);
  out.warnings = std::move(extracted.warnings);
  return out;
}

std::string parse_hypothesis_reply(const ChatResponse& response) { return payload_or_throw(response); }
std::string parse_validation_reply(const ChatResponse& response) { return payload_or_throw(response); }
std::string parse_experience_reply(const ChatResponse& response) { return payload_or_throw(response); }
std::string parse_reflection_reply(const ChatResponse& response) { return payload_or_throw(response); }

}  // namespace tacit
