// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include "edit/prompts.hpp"

#include <array>

#include "edit/errors.hpp"

namespace edit {

namespace {

const std::array<PromptTemplate, 7>& registry() {
  static const std::array<PromptTemplate, 7> templates{{
      {PromptId::QaBrief,
       "Give you a question: {question}, Please answer it as briefly as possible.",
       {"question"}},
      {PromptId::KbOrganize,
       "Give you a question: {question}, Please answer it use those knowledge: {knowledge}.",
       {"question", "knowledge"}},
      {PromptId::Integrate,
       "Give you a question: {q}, and two answers to it, AnswerA: {answerLLM}, "
       "AnswerB:{answerKB}, please tell me which is better?",
       {"q", "answerLLM", "answerKB"}},
      {PromptId::Respond,
       "Give you a context: {context} and some knowledge {knowledge}. Please use those "
       "knowledge to just generate next response of {next_person}.",
       {"context", "knowledge", "next_person"}},
      {PromptId::CoqBootstrap,
       "Give you a context: {context}. Help me ask questions, which is unrelated to the "
       "person in the context ...",
       {"context"}},
      {PromptId::LlmCompareQg,
       "Please generate {count} questions for this context, ensuring that the questions do "
       "not involve subjective judgments and focus on well-known objective facts.",
       {"count"}},
      {PromptId::Gpt4Judge,
       "Give you a context:{context} and some responses: {response_list}. Please score the "
       "response according to whether the answer provide more useful knowledge and give me "
       "your score.",
       {"context", "response_list"}},
  }};
  return templates;
}

}  // namespace

std::string_view to_string(PromptId id) {
  switch (id) {
    case PromptId::QaBrief: return "QaBrief";
    case PromptId::KbOrganize: return "KbOrganize";
    case PromptId::Integrate: return "Integrate";
    case PromptId::Respond: return "Respond";
    case PromptId::CoqBootstrap: return "CoqBootstrap";
    case PromptId::LlmCompareQg: return "LlmCompareQg";
    case PromptId::Gpt4Judge: return "Gpt4Judge";
  }
  return "QaBrief";
}

PromptId prompt_id_from_string(std::string_view text) {
  for (const auto& t : registry()) {
    if (to_string(t.id) == text) return t.id;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown prompt id: " + std::string(text));
}

std::span<const PromptTemplate> prompt_templates() { return registry(); }

const PromptTemplate& prompt_template(PromptId id) {
  return registry()[static_cast<std::size_t>(id)];
}

std::string render_prompt(PromptId id, const SlotMap& slots) {
  const auto& tpl = prompt_template(id);
  for (const auto& [name, value] : slots) {
    bool known = false;
    for (const auto slot : tpl.required_slots) known = known || slot == name;
    if (!known) {
      throw Error(ErrorCode::UnknownSlot,
                  "slot '" + name + "' is not used by " + std::string(to_string(id)));
    }
  }
  for (const auto slot : tpl.required_slots) {
    if (slots.find(slot) == slots.end()) {
      throw Error(ErrorCode::MissingSlot,
                  "missing slot '" + std::string(slot) + "' for " + std::string(to_string(id)));
    }
  }

  std::string out;
  out.reserve(tpl.text.size() + 64);
  std::size_t pos = 0;
  while (pos < tpl.text.size()) {
    const auto open = tpl.text.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tpl.text.substr(pos));
      break;
    }
    const auto close = tpl.text.find('}', open);
    out.append(tpl.text.substr(pos, open - pos));
    const auto name = tpl.text.substr(open + 1, close - open - 1);
    out.append(slots.find(name)->second);
    pos = close + 1;
  }
  return out;
}

}  // namespace edit
