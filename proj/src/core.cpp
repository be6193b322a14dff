// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include "edit/core.hpp"

#include <algorithm>
#include <cctype>

namespace edit {

std::string_view to_string(Speaker speaker) {
  return speaker == Speaker::User ? "User" : "Bot";
}

Speaker speaker_from_string(std::string_view text) {
  const auto lower = to_lower(text);
  if (lower == "user") return Speaker::User;
  if (lower == "bot") return Speaker::Bot;
  throw Error(ErrorCode::InvalidArgument, "unknown speaker: " + std::string(text));
}

std::string_view to_string(QuestionOrigin origin) {
  switch (origin) {
    case QuestionOrigin::GeneratorModel: return "GeneratorModel";
    case QuestionOrigin::LlmPrompted: return "LlmPrompted";
    case QuestionOrigin::Manual: return "Manual";
  }
  return "GeneratorModel";
}

std::string_view to_string(SystemKind system) {
  return system == SystemKind::Edit ? "Edit" : "Baseline";
}

std::string trim(std::string_view text) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && is_space(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (const char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

std::string Utterance::label() const {
  return name.empty() ? std::string(to_string(speaker)) : name;
}

void DialogueContext::append(Speaker speaker, std::string text, std::string name) {
  if (trim(text).empty()) throw Error(ErrorCode::EmptyText, "utterance text is empty");
  Utterance u;
  u.speaker = speaker;
  u.text = std::move(text);
  u.turn_index = static_cast<int>(utterances.size());
  u.name = std::move(name);
  utterances.push_back(std::move(u));
}

std::string DialogueContext::next_label() const {
  return next_speaker_name.empty() ? std::string(to_string(next_speaker)) : next_speaker_name;
}

void DialogueContext::validate() const {
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    const auto& u = utterances[i];
    if (trim(u.text).empty()) {
      throw Error(ErrorCode::EmptyText, "utterance " + std::to_string(i) + " is empty");
    }
    if (u.turn_index != static_cast<int>(i)) {
      throw Error(ErrorCode::InvalidArgument,
                  "turn_index must be dense from 0, got " + std::to_string(u.turn_index) +
                      " at position " + std::to_string(i));
    }
  }
}

void ExtraKnowledge::render() {
  rendered.clear();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0) rendered += separator;
    rendered += entries[i].answer_text;
  }
  n = static_cast<int>(entries.size());
}

std::string render_context(const DialogueContext& ctx, ContextStyle /*style*/) {
  if (ctx.empty()) throw Error(ErrorCode::EmptyContext, "dialogue context has no utterances");
  std::string out;
  for (std::size_t i = 0; i < ctx.utterances.size(); ++i) {
    const auto& u = ctx.utterances[i];
    if (i > 0) out.push_back('\n');
    out += u.label();
    out += ": ";
    for (std::size_t c = 0; c < u.text.size(); ++c) {
      const char ch = u.text[c];
      if (ch == '\r' || ch == '\n') {
        // \r\n and runs of line breaks count as one break.
        while (c + 1 < u.text.size() && (u.text[c + 1] == '\r' || u.text[c + 1] == '\n')) ++c;
        out.push_back(' ');
      } else {
        out.push_back(ch);
      }
    }
  }
  return out;
}

void to_json(json& j, const Utterance& u) {
  j = json{{"speaker", to_string(u.speaker)}, {"text", u.text}, {"turn_index", u.turn_index}};
  if (!u.name.empty()) j["name"] = u.name;
}

void from_json(const json& j, Utterance& u) {
  u.speaker = speaker_from_string(j.at("speaker").get<std::string>());
  u.text = j.at("text").get<std::string>();
  u.turn_index = j.value("turn_index", 0);
  u.name = j.value("name", std::string{});
}

void to_json(json& j, const DialogueContext& ctx) {
  j = json{{"utterances", ctx.utterances}, {"next_speaker", to_string(ctx.next_speaker)}};
  if (!ctx.next_speaker_name.empty()) j["next_speaker_name"] = ctx.next_speaker_name;
}

void from_json(const json& j, DialogueContext& ctx) {
  ctx.utterances = j.at("utterances").get<std::vector<Utterance>>();
  ctx.next_speaker = speaker_from_string(j.value("next_speaker", std::string("Bot")));
  ctx.next_speaker_name = j.value("next_speaker_name", std::string{});
}

namespace {

QuestionOrigin origin_from_string(std::string_view text) {
  if (text == "GeneratorModel") return QuestionOrigin::GeneratorModel;
  if (text == "LlmPrompted") return QuestionOrigin::LlmPrompted;
  if (text == "Manual") return QuestionOrigin::Manual;
  throw Error(ErrorCode::InvalidArgument, "unknown question origin: " + std::string(text));
}

}  // namespace

void to_json(json& j, const Question& q) {
  j = json{{"text", q.text}, {"origin", to_string(q.origin)}, {"ordinal", q.ordinal}};
}

void from_json(const json& j, Question& q) {
  q.text = j.at("text").get<std::string>();
  q.origin = origin_from_string(j.at("origin").get<std::string>());
  q.ordinal = j.at("ordinal").get<int>();
}

void to_json(json& j, const ExtraKnowledgeEntry& e) {
  j = json{{"question_ordinal", e.question_ordinal}, {"answer_text", e.answer_text}};
}

void from_json(const json& j, ExtraKnowledgeEntry& e) {
  e.question_ordinal = j.at("question_ordinal").get<int>();
  e.answer_text = j.at("answer_text").get<std::string>();
}

void to_json(json& j, const ExtraKnowledge& k) {
  j = json{{"entries", k.entries}, {"separator", k.separator}, {"rendered", k.rendered}, {"n", k.n}};
}

void from_json(const json& j, ExtraKnowledge& k) {
  k.entries = j.at("entries").get<std::vector<ExtraKnowledgeEntry>>();
  k.separator = j.value("separator", std::string("\n"));
  k.rendered = j.at("rendered").get<std::string>();
  k.n = j.at("n").get<int>();
}

void to_json(json& j, const GeneratedResponse& r) {
  j = json{{"text", r.text}, {"system", to_string(r.system)}, {"trace_id", r.trace_id}};
}

void from_json(const json& j, GeneratedResponse& r) {
  r.text = j.at("text").get<std::string>();
  const auto system = j.at("system").get<std::string>();
  if (system == "Edit") {
    r.system = SystemKind::Edit;
  } else if (system == "Baseline") {
    r.system = SystemKind::Baseline;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown system: " + system);
  }
  r.trace_id = j.at("trace_id").get<std::string>();
}

DialogueContext context_from_turns(const json& turns) {
  if (!turns.is_array() || turns.empty()) {
    throw Error(ErrorCode::EmptyContext, "context must be a non-empty array of turns");
  }
  const auto canonical = [](const std::string& s) {
    const auto lower = to_lower(s);
    return lower == "user" || lower == "bot";
  };
  const std::string last_name = turns.back().at("speaker").get<std::string>();
  const bool named = !canonical(last_name);

  DialogueContext ctx;
  std::string other_name;
  for (const auto& turn : turns) {
    const auto speaker = turn.at("speaker").get<std::string>();
    const auto text = turn.at("text").get<std::string>();
    if (!named && canonical(speaker)) {
      ctx.append(speaker_from_string(speaker), text);
      continue;
    }
    const bool is_user = speaker == last_name;
    if (!is_user && other_name.empty()) other_name = speaker;
    ctx.append(is_user ? Speaker::User : Speaker::Bot, text, speaker);
  }
  ctx.next_speaker = Speaker::Bot;
  if (named) ctx.next_speaker_name = other_name;
  return ctx;
}

}  // namespace edit
