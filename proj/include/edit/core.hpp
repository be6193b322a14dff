// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edit/errors.hpp"

namespace edit {

using json = nlohmann::json;

enum class Speaker { User, Bot };

std::string_view to_string(Speaker speaker);
Speaker speaker_from_string(std::string_view text);

/// One turn of a conversation. `name` is empty unless the source data
/// carries named speakers ("PersonA"), in which case it is used as the label.
struct Utterance {
  Speaker speaker = Speaker::User;
  std::string text;
  int turn_index = 0;
  std::string name;

  std::string label() const;
  bool operator==(const Utterance&) const = default;
};

struct DialogueContext {
  std::vector<Utterance> utterances;
  Speaker next_speaker = Speaker::Bot;
  std::string next_speaker_name;

  bool empty() const noexcept { return utterances.empty(); }
  /// Appends with the next dense turn_index. Throws EmptyText on blank text.
  void append(Speaker speaker, std::string text, std::string name = {});
  /// Label the response is produced under ({next person} slot).
  std::string next_label() const;
  /// Checks the non-empty-text and dense turn_index invariants.
  void validate() const;

  bool operator==(const DialogueContext&) const = default;
};

enum class QuestionOrigin { GeneratorModel, LlmPrompted, Manual };

std::string_view to_string(QuestionOrigin origin);

struct Question {
  std::string text;
  QuestionOrigin origin = QuestionOrigin::GeneratorModel;
  int ordinal = 1;

  bool operator==(const Question&) const = default;
};

struct ExtraKnowledgeEntry {
  int question_ordinal = 0;
  std::string answer_text;

  bool operator==(const ExtraKnowledgeEntry&) const = default;
};

/// Ordered concatenation of the winning answers fed into response generation.
struct ExtraKnowledge {
  std::vector<ExtraKnowledgeEntry> entries;
  std::string separator = "\n";
  std::string rendered;
  int n = 0;

  /// Recomputes `rendered` and `n` from `entries`.
  void render();
  bool operator==(const ExtraKnowledge&) const = default;
};

enum class SystemKind { Edit, Baseline };

std::string_view to_string(SystemKind system);

struct GeneratedResponse {
  std::string text;
  SystemKind system = SystemKind::Edit;
  std::string trace_id;

  bool operator==(const GeneratedResponse&) const = default;
};

enum class ContextStyle { SpeakerColon };

/// "<Label>: <text>" per utterance joined by '\n'. Internal line breaks in an
/// utterance are collapsed to one space. Throws EmptyContext.
std::string render_context(const DialogueContext& ctx,
                           ContextStyle style = ContextStyle::SpeakerColon);

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
/// Collapses every whitespace run to a single space and trims the ends.
std::string collapse_whitespace(std::string_view text);

void to_json(json& j, const Utterance& u);
void from_json(const json& j, Utterance& u);
void to_json(json& j, const DialogueContext& ctx);
void from_json(const json& j, DialogueContext& ctx);
void to_json(json& j, const Question& q);
void from_json(const json& j, Question& q);
void to_json(json& j, const ExtraKnowledgeEntry& e);
void from_json(const json& j, ExtraKnowledgeEntry& e);
void to_json(json& j, const ExtraKnowledge& k);
void from_json(const json& j, ExtraKnowledge& k);
void to_json(json& j, const GeneratedResponse& r);
void from_json(const json& j, GeneratedResponse& r);

/// Builds a context from dataset-style turns [{"speaker","text"}]. Speakers
/// may be "User"/"Bot" or free names; with free names the author of the last
/// turn is treated as the user and the response is produced for the other
/// party.
DialogueContext context_from_turns(const json& turns);

}  // namespace edit
