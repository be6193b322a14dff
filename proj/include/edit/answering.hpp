// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edit/core.hpp"
#include "edit/embedding.hpp"
#include "edit/knowledge_base.hpp"
#include "edit/llm.hpp"

namespace edit {

enum class AnswerSource { Llm, Kb };
enum class AnswerMode { Full, NoKb, NoLlm };
enum class Choice { Llm, Kb, OnlyAvailable, None };
enum class Verdict { Llm, Kb, Unparseable };

std::string_view to_string(AnswerSource s);
std::string_view to_string(AnswerMode m);
std::string_view to_string(Choice c);
std::string_view to_string(Verdict v);

struct AnswerCandidate {
  int question_ordinal = 0;
  AnswerSource source = AnswerSource::Llm;
  std::string text;
  std::vector<RetrievalHit> hits;  // Kb only
  bool refused = false;            // Llm only
  bool failed = false;
  bool degraded = false;  // Kb answer built from raw sentences after organizer failure
  std::string raw_text;   // provider output as received, kept for refusals
  std::string error;

  bool usable() const { return !failed && !refused && !text.empty(); }
  std::optional<double> top_score() const {
    if (hits.empty()) return std::nullopt;
    return hits.front().score;
  }
};

struct IntegratedAnswer {
  int question_ordinal = 0;
  Choice chosen = Choice::None;
  std::optional<AnswerSource> chosen_source;  // side picked; set unless chosen=None
  std::string text;
  std::string verdict_raw;
  Verdict verdict = Verdict::Unparseable;
  bool arbitrated = false;  // an Integrate call was issued
};

struct AnsweringConfig {
  std::string provider_id = "mock";
  RetrievalConfig retrieval;
  double qa_temperature = 0.7;
  double organize_temperature = 0.7;
  double integrate_temperature = 0.0;
  int max_tokens = 512;
  double kb_score_floor = 0.35;  // Unparseable verdict picks KB at or above this top-1 score
  bool swap_and_revote = false;
  int degraded_hits = 3;
};

/// Sink for prompts issued while answering; may be null.
using PromptLog = std::vector<PromptRecord>;

AnswerCandidate answer_via_llm(const Question& q, LlmGateway& gateway, const AnsweringConfig& cfg,
                               TurnBudget* budget = nullptr, PromptLog* log = nullptr);

/// Retrieval against an explicit index snapshot. Failures fold into
/// `failed`; an organizer failure yields a degraded answer from the top hits.
AnswerCandidate answer_via_kb(const Question& q, const KbIndex* kb, const Embedder& embedder,
                              LlmGateway& gateway, const AnsweringConfig& cfg,
                              TurnBudget* budget = nullptr, PromptLog* log = nullptr);

/// Case-insensitive scan for "answera"/"answer a" and "answerb"/"answer b";
/// whichever family appears first wins. Neither present gives Unparseable.
Verdict parse_verdict(std::string_view raw);

IntegratedAnswer integrate(const Question& q, const std::optional<AnswerCandidate>& llm,
                           const std::optional<AnswerCandidate>& kb, LlmGateway& gateway,
                           AnswerMode mode, const AnsweringConfig& cfg,
                           TurnBudget* budget = nullptr, PromptLog* log = nullptr);

void to_json(json& j, const PromptRecord& p);
void to_json(json& j, const RetrievalHit& h);
void to_json(json& j, const AnswerCandidate& c);
void to_json(json& j, const IntegratedAnswer& a);

}  // namespace edit
