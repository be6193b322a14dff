// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include "edit/answering.hpp"

#include <cctype>

#include "edit/prompts.hpp"

namespace edit {

std::string_view to_string(AnswerSource s) { return s == AnswerSource::Llm ? "Llm" : "Kb"; }

std::string_view to_string(AnswerMode m) {
  switch (m) {
    case AnswerMode::Full: return "Full";
    case AnswerMode::NoKb: return "NoKb";
    case AnswerMode::NoLlm: return "NoLlm";
  }
  return "Full";
}

std::string_view to_string(Choice c) {
  switch (c) {
    case Choice::Llm: return "Llm";
    case Choice::Kb: return "Kb";
    case Choice::OnlyAvailable: return "OnlyAvailable";
    case Choice::None: return "None";
  }
  return "None";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Llm: return "Llm";
    case Verdict::Kb: return "Kb";
    case Verdict::Unparseable: return "Unparseable";
  }
  return "Unparseable";
}

namespace {

// Issues one completion and records the prompt. Returns nullopt on failure.
std::optional<CompletionResult> call(LlmGateway& gateway, PromptId id, std::string prompt,
                                     double temperature, const AnsweringConfig& cfg,
                                     TurnBudget* budget, PromptLog* log, std::string* error) {
  CompletionRequest req;
  req.prompt = std::move(prompt);
  req.temperature = temperature;
  req.max_tokens = cfg.max_tokens;
  req.provider_id = cfg.provider_id;
  req.prompt_id = id;
  PromptRecord record{id, req.prompt, cfg.provider_id, false};
  try {
    auto result = gateway.complete(req, budget);
    record.ok = true;
    if (log) log->push_back(std::move(record));
    return result;
  } catch (const Error& e) {
    // Budget refusals never reached a provider, so nothing was sent.
    if (log && e.code() != ErrorCode::BudgetExceeded) log->push_back(std::move(record));
    if (error) *error = std::string(to_string(e.code())) + ": " + e.what();
    return std::nullopt;
  }
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// First position of "answer<letter>" or "answer <letter>" as a whole word.
std::size_t find_family(const std::string& lower, char letter) {
  const std::string tight = std::string("answer") + letter;
  const std::string spaced = std::string("answer ") + letter;
  std::size_t best = std::string::npos;
  for (const auto& needle : {tight, spaced}) {
    std::size_t pos = lower.find(needle);
    while (pos != std::string::npos) {
      const bool left_ok = pos == 0 || !is_word_char(lower[pos - 1]);
      const auto after = pos + needle.size();
      const bool right_ok = after >= lower.size() || !is_word_char(lower[after]);
      if (left_ok && right_ok) {
        best = std::min(best, pos);
        break;
      }
      pos = lower.find(needle, pos + 1);
    }
  }
  return best;
}

}  // namespace

AnswerCandidate answer_via_llm(const Question& q, LlmGateway& gateway, const AnsweringConfig& cfg,
                               TurnBudget* budget, PromptLog* log) {
  AnswerCandidate c;
  c.question_ordinal = q.ordinal;
  c.source = AnswerSource::Llm;
  auto result = call(gateway, PromptId::QaBrief, render_prompt(PromptId::QaBrief, {{"question", q.text}}),
                     cfg.qa_temperature, cfg, budget, log, &c.error);
  if (!result) {
    c.failed = true;
    return c;
  }
  c.raw_text = result->text;
  c.refused = result->refused;
  if (!c.refused) c.text = trim(result->text);
  if (!c.refused && c.text.empty()) {
    c.failed = true;
    c.error = "empty answer";
  }
  return c;
}

AnswerCandidate answer_via_kb(const Question& q, const KbIndex* kb, const Embedder& embedder,
                              LlmGateway& gateway, const AnsweringConfig& cfg, TurnBudget* budget,
                              PromptLog* log) {
  AnswerCandidate c;
  c.question_ordinal = q.ordinal;
  c.source = AnswerSource::Kb;
  if (kb == nullptr || kb->empty()) {
    c.failed = true;
    c.error = "EmptyIndex: knowledge base is empty";
    return c;
  }
  try {
    c.hits = kb->retrieve_top_l(embedder.embed_text(q.text), cfg.retrieval);
  } catch (const Error& e) {
    c.failed = true;
    c.error = std::string(to_string(e.code())) + ": " + e.what();
    c.hits.clear();
    return c;
  }

  std::string knowledge;
  for (std::size_t i = 0; i < c.hits.size(); ++i) {
    if (i > 0) knowledge.push_back(' ');
    knowledge += c.hits[i].sentence.text;
  }
  auto result = call(gateway, PromptId::KbOrganize,
                     render_prompt(PromptId::KbOrganize, {{"question", q.text}, {"knowledge", knowledge}}),
                     cfg.organize_temperature, cfg, budget, log, &c.error);
  if (result) {
    c.raw_text = result->text;
    if (!result->refused && !trim(result->text).empty()) {
      c.text = trim(result->text);
      return c;
    }
    c.error = result->refused ? "organizer refused" : "organizer returned empty text";
  }

  // Degraded mode: raw top sentences stand in for the organized answer.
  c.degraded = true;
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(cfg.degraded_hits), c.hits.size());
  for (std::size_t i = 0; i < take; ++i) {
    if (i > 0) c.text.push_back(' ');
    c.text += c.hits[i].sentence.text;
  }
  return c;
}

Verdict parse_verdict(std::string_view raw) {
  const auto lower = to_lower(raw);
  const auto a = find_family(lower, 'a');
  const auto b = find_family(lower, 'b');
  if (a == std::string::npos && b == std::string::npos) return Verdict::Unparseable;
  return a < b ? Verdict::Llm : Verdict::Kb;
}

IntegratedAnswer integrate(const Question& q, const std::optional<AnswerCandidate>& llm,
                           const std::optional<AnswerCandidate>& kb, LlmGateway& gateway,
                           AnswerMode mode, const AnsweringConfig& cfg, TurnBudget* budget,
                           PromptLog* log) {
  IntegratedAnswer out;
  out.question_ordinal = q.ordinal;
  const bool llm_ok = llm && llm->usable();
  const bool kb_ok = kb && kb->usable();

  const auto pick = [&out](Choice choice, const AnswerCandidate& c) {
    out.chosen = choice;
    out.chosen_source = c.source;
    out.text = c.text;
  };

  if (mode == AnswerMode::NoKb) {
    if (llm_ok) pick(Choice::Llm, *llm);
    return out;
  }
  if (mode == AnswerMode::NoLlm) {
    if (kb_ok) pick(Choice::Kb, *kb);
    return out;
  }
  if (!llm_ok && !kb_ok) return out;
  if (llm_ok != kb_ok) {
    pick(Choice::OnlyAvailable, llm_ok ? *llm : *kb);
    return out;
  }

  const auto vote = [&](const std::string& first, const std::string& second) -> std::pair<Verdict, std::string> {
    auto result = call(gateway, PromptId::Integrate,
                       render_prompt(PromptId::Integrate,
                                     {{"q", q.text}, {"answerLLM", first}, {"answerKB", second}}),
                       cfg.integrate_temperature, cfg, budget, log, nullptr);
    if (!result) return {Verdict::Unparseable, ""};
    return {parse_verdict(result->text), result->text};
  };

  out.arbitrated = true;
  auto [verdict, raw] = vote(llm->text, kb->text);
  out.verdict_raw = raw;
  if (cfg.swap_and_revote && verdict != Verdict::Unparseable) {
    auto [swapped, raw2] = vote(kb->text, llm->text);
    const Verdict mapped = swapped == Verdict::Llm   ? Verdict::Kb
                           : swapped == Verdict::Kb ? Verdict::Llm
                                                    : Verdict::Unparseable;
    out.verdict_raw += "\n---\n" + raw2;
    if (mapped != verdict) verdict = Verdict::Unparseable;
  }
  out.verdict = verdict;

  if (verdict == Verdict::Unparseable) {
    const auto top = kb->top_score();
    verdict = top && *top >= cfg.kb_score_floor ? Verdict::Kb : Verdict::Llm;
  }
  if (verdict == Verdict::Kb) {
    pick(Choice::Kb, *kb);
  } else {
    pick(Choice::Llm, *llm);
  }
  return out;
}

void to_json(json& j, const PromptRecord& p) {
  j = json{{"id", to_string(p.id)}, {"text", p.text}, {"provider_id", p.provider_id}, {"ok", p.ok}};
}

void to_json(json& j, const RetrievalHit& h) {
  j = json{{"kb_ordinal", h.sentence.kb_ordinal},
           {"doc_id", h.sentence.doc_id},
           {"text", h.sentence.text},
           {"score", h.score}};
}

void to_json(json& j, const AnswerCandidate& c) {
  j = json{{"question_ordinal", c.question_ordinal},
           {"source", to_string(c.source)},
           {"text", c.text},
           {"failed", c.failed}};
  if (c.source == AnswerSource::Kb) {
    j["hits"] = c.hits;
    j["degraded"] = c.degraded;
  } else {
    j["refused"] = c.refused;
  }
  if (c.raw_text != c.text) j["raw_text"] = c.raw_text;
  if (!c.error.empty()) j["error"] = c.error;
}

void to_json(json& j, const IntegratedAnswer& a) {
  j = json{{"question_ordinal", a.question_ordinal},
           {"chosen", to_string(a.chosen)},
           {"text", a.text},
           {"verdict_raw", a.verdict_raw},
           {"verdict", to_string(a.verdict)},
           {"arbitrated", a.arbitrated}};
  j["chosen_source"] = a.chosen_source ? json(to_string(*a.chosen_source)) : json(nullptr);
}

}  // namespace edit
