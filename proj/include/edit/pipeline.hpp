// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edit/answering.hpp"
#include "edit/core.hpp"
#include "edit/embedding.hpp"
#include "edit/knowledge_base.hpp"
#include "edit/llm.hpp"
#include "edit/question_gen.hpp"

namespace edit {

enum class PipelineMode { Full, NoKb, NoLlm, BaselineOnly };

std::string_view to_string(PipelineMode mode);
/// Accepts "Full"/"NoKb"/"NoLlm"/"BaselineOnly" and the CLI spellings
/// full/nokb/nollm/baseline.
PipelineMode pipeline_mode_from_string(std::string_view text);

struct PipelineConfig {
  GeneratorBinding generator;
  RetrievalConfig retrieval;
  PipelineMode mode = PipelineMode::Full;
  std::string extra_know_separator = "\n";
  int extra_know_char_cap = 4000;
  bool qa_prefix = false;  // entries rendered as "Q: <question> A: <answer>"

  std::string provider_id = "mock";
  double respond_temperature = 0.7;
  double qa_temperature = 0.7;
  int max_tokens = 512;
  double kb_score_floor = 0.35;
  bool swap_and_revote = false;

  /// Throws InvalidArgument when an invariant (l >= 1, char cap >= 256,
  /// max_questions >= 1, non-empty separator) is broken.
  void validate() const;
  AnsweringConfig answering() const;
};

void to_json(json& j, const PipelineConfig& cfg);
/// Merges the keys present in `overrides` over `base` and validates.
PipelineConfig apply_overrides(PipelineConfig base, const json& overrides);

struct QuestionTrace {
  Question question;
  std::optional<AnswerCandidate> llm;
  std::optional<AnswerCandidate> kb;
  IntegratedAnswer integrated;
};

struct TraceTimings {
  std::int64_t questions_ms = 0;
  std::int64_t answers_ms = 0;
  std::int64_t respond_ms = 0;
  std::int64_t total_ms = 0;
};

struct PipelineTrace {
  std::string trace_id;
  SystemKind system = SystemKind::Edit;
  PipelineMode mode = PipelineMode::Full;
  bool degraded = false;
  std::string degraded_reason;
  DialogueContext context;
  std::string generator_raw;
  std::vector<Question> questions;
  std::vector<QuestionTrace> answers;
  ExtraKnowledge extra_knowledge;
  std::vector<PromptRecord> prompts;
  GeneratedResponse response;
  TraceTimings timings;
  int provider_call_count = 0;
  int retrieval_count = 0;
  int call_budget = 0;
  std::string kb_scope = "none";  // none | global | global+overlay
  int kb_version = 0;
  json config;

  json to_json() const;
  /// Canonical serialized form (what gets persisted and served).
  std::string serialize() const { return to_json().dump(2); }
};

/// Drops chosen=None answers, strips the separator out of each answer,
/// joins, then drops whole trailing entries until the text fits the cap.
/// `questions` (by ordinal) is only consulted when cfg.qa_prefix is set.
ExtraKnowledge assemble_extra_knowledge(std::span<const IntegratedAnswer> answers,
                                        const PipelineConfig& cfg,
                                        std::span<const Question> questions = {});

/// Removes a leading "<label>:" echo from a generated reply.
std::string strip_speaker_echo(std::string_view text, std::string_view label);

/// Raised when the final response call fails. Carries the partial trace,
/// which is also persisted, so a failed turn stays auditable.
class TurnError : public Error {
 public:
  TurnError(ErrorCode code, const std::string& message, PipelineTrace trace)
      : Error(code, message), trace_(std::make_shared<const PipelineTrace>(std::move(trace))) {}
  const PipelineTrace& trace() const noexcept { return *trace_; }

 private:
  std::shared_ptr<const PipelineTrace> trace_;
};

enum class TraceIdPolicy { Random, ContentHash };

struct TurnResult {
  GeneratedResponse response;
  PipelineTrace trace;
};

class Pipeline {
 public:
  using Clock = std::function<std::int64_t()>;

  Pipeline(LlmGateway& gateway, std::shared_ptr<const Embedder> embedder,
           std::shared_ptr<KnowledgeBase> kb);

  /// Overrides the generator the config binding would otherwise build.
  void set_generator(std::shared_ptr<QuestionGenerator> generator) { generator_ = std::move(generator); }
  void set_clock(Clock clock) { clock_ = std::move(clock); }
  void set_trace_id_policy(TraceIdPolicy policy) { id_policy_ = policy; }
  /// Every trace is written to <dir>/<trace_id>.json when set.
  void set_trace_dir(std::optional<std::filesystem::path> dir) { trace_dir_ = std::move(dir); }

  const std::shared_ptr<KnowledgeBase>& knowledge_base() const { return kb_; }
  LlmGateway& gateway() { return gateway_; }
  const std::shared_ptr<const Embedder>& embedder() const { return embedder_; }

  /// Dispatches on cfg.mode; BaselineOnly goes to run_baseline.
  TurnResult run(const DialogueContext& ctx, const PipelineConfig& cfg, const KbIndex* overlay = nullptr);

  /// Full question/answer/response turn. Degrades to the baseline response
  /// when no questions or no extra knowledge come out. Throws EmptyContext,
  /// or TurnError(ProviderUnavailable) when the final response call fails.
  TurnResult run_edit(const DialogueContext& ctx, const PipelineConfig& cfg,
                      const KbIndex* overlay = nullptr);

  TurnResult run_baseline(const DialogueContext& ctx, const PipelineConfig& cfg);

 private:
  std::string respond(const DialogueContext& ctx, const std::string& knowledge,
                      const PipelineConfig& cfg, TurnBudget* budget, PipelineTrace& trace);
  /// respond(), but a failure finishes the trace and throws TurnError.
  std::string respond_or_fail(const DialogueContext& ctx, const std::string& knowledge,
                              const PipelineConfig& cfg, TurnBudget* budget, PipelineTrace& trace,
                              std::int64_t started);
  void finish(PipelineTrace& trace, const PipelineConfig& cfg, std::int64_t started);
  std::int64_t now() const { return clock_(); }

  LlmGateway& gateway_;
  std::shared_ptr<const Embedder> embedder_;
  std::shared_ptr<KnowledgeBase> kb_;
  std::shared_ptr<QuestionGenerator> generator_;
  Clock clock_;
  TraceIdPolicy id_policy_ = TraceIdPolicy::Random;
  std::optional<std::filesystem::path> trace_dir_;
};

}  // namespace edit
