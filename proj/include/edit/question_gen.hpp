// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edit/core.hpp"
#include "edit/llm.hpp"

namespace edit {

/// Splits a concatenated question sequence on '?'. Each piece keeps its '?',
/// is cut to its last line, loses leading enumeration ("1.", "Q3:", "-", "•")
/// and has whitespace collapsed. Empty pieces and case-insensitive repeats
/// are dropped; ordinals run 1..n in order of appearance.
std::vector<Question> parse_question_sequence(std::string_view raw,
                                              QuestionOrigin origin = QuestionOrigin::GeneratorModel);

/// Where the recorded prompt of a generator call ended up, for traces.
struct GeneratorCall {
  std::string prompt;  // empty for endpoint generators
  std::string raw_output;
};

/// Source of raw question text for a context.
class QuestionGenerator {
 public:
  virtual ~QuestionGenerator() = default;
  virtual QuestionOrigin origin() const = 0;
  /// Throws GeneratorUnavailable.
  virtual GeneratorCall generate_raw(const DialogueContext& ctx, int max_questions,
                                     TurnBudget* budget) = 0;
  /// The completion prompt generate_raw would send, for generators that
  /// go through the gateway.
  virtual std::optional<PromptRecord> prompt_for(const DialogueContext&, int) const {
    return std::nullopt;
  }
};

/// Fine-tuned question generation model behind HTTP:
/// POST {"context": string} -> {"text": string}.
class EndpointQuestionGenerator : public QuestionGenerator {
 public:
  explicit EndpointQuestionGenerator(std::string url,
                                     std::chrono::seconds timeout = std::chrono::seconds(60));
  QuestionOrigin origin() const override { return QuestionOrigin::GeneratorModel; }
  GeneratorCall generate_raw(const DialogueContext& ctx, int max_questions,
                             TurnBudget* budget) override;

 private:
  std::string url_;
  std::chrono::seconds timeout_;
};

/// Prompts an LLM with the comparison question prompt (count set to
/// max_questions) followed by a newline and the rendered context.
class LlmQuestionGenerator : public QuestionGenerator {
 public:
  LlmQuestionGenerator(LlmGateway& gateway, std::string provider_id, double temperature = 0.7);
  QuestionOrigin origin() const override { return QuestionOrigin::LlmPrompted; }
  GeneratorCall generate_raw(const DialogueContext& ctx, int max_questions,
                             TurnBudget* budget) override;
  std::optional<PromptRecord> prompt_for(const DialogueContext& ctx, int max_questions) const override {
    return PromptRecord{PromptId::LlmCompareQg, build_prompt(ctx, max_questions), provider_id_, false};
  }

  static std::string build_prompt(const DialogueContext& ctx, int max_questions);

 private:
  LlmGateway& gateway_;
  std::string provider_id_;
  double temperature_;
};

/// Returns a fixed raw string; stands in for a trained model offline.
class FixedQuestionGenerator : public QuestionGenerator {
 public:
  explicit FixedQuestionGenerator(std::string raw) : raw_(std::move(raw)) {}
  QuestionOrigin origin() const override { return QuestionOrigin::GeneratorModel; }
  GeneratorCall generate_raw(const DialogueContext&, int, TurnBudget*) override {
    return {{}, raw_};
  }

 private:
  std::string raw_;
};

enum class GeneratorKind { ExternalModelEndpoint, LlmPrompted };

struct GeneratorBinding {
  GeneratorKind kind = GeneratorKind::LlmPrompted;
  std::string endpoint_or_provider = "mock";
  int max_questions = 5;
};

std::unique_ptr<QuestionGenerator> make_generator(const GeneratorBinding& binding, LlmGateway& gateway);

struct GeneratedQuestions {
  std::vector<Question> questions;
  GeneratorCall call;
};

/// Parses the generator output and truncates to max_questions. Throws
/// EmptyContext, GeneratorUnavailable, NoQuestionsProduced.
GeneratedQuestions generate_questions(const DialogueContext& ctx, QuestionGenerator& generator,
                                      int max_questions, TurnBudget* budget = nullptr);

// --- COQ dataset -----------------------------------------------------------

enum class CoqSource { ACR, TT, NC, GR };
enum class CoqSplit { Train, Test, Valid };

std::string_view to_string(CoqSource source);
std::string_view to_string(CoqSplit split);

struct CoqRecord {
  std::string context;
  std::vector<std::string> questions;
  CoqSource source = CoqSource::ACR;
  CoqSplit split = CoqSplit::Train;
};

struct CoqCounts {
  // counts[source][split]
  std::array<std::array<int, 3>, 4> counts{};

  int at(CoqSource source, CoqSplit split) const {
    return counts[static_cast<std::size_t>(source)][static_cast<std::size_t>(split)];
  }
  int split_total(CoqSplit split) const;
  int total() const;
};

struct CoqDataset {
  std::vector<CoqRecord> records;
  CoqCounts counts;
};

/// Reads COQ JSONL {"context","questions","source","split"}. Throws
/// MalformedRecord (with line number) or UnknownSource.
CoqDataset load_coq(const std::filesystem::path& path);
CoqRecord parse_coq_record(const json& j);

/// Renders counts as the Train/Test/Valid table, one row per source.
std::string format_coq_table(const CoqCounts& counts);

struct BootstrapResult {
  std::vector<Question> candidates;  // unfiltered; manual review still required
  bool refused = false;
  std::string raw;
};

/// Candidate open questions for one context via the annotation prompt.
/// Throws InvalidArgument on empty context, ProviderUnavailable.
BootstrapResult bootstrap_coq_candidates(std::string_view context, LlmGateway& gateway,
                                         const std::string& provider_id);

}  // namespace edit
