// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edit/core.hpp"
#include "edit/llm.hpp"
#include "edit/pipeline.hpp"
#include "edit/question_gen.hpp"

namespace edit {

struct EvalSample {
  std::string id;
  DialogueContext context;
  std::optional<std::string> reference_response;
  std::optional<std::string> knowledge_doc;  // per-conversation document (Holl-E style)
};

/// JSONL {"id", "context":[{"speaker","text"}], "reference_response"?,
/// "knowledge_doc"?}. Throws MalformedRecord (line number) and
/// InvalidArgument on duplicate ids.
std::vector<EvalSample> load_eval_dataset(const std::filesystem::path& path);

enum class MetricKind { Bleu1, Bleu2, RougeL, JudgeScore };

std::string_view to_string(MetricKind m);
/// "bleu" expands to Bleu1+Bleu2, "rouge" to RougeL, "judge" to JudgeScore.
std::vector<MetricKind> metrics_from_list(std::string_view csv);

struct SystemSpec {
  std::string name;
  PipelineConfig config;
};

/// Maps edit, baseline, edit-nokb, edit-nollm onto pipeline modes. Throws
/// InvalidArgument on an unknown alias.
std::vector<SystemSpec> systems_from_aliases(std::string_view csv, const PipelineConfig& base);

/// Deterministic Fisher-Yates permutation of 0..n-1 driven by splitmix64.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// One score per listed position (1-based labels "1: 85", "Response 2 - 60").
/// With a single response an unlabeled integer in 0..100 is accepted.
std::vector<std::optional<int>> parse_judge_scores(std::string_view raw, std::size_t count);

struct JudgeOutcome {
  std::vector<std::pair<std::string, std::optional<int>>> scores;  // input order
  std::vector<std::size_t> order;  // order[k] = input index shown at position k+1
  std::uint64_t seed = 0;
  std::string prompt;
  std::string raw;
};

/// Scores all responses in one judge call, presented system-blind in a
/// seeded random order. Throws ProviderUnavailable or
/// UnparseableJudgeOutput when no entry could be read.
JudgeOutcome judge_responses(const DialogueContext& ctx,
                             const std::vector<std::pair<std::string, std::string>>& responses,
                             LlmGateway& gateway, const std::string& provider_id, std::uint64_t seed);

struct BenchmarkConfig {
  std::vector<SystemSpec> systems;
  std::vector<MetricKind> metrics{MetricKind::JudgeScore};
  std::string judge_provider = "mock";
  std::uint64_t seed = 0;
  int parallelism = 4;
  std::optional<std::filesystem::path> trace_dir;
};

struct ResponseRow {
  std::string sample_id;
  std::string system;
  std::string response;
  std::string trace_id;
  bool degraded = false;
};

struct MetricRow {
  std::string sample_id;
  std::string system;
  MetricKind metric = MetricKind::JudgeScore;
  std::optional<double> score;  // nullopt: judge entry missing
};

struct Aggregate {
  std::string system;
  MetricKind metric = MetricKind::JudgeScore;
  double mean = 0.0;
  int count = 0;
};

struct Failure {
  std::string sample_id;
  std::string system;
  std::string error;
};

struct MetricReport {
  std::vector<std::string> systems;
  std::vector<MetricKind> metrics;
  std::vector<ResponseRow> responses;
  std::vector<MetricRow> rows;
  std::vector<Aggregate> aggregates;
  std::vector<Failure> failures;
  json judgements = json::array();  // per sample: seed and presentation order
  json config;

  json to_json() const;
  std::string to_csv() const;
  /// Recomputes aggregates from rows in system/metric order.
  void aggregate();
};

/// Runs every system on every sample, scores the requested metrics and
/// collects per-sample failures without aborting. Samples carrying a
/// knowledge_doc get it ingested into a per-sample KB overlay.
MetricReport run_benchmark(const std::vector<EvalSample>& dataset, Pipeline& pipeline,
                           const BenchmarkConfig& cfg);

/// Question-generation scoring: generated questions joined by spaces vs the
/// reference questions joined by spaces, BLEU-1/2 and ROUGE-L per record.
MetricReport run_qg_eval(const std::vector<CoqRecord>& records, QuestionGenerator& generator,
                         int max_questions);

/// Writes report.json and report.csv into `dir`.
void write_report(const MetricReport& report, const std::filesystem::path& dir);

}  // namespace edit
