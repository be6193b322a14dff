// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "edit/errors.hpp"
#include "edit/eval.hpp"
#include "fixtures.hpp"

namespace edit {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

TEST(SeededPermutation, IsAPermutationAndReproducible) {
  for (std::size_t n : {1u, 2u, 5u, 17u}) {
    auto p = seeded_permutation(n, 42);
    EXPECT_EQ(p, seeded_permutation(n, 42));
    std::sort(p.begin(), p.end());
    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), 0);
    EXPECT_EQ(p, id);
  }
  EXPECT_NE(seeded_permutation(8, 1), seeded_permutation(8, 2));
}

TEST(ParseJudgeScores, Formats) {
  const auto s = parse_judge_scores("1: 85\n2: 60", 2);
  EXPECT_EQ(s[0], 85);
  EXPECT_EQ(s[1], 60);
  const auto v = parse_judge_scores("Response 2 - 40\n[1] score: 90\n3: 10", 2);
  EXPECT_EQ(v[0], 90);
  EXPECT_EQ(v[1], 40);
  const auto m = parse_judge_scores("1: 85", 2);
  EXPECT_EQ(m[0], 85);
  EXPECT_FALSE(m[1].has_value());
  EXPECT_EQ(parse_judge_scores("90", 1)[0], 90);
  EXPECT_EQ(parse_judge_scores("I would give it 75 out of 100", 1)[0], 75);
  EXPECT_FALSE(parse_judge_scores("1: 185", 1)[0].has_value());
  EXPECT_FALSE(parse_judge_scores("They are both good.", 2)[0].has_value());
}

TEST(Judge, ScoresMapBackThroughThePermutation) {
  auto p = std::make_shared<ScriptedProvider>();
  p->add_rule("*", "1: 85\n2: 60");
  testing::Rig rig(p);
  const std::vector<std::pair<std::string, std::string>> responses{{"edit", "reply one"}, {"baseline", "reply two"}};
  const auto out = judge_responses(testing::reading_context(), responses, rig.gateway, "mock", 7);
  ASSERT_EQ(out.order.size(), 2u);
  EXPECT_EQ(out.order, seeded_permutation(2, 7));
  EXPECT_EQ(out.scores[out.order[0]].second, 85);
  EXPECT_EQ(out.scores[out.order[1]].second, 60);
  EXPECT_EQ(out.scores[0].first, "edit");
  // The listed text carries no system names.
  EXPECT_EQ(out.prompt.find("edit"), std::string::npos);
  EXPECT_NE(out.prompt.find("1: " + responses[out.order[0]].second), std::string::npos);
}

TEST(Judge, ProseIsUnparseable) {
  auto p = std::make_shared<ScriptedProvider>();
  p->add_rule("*", "Both responses are quite good.");
  testing::Rig rig(p);
  const std::vector<std::pair<std::string, std::string>> responses{{"a", "x"}, {"b", "y"}};
  EXPECT_EQ(code_of([&] { judge_responses(testing::reading_context(), responses, rig.gateway, "mock", 1); }),
            ErrorCode::UnparseableJudgeOutput);
}

TEST(Aliases, SystemsAndMetrics) {
  const auto systems = systems_from_aliases("edit,baseline,edit-nokb,edit-nollm", PipelineConfig{});
  ASSERT_EQ(systems.size(), 4u);
  EXPECT_EQ(systems[1].config.mode, PipelineMode::BaselineOnly);
  EXPECT_EQ(systems[2].config.mode, PipelineMode::NoKb);
  EXPECT_EQ(systems[3].config.mode, PipelineMode::NoLlm);
  EXPECT_EQ(code_of([] { systems_from_aliases("edit,gpt", PipelineConfig{}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { systems_from_aliases("edit,edit", PipelineConfig{}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(metrics_from_list("judge,bleu,rouge"),
            (std::vector<MetricKind>{MetricKind::JudgeScore, MetricKind::Bleu1, MetricKind::Bleu2,
                                     MetricKind::RougeL}));
  EXPECT_EQ(code_of([] { metrics_from_list("meteor"); }), ErrorCode::InvalidArgument);
}

TEST(Dataset, LoadAndErrors) {
  testing::TempDir dir;
  write_file_atomic(dir / "ok.jsonl",
                    R"({"id":"s1","context":[{"speaker":"User","text":"hi"}],"reference_response":"hello"})"
                    "\n\n"
                    R"({"id":"s2","context":[{"speaker":"User","text":"yo"}],"knowledge_doc":"Doc. Text."})"
                    "\n");
  const auto ds = load_eval_dataset(dir / "ok.jsonl");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].reference_response, "hello");
  EXPECT_EQ(ds[1].knowledge_doc, "Doc. Text.");

  write_file_atomic(dir / "bad.jsonl", R"({"id":"s1","context":[{"speaker":"User","text":"hi"}]})"
                                       "\n{\"id\":\"s2\"}\n");
  try {
    load_eval_dataset(dir / "bad.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }
  write_file_atomic(dir / "dup.jsonl", R"({"id":"s1","context":[{"speaker":"User","text":"hi"}]})"
                                       "\n"
                                       R"({"id":"s1","context":[{"speaker":"User","text":"hi"}]})"
                                       "\n");
  EXPECT_EQ(code_of([&] { load_eval_dataset(dir / "dup.jsonl"); }), ErrorCode::InvalidArgument);
}

std::vector<EvalSample> reading_samples() {
  std::vector<EvalSample> out;
  for (const char* id : {"r1", "r2"}) {
    EvalSample s;
    s.id = id;
    s.context = testing::reading_context();
    s.reference_response = testing::kEditReply.substr(9);
    out.push_back(std::move(s));
  }
  out[1].knowledge_doc = "Libraries lend books for free. Audiobooks suit long commutes.";
  return out;
}

MetricReport run_once(const std::filesystem::path& trace_dir) {
  testing::Rig rig(testing::reading_script());
  Pipeline p(rig.gateway, rig.embedder, rig.kb);
  BenchmarkConfig cfg;
  cfg.systems = systems_from_aliases("edit,baseline", PipelineConfig{});
  cfg.metrics = metrics_from_list("judge,bleu,rouge");
  cfg.seed = 3;
  cfg.parallelism = 2;
  cfg.trace_dir = trace_dir;
  return run_benchmark(reading_samples(), p, cfg);
}

TEST(Benchmark, ReportsAreByteIdenticalAcrossReruns) {
  testing::TempDir d1, d2;
  const auto a = run_once(d1.path());
  const auto b = run_once(d2.path());
  EXPECT_TRUE(a.failures.empty());
  ASSERT_EQ(a.responses.size(), 4u);
  EXPECT_EQ(a.rows.size(), 2u * 2u * 4u);
  EXPECT_EQ(a.to_json().dump(2), b.to_json().dump(2));
  EXPECT_EQ(a.to_csv(), b.to_csv());

  write_report(a, d1.path());
  write_report(b, d2.path());
  EXPECT_EQ(read_file(d1 / "report.json"), read_file(d2 / "report.json"));
  EXPECT_EQ(read_file(d1 / "report.csv").rfind("sample_id,system,metric,score\n", 0), 0u);
  for (const auto& r : a.responses) EXPECT_TRUE(std::filesystem::exists(d1 / (r.trace_id + ".json")));
}

TEST(Benchmark, EditBeatsBaselineOnTheScriptedReading) {
  testing::TempDir d;
  const auto report = run_once(d.path());
  const auto mean = [&](const std::string& sys, MetricKind m) {
    for (const auto& a : report.aggregates) {
      if (a.system == sys && a.metric == m) return a.mean;
    }
    return -1.0;
  };
  // The reference is the EDIT reply itself.
  EXPECT_DOUBLE_EQ(mean("edit", MetricKind::RougeL), 1.0);
  EXPECT_LT(mean("baseline", MetricKind::RougeL), 1.0);
  EXPECT_GE(mean("edit", MetricKind::JudgeScore), 0.0);
}

TEST(QgEval, IdenticalQuestionsScoreOne) {
  FixedQuestionGenerator g("What is X? How does Y work?");
  std::vector<CoqRecord> records(1);
  records[0].context = "Some text.";
  records[0].questions = {"What is X?", "How does Y work?"};
  records[0].source = CoqSource::TT;
  records[0].split = CoqSplit::Test;
  const auto r = run_qg_eval(records, g, 5);
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.sample_id, "TT-Test-1");
    EXPECT_DOUBLE_EQ(*row.score, 1.0);
  }
}

}  // namespace
}  // namespace edit
