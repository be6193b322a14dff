// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "edit/errors.hpp"
#include "edit/question_gen.hpp"
#include "fixtures.hpp"

namespace edit {
namespace {

std::vector<std::string> texts(const std::vector<Question>& qs) {
  std::vector<std::string> out;
  for (const auto& q : qs) out.push_back(q.text);
  return out;
}

TEST(ParseQuestions, Examples) {
  EXPECT_EQ(texts(parse_question_sequence("What is X? How does Y work?")),
            (std::vector<std::string>{"What is X?", "How does Y work?"}));
  EXPECT_EQ(texts(parse_question_sequence("Q1: What is X?\nQ2: What is X?")), (std::vector<std::string>{"What is X?"}));
  EXPECT_TRUE(parse_question_sequence("no questions here").empty());
}

TEST(ParseQuestions, PrefixesAndOrdinals) {
  const auto qs = parse_question_sequence("Here are some:\n1. Why A?\n2) Why B?\n- Why C?\n• why a?");
  ASSERT_EQ(qs.size(), 3u);
  EXPECT_EQ(qs[0].text, "Why A?");
  EXPECT_EQ(qs[2].text, "Why C?");
  EXPECT_EQ(qs[2].ordinal, 3);
}

TEST(ParseQuestions, ReadingList) {
  const auto qs = parse_question_sequence(testing::reading_questions_raw());
  EXPECT_EQ(texts(qs), testing::reading_questions());
}

TEST(GenerateQuestions, TruncatesToMax) {
  FixedQuestionGenerator g("A? B? C?");
  DialogueContext ctx;
  ctx.append(Speaker::User, "hi");
  const auto out = generate_questions(ctx, g, 2);
  ASSERT_EQ(out.questions.size(), 2u);
  EXPECT_EQ(out.questions[0].ordinal, 1);
  EXPECT_EQ(out.questions[1].ordinal, 2);
}

TEST(GenerateQuestions, EmptyOutputAndEmptyContext) {
  FixedQuestionGenerator g("");
  DialogueContext ctx;
  ctx.append(Speaker::User, "hi");
  try {
    generate_questions(ctx, g, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoQuestionsProduced);
  }
  try {
    generate_questions(DialogueContext{}, g, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyContext);
  }
}

TEST(GenerateQuestions, LlmPromptedReplaysReadingQuestions) {
  testing::Rig rig(testing::reading_script());
  LlmQuestionGenerator g(rig.gateway, "mock");
  const auto out = generate_questions(testing::reading_context(), g, 5);
  ASSERT_EQ(out.questions.size(), 5u);
  EXPECT_EQ(out.questions[1].text, "How does reading help develop specific skills?");
  EXPECT_EQ(out.questions[0].origin, QuestionOrigin::LlmPrompted);
  const auto prompt = rig.gateway.call_log().at(0).prompt;
  EXPECT_EQ(prompt.rfind("Please generate 5 questions for this context, ensuring", 0), 0u);
  EXPECT_NE(prompt.find("\nPersonA: I love reading!"), std::string::npos);
}

TEST(GenerateQuestions, UnreachableEndpoint) {
  EndpointQuestionGenerator g("http://127.0.0.1:1/generate", std::chrono::seconds(1));
  DialogueContext ctx;
  ctx.append(Speaker::User, "hi");
  try {
    generate_questions(ctx, g, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GeneratorUnavailable);
  }
}

TEST(Coq, MinimalRecordAndErrors) {
  const auto r = parse_coq_record(json::parse(R"({"context":"c","questions":["Why?"],"source":"TT","split":"Test"})"));
  EXPECT_EQ(r.source, CoqSource::TT);
  EXPECT_EQ(r.split, CoqSplit::Test);
  ASSERT_EQ(r.questions.size(), 1u);

  const auto code_of = [](const char* text) {
    try {
      parse_coq_record(json::parse(text));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code_of(R"({"context":"c","questions":["Not a question"],"source":"TT","split":"Test"})"),
            ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(R"({"context":"c","questions":["Why?"],"source":"XX","split":"Test"})"), ErrorCode::UnknownSource);
}

TEST(Coq, LoadCountsAndTable) {
  testing::TempDir dir;
  std::string lines;
  const auto line = [](const char* src, const char* split) {
    return std::string(R"({"context":"c","questions":["Why?"],"source":")") + src + R"(","split":")" + split +
           "\"}\n";
  };
  lines += line("ACR", "Train") + line("ACR", "Train") + line("GR", "Valid") + line("NC", "Test");
  write_file_atomic(dir / "coq.jsonl", lines);
  const auto data = load_coq(dir / "coq.jsonl");
  EXPECT_EQ(data.counts.at(CoqSource::ACR, CoqSplit::Train), 2);
  EXPECT_EQ(data.counts.at(CoqSource::GR, CoqSplit::Valid), 1);
  EXPECT_EQ(data.counts.split_total(CoqSplit::Train), 2);
  EXPECT_EQ(data.counts.total(), 4);
  const auto table = format_coq_table(data.counts);
  EXPECT_NE(table.find("ACR"), std::string::npos);
  EXPECT_NE(table.find("Total"), std::string::npos);

  write_file_atomic(dir / "bad.jsonl", line("TT", "Train") + "{\"context\":\"c\"}\n");
  try {
    load_coq(dir / "bad.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }
}

TEST(Coq, Bootstrap) {
  auto p = std::make_shared<ScriptedProvider>();
  p->add_rule("Give you a context: refuse*", "I'm sorry, I can't help with that.");
  p->add_rule("Give you a context: *", "1. What is a fox? 2. Where do foxes live?");
  testing::Rig rig(p);
  const auto ok = bootstrap_coq_candidates("Foxes are small.", rig.gateway, "mock");
  EXPECT_EQ(ok.candidates.size(), 2u);
  EXPECT_FALSE(ok.refused);
  EXPECT_EQ(rig.gateway.call_log().at(0).prompt,
            "Give you a context: Foxes are small.. Help me ask questions, which is unrelated to the person in the "
            "context ...");

  const auto refused = bootstrap_coq_candidates("refuse please", rig.gateway, "mock");
  EXPECT_TRUE(refused.refused);
  EXPECT_TRUE(refused.candidates.empty());
  EXPECT_THROW(bootstrap_coq_candidates("", rig.gateway, "mock"), Error);
}

}  // namespace
}  // namespace edit
