// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "edit/errors.hpp"
#include "edit/prompts.hpp"

namespace edit {
namespace {

TEST(Prompts, QaBriefGolden) {
  EXPECT_EQ(render_prompt(PromptId::QaBrief, {{"question", "What causes memory loss?"}}),
            "Give you a question: What causes memory loss?, Please answer it as briefly as possible.");
}

TEST(Prompts, IntegrateGolden) {
  EXPECT_EQ(render_prompt(PromptId::Integrate, {{"q", "Q"}, {"answerLLM", "A1"}, {"answerKB", "A2"}}),
            "Give you a question: Q, and two answers to it, AnswerA: A1, AnswerB:A2, please tell me which is better?");
}

TEST(Prompts, KbOrganizeKeepsWording) {
  EXPECT_EQ(render_prompt(PromptId::KbOrganize, {{"question", "Q"}, {"knowledge", "k1 k2"}}),
            "Give you a question: Q, Please answer it use those knowledge: k1 k2.");
}

TEST(Prompts, RespondGolden) {
  EXPECT_EQ(render_prompt(PromptId::Respond, {{"context", "C"}, {"knowledge", "K"}, {"next_person", "PersonA"}}),
            "Give you a context: C and some knowledge K. Please use those knowledge to just generate next "
            "response of PersonA.");
}

TEST(Prompts, JudgeAndComparisonGolden) {
  EXPECT_EQ(render_prompt(PromptId::Gpt4Judge, {{"context", "C"}, {"response_list", "R"}}),
            "Give you a context:C and some responses: R. Please score the response according to whether the "
            "answer provide more useful knowledge and give me your score.");
  EXPECT_EQ(render_prompt(PromptId::LlmCompareQg, {{"count", "5"}}),
            "Please generate 5 questions for this context, ensuring that the questions do not involve subjective "
            "judgments and focus on well-known objective facts.");
  EXPECT_EQ(render_prompt(PromptId::CoqBootstrap, {{"context", "C"}}),
            "Give you a context: C. Help me ask questions, which is unrelated to the person in the context ...");
}

TEST(Prompts, MissingAndUnknownSlots) {
  try {
    render_prompt(PromptId::QaBrief, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingSlot);
  }
  try {
    render_prompt(PromptId::QaBrief, {{"question", "q"}, {"extra", "x"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownSlot);
  }
}

TEST(Prompts, SubstitutedTextIsNotRescanned) {
  EXPECT_EQ(render_prompt(PromptId::QaBrief, {{"question", "{question}"}}),
            "Give you a question: {question}, Please answer it as briefly as possible.");
}

TEST(Prompts, RegistryHasSevenDistinctIds) {
  const auto& all = prompt_templates();
  ASSERT_EQ(all.size(), 7u);
  for (const auto& t : all) {
    EXPECT_EQ(prompt_id_from_string(to_string(t.id)), t.id);
    EXPECT_FALSE(t.required_slots.empty());
  }
}

}  // namespace
}  // namespace edit
