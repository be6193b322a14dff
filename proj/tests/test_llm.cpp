// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>
#include <future>
#include <thread>

#include "edit/errors.hpp"
#include "edit/llm.hpp"
#include "fixtures.hpp"

namespace edit {
namespace {

using testing::FailingProvider;
using testing::Rig;

CompletionRequest request(std::string prompt, std::string provider = "mock") {
  CompletionRequest r;
  r.prompt = std::move(prompt);
  r.provider_id = std::move(provider);
  return r;
}

TEST(Gateway, ScriptedEcho) {
  LlmGateway g(Rig::no_sleep());
  auto p = std::make_shared<ScriptedProvider>();
  p->add_rule("Give you a question: 2+2*", "4");
  g.register_provider("mock", p);
  const auto r = g.complete(request("Give you a question: 2+2, Please answer it as briefly as possible."));
  EXPECT_EQ(r.text, "4");
  EXPECT_FALSE(r.refused);
  EXPECT_EQ(r.provider_id, "mock");
}

TEST(Gateway, RefusalIsFlagged) {
  LlmGateway g(Rig::no_sleep());
  auto p = std::make_shared<ScriptedProvider>();
  p->add_rule("*", "I'm sorry, I cannot answer that.");
  g.register_provider("mock", p);
  EXPECT_TRUE(g.complete(request("anything")).refused);
}

TEST(Gateway, UnregisteredProvider) {
  LlmGateway g;
  try {
    g.complete(request("x", "nope"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProviderUnavailable);
  }
}

TEST(Gateway, RetryNeverExceedsAttemptCap) {
  auto cfg = Rig::no_sleep();
  std::vector<std::chrono::milliseconds> sleeps;
  cfg.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  LlmGateway g(cfg);
  auto p = std::make_shared<FailingProvider>();
  g.register_provider("mock", p);
  EXPECT_THROW(g.complete(request("x")), Error);
  EXPECT_EQ(p->attempts.load(), 1 + cfg.retry.max_retries);
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_EQ(sleeps[0].count(), 500);
  EXPECT_EQ(sleeps[1].count(), 1000);
  const auto log = g.call_log();
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].attempts, 3);
  EXPECT_FALSE(log[0].ok);
}

TEST(Gateway, NonRetryableFailsOnce) {
  LlmGateway g(Rig::no_sleep());
  auto p = std::make_shared<FailingProvider>(false);
  g.register_provider("mock", p);
  EXPECT_THROW(g.complete(request("x")), Error);
  EXPECT_EQ(p->attempts.load(), 1);
}

TEST(Gateway, TimeoutCodeSurvivesRetries) {
  LlmGateway g(Rig::no_sleep());
  g.register_provider("mock", std::make_shared<FailingProvider>(true, ErrorCode::Timeout));
  try {
    g.complete(request("x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Timeout);
  }
}

TEST(Gateway, RefusalsAreNotRetried) {
  LlmGateway g(Rig::no_sleep());
  auto p = std::make_shared<ScriptedProvider>();
  p->add_rule("*", "As an AI language model, I can't do that.");
  g.register_provider("mock", p);
  g.complete(request("x"));
  EXPECT_EQ(g.call_log().at(0).attempts, 1);
}

TEST(Gateway, BudgetExceeded) {
  LlmGateway g;
  auto p = std::make_shared<ScriptedProvider>();
  p->add_rule("*", "ok");
  g.register_provider("mock", p);
  TurnBudget budget(2);
  g.complete(request("a"), &budget);
  g.complete(request("b"), &budget);
  try {
    g.complete(request("c"), &budget);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BudgetExceeded);
  }
  EXPECT_EQ(TurnBudget(1000).cap(), TurnBudget::kHardCap);
}

class SlowProvider : public CompletionProvider {
 public:
  std::string complete(const CompletionRequest&) override {
    const int now = ++in_flight;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --in_flight;
    return "done";
  }
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
};

TEST(Gateway, InFlightLimitHolds) {
  LlmGateway g;
  auto p = std::make_shared<SlowProvider>();
  g.register_provider("mock", p, 2);
  std::vector<std::future<CompletionResult>> fs;
  for (int i = 0; i < 8; ++i) fs.push_back(std::async(std::launch::async, [&] { return g.complete(request("x")); }));
  for (auto& f : fs) EXPECT_EQ(f.get().text, "done");
  EXPECT_LE(p->peak.load(), 2);
}

TEST(Refusal, DefaultPatterns) {
  const auto pats = default_refusal_patterns();
  EXPECT_TRUE(detect_refusal("I cannot answer that", pats));
  EXPECT_FALSE(detect_refusal("Paris is the capital of France.", pats));
  EXPECT_TRUE(detect_refusal("As an AI language model, I can\xE2\x80\x99t provide that.", pats));
  EXPECT_FALSE(detect_refusal(std::string(130, 'x') + " i cannot", pats));
}

TEST(Glob, Matching) {
  EXPECT_TRUE(glob_match("a*c", "abbbc"));
  EXPECT_TRUE(glob_match("*", ""));
  EXPECT_FALSE(glob_match("a*c", "abcd"));
  EXPECT_TRUE(glob_match("Give you*better?", "Give you a question: q, please tell me which is better?"));
}

TEST(ScriptedProvider, ArrayForm) {
  const auto p = ScriptedProvider::from_json(nlohmann::ordered_json::parse(
      R"([{"match":"b*","response":"B"},{"match":"*","response":"other"}])"));
  CompletionRequest r;
  r.prompt = "bee";
  EXPECT_EQ(p->complete(r), "B");
  r.prompt = "cat";
  EXPECT_EQ(p->complete(r), "other");
}

}  // namespace
}  // namespace edit
