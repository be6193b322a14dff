// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

// Shared test data: the reading conversation, its five questions, a scripted
// provider that replays them, and a small KB about reading.

#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "edit/core.hpp"
#include "edit/embedding.hpp"
#include "edit/knowledge_base.hpp"
#include "edit/llm.hpp"
#include "edit/util.hpp"

namespace edit::testing {

inline const std::vector<std::string>& reading_questions() {
  static const std::vector<std::string> q{
      "What are some other ways to spend time besides reading?",
      "How does reading help develop specific skills?",
      "Are there any specific genres of books that are particularly popular among readers?",
      "What are some benefits of reading as a means of sharing information and ideas?",
      "How does reading differ from other forms of entertainment, such as movies or television?",
  };
  return q;
}

inline std::string reading_questions_raw() {
  std::string raw;
  for (std::size_t i = 0; i < reading_questions().size(); ++i) {
    raw += "Q" + std::to_string(i + 1) + ": " + reading_questions()[i] + "\n";
  }
  return raw;
}

inline DialogueContext reading_context() {
  return context_from_turns(json::array({
      {{"speaker", "PersonA"}, {"text", "I love reading!  It's a means of sharing information and ideas"}},
      {{"speaker", "PersonB"},
       {"text", "Reading is one of my favorite ways to spend my time. My favorite book series is Harry Potter "
                "by J.K. Rowling."}},
      {{"speaker", "PersonA"},
       {"text", "Many people love that series! Reading requires continuous practice development and refinement"}},
      {{"speaker", "PersonB"},
       {"text", "So reading can help widen your vocabulary? Are there any other benefits to reading?"}},
  }));
}

inline const std::vector<std::string>& reading_llm_answers() {
  static const std::vector<std::string> a{
      "Sports, music, and spending time with friends.",
      "It builds vocabulary, comprehension, and critical thinking.",
      "Mystery, romance, and fantasy are widely read.",
      "It lets readers explore different perspectives and gain insights.",
      "Reading is active and self-paced, while film is passive.",
  };
  return a;
}

inline const std::vector<std::string>& reading_kb_answers() {
  static const std::vector<std::string> a{
      "People also spend time on hobbies such as painting and hiking.",
      "Reading enhances critical thinking and analytical skills, as it requires analyzing and interpreting "
      "information.",
      "Fantasy and mystery are among the most popular genres.",
      "Reading promotes empathy by exposing readers to different cultures, experiences, and viewpoints.",
      "Reading stimulates creativity and imagination more than watching television.",
  };
  return a;
}

inline const std::string kBaselineReply =
    "PersonA: Absolutely! Reading not only expands your vocabulary, but it also enhances your communication skills.";
inline const std::string kEditReply =
    "PersonA: Absolutely! Reading enhances critical thinking and analytical skills, and it promotes empathy by "
    "exposing us to different cultures, experiences, and viewpoints.";

/// Rules for every prompt an EDIT turn on reading_context() sends. Integrate
/// votes AnswerA for odd question numbers and AnswerB for even ones.
inline std::shared_ptr<ScriptedProvider> reading_script() {
  auto p = std::make_shared<ScriptedProvider>();
  const auto& q = reading_questions();
  for (std::size_t i = 0; i < q.size(); ++i) {
    p->add_rule("Give you a question: " + q[i] + ", and two answers to it, *",
                i % 2 == 0 ? "AnswerA is better." : "AnswerB is better because it is grounded.");
    p->add_rule("Give you a question: " + q[i] + ", Please answer it as briefly as possible.",
                reading_llm_answers()[i]);
    p->add_rule("Give you a question: " + q[i] + ", Please answer it use those knowledge: *",
                reading_kb_answers()[i]);
  }
  p->add_rule("Please generate * questions for this context*", reading_questions_raw());
  p->add_rule("Give you a context: * and some knowledge . Please use those knowledge*", kBaselineReply);
  p->add_rule("Give you a context: * and some knowledge *", kEditReply);
  p->add_rule("Give you a context:*and some responses:*", "1: 80\n2: 60\n3: 70\n4: 50");
  return p;
}

inline std::vector<KnowledgeDocument> reading_docs() {
  return {
      {"reading", "Reading",
       "Reading enhances critical thinking and analytical skills. Reading promotes empathy by exposing readers to "
       "different cultures. Regular readers build a larger vocabulary. Fantasy and mystery are popular genres."},
      {"leisure", "Leisure",
       "People spend free time on sports, music and travel. Television and movies are passive forms of "
       "entertainment. Painting and hiking are common hobbies."},
  };
}

struct Rig {
  LlmGateway gateway;
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<KnowledgeBase> kb;

  explicit Rig(std::shared_ptr<CompletionProvider> provider, GatewayConfig config = no_sleep())
      : gateway(std::move(config)) {
    gateway.register_provider("mock", std::move(provider));
    embedder = std::make_shared<Embedder>(std::make_shared<HashingEmbeddingProvider>(),
                                          std::make_shared<EmbeddingCache>());
    const auto info = embedder->info();
    kb = std::make_shared<KnowledgeBase>(info.dim, info.provider_id);
    const auto docs = reading_docs();
    kb->ingest(docs, *embedder);
  }

  static GatewayConfig no_sleep() {
    GatewayConfig c;
    c.sleep = [](std::chrono::milliseconds) {};
    return c;
  }
};

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() / ("edit-test-" + random_hex(8));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Fails every call; counts attempts.
class FailingProvider : public CompletionProvider {
 public:
  explicit FailingProvider(bool retryable = true, ErrorCode code = ErrorCode::ProviderUnavailable)
      : retryable_(retryable), code_(code) {}
  std::string complete(const CompletionRequest&) override {
    ++attempts;
    throw ProviderFailure(code_, "simulated outage", retryable_);
  }
  std::atomic<int> attempts{0};

 private:
  bool retryable_;
  ErrorCode code_;
};

}  // namespace edit::testing
