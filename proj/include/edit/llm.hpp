// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "edit/core.hpp"
#include "edit/prompts.hpp"

namespace edit {

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.7;
  int max_tokens = 512;
  std::string provider_id;
  std::optional<PromptId> prompt_id;  // which template produced `prompt`, if any
};

struct CompletionResult {
  std::string text;
  std::string provider_id;
  std::int64_t latency_ms = 0;
  bool refused = false;
};

/// Raised by providers. Transport errors and 5xx-class responses are
/// retryable; anything else (bad request, missing script entry) is not.
class ProviderFailure : public Error {
 public:
  ProviderFailure(ErrorCode code, const std::string& message, bool retryable)
      : Error(code, message), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

/// Offline provider replaying canned responses. Rules are tried in order; a
/// pattern matches the whole prompt with '*' standing for any run of
/// characters, so "Give you a question: 2+2*" is a prefix rule.
class ScriptedProvider : public CompletionProvider {
 public:
  struct Rule {
    std::string pattern;
    std::string response;
  };

  explicit ScriptedProvider(std::vector<Rule> rules = {});

  /// Accepts either an object {"pattern": "response", ...} (file order kept)
  /// or an array [{"match": ..., "response": ...}].
  static std::shared_ptr<ScriptedProvider> from_json(const nlohmann::ordered_json& script);
  static std::shared_ptr<ScriptedProvider> from_file(const std::filesystem::path& path);

  void add_rule(std::string pattern, std::string response);
  std::string complete(const CompletionRequest& request) override;

 private:
  mutable std::shared_mutex mutex_;
  std::vector<Rule> rules_;
};

bool glob_match(std::string_view pattern, std::string_view text);

/// OpenAI-style chat/completions client.
class HttpChatProvider : public CompletionProvider {
 public:
  struct Options {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string model;
    std::string api_key;
    std::chrono::seconds timeout{60};
  };

  explicit HttpChatProvider(Options options);
  /// Reads EDIT_LLM_BASE_URL, EDIT_LLM_MODEL and EDIT_LLM_API_KEY; nullopt
  /// when the base URL is unset.
  static std::optional<Options> options_from_env();

  std::string complete(const CompletionRequest& request) override;

 private:
  Options options_;
};

struct RetryPolicy {
  int max_retries = 2;  // total attempts = 1 + max_retries
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
};

std::vector<std::string> default_refusal_patterns();

struct GatewayConfig {
  RetryPolicy retry;
  std::vector<std::string> refusal_patterns = default_refusal_patterns();
  std::size_t refusal_window = 120;
  int default_max_in_flight = 4;
  std::size_t call_log_limit = 100000;  // oldest half dropped when reached; 0 = unbounded
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleep_for
};

/// Per-turn cap on logical completion calls.
class TurnBudget {
 public:
  static constexpr int kHardCap = 32;

  explicit TurnBudget(int cap) : cap_(cap < kHardCap ? cap : kHardCap) {}

  bool try_acquire() {
    int cur = used_.load();
    while (cur < cap_) {
      if (used_.compare_exchange_weak(cur, cur + 1)) return true;
    }
    return false;
  }
  int used() const { return used_.load(); }
  int cap() const { return cap_; }

 private:
  int cap_;
  std::atomic<int> used_{0};
};

/// One prompt actually sent to a provider during a turn.
struct PromptRecord {
  PromptId id;
  std::string text;
  std::string provider_id;
  bool ok = false;
};

struct CallRecord {
  std::string provider_id;
  std::optional<PromptId> prompt_id;
  std::string prompt;
  int attempts = 0;
  bool ok = false;
};

class LlmGateway {
 public:
  explicit LlmGateway(GatewayConfig config = {});
  ~LlmGateway();
  LlmGateway(const LlmGateway&) = delete;
  LlmGateway& operator=(const LlmGateway&) = delete;

  void register_provider(const std::string& id, std::shared_ptr<CompletionProvider> provider,
                         int max_in_flight = 0);
  bool has_provider(std::string_view id) const;
  std::vector<std::string> provider_ids() const;

  /// Throws ProviderUnavailable (unregistered, or retries exhausted), Timeout
  /// (last attempt timed out) or BudgetExceeded.
  CompletionResult complete(const CompletionRequest& request, TurnBudget* budget = nullptr);

  bool detect_refusal(std::string_view text) const;

  std::vector<CallRecord> call_log() const;
  void clear_call_log();
  const GatewayConfig& config() const { return config_; }

 private:
  struct Slot;

  GatewayConfig config_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<Slot>, std::less<>> providers_;
  mutable std::mutex log_mutex_;
  std::vector<CallRecord> log_;
};

/// Case-insensitive refusal check over the first `window` characters.
bool detect_refusal(std::string_view text, const std::vector<std::string>& patterns,
                    std::size_t window = 120);

}  // namespace edit
