// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include "edit/llm.hpp"

#include <fstream>
#include <semaphore>
#include <thread>

namespace edit {

bool glob_match(std::string_view pattern, std::string_view text) {
  // Iterative wildcard match with single-star backtracking.
  std::size_t p = 0;
  std::size_t t = 0;
  std::size_t star = std::string_view::npos;
  std::size_t resume = 0;
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      resume = t;
    } else if (p < pattern.size() && pattern[p] == text[t]) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++resume;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

ScriptedProvider::ScriptedProvider(std::vector<Rule> rules) : rules_(std::move(rules)) {}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_json(const nlohmann::ordered_json& script) {
  auto provider = std::make_shared<ScriptedProvider>();
  if (script.is_object()) {
    for (const auto& [pattern, response] : script.items()) {
      provider->add_rule(pattern, response.get<std::string>());
    }
  } else if (script.is_array()) {
    for (const auto& rule : script) {
      provider->add_rule(rule.at("match").get<std::string>(),
                         rule.at("response").get<std::string>());
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "mock script must be a JSON object or array");
  }
  return provider;
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open mock script " + path.string());
  try {
    return from_json(nlohmann::ordered_json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "malformed mock script " + path.string() + ": " + e.what());
  }
}

void ScriptedProvider::add_rule(std::string pattern, std::string response) {
  std::unique_lock lock(mutex_);
  rules_.push_back({std::move(pattern), std::move(response)});
}

std::string ScriptedProvider::complete(const CompletionRequest& request) {
  std::shared_lock lock(mutex_);
  for (const auto& rule : rules_) {
    if (glob_match(rule.pattern, request.prompt)) return rule.response;
  }
  throw ProviderFailure(ErrorCode::ProviderUnavailable,
                        "no scripted response for prompt: " + request.prompt.substr(0, 80),
                        /*retryable=*/false);
}

std::vector<std::string> default_refusal_patterns() {
  return {"i'm sorry", "i cannot", "i can't", "as an ai"};
}

bool detect_refusal(std::string_view text, const std::vector<std::string>& patterns,
                    std::size_t window) {
  // Fold the typographic apostrophe so "I can’t" matches "i can't".
  std::string folded;
  folded.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.compare(i, 3, "\xE2\x80\x99") == 0) {
      folded.push_back('\'');
      i += 2;
    } else {
      folded.push_back(text[i]);
    }
  }
  const auto head = to_lower(std::string_view(folded).substr(0, window));
  for (const auto& pattern : patterns) {
    if (!pattern.empty() && head.find(to_lower(pattern)) != std::string::npos) return true;
  }
  return false;
}

struct LlmGateway::Slot {
  explicit Slot(std::shared_ptr<CompletionProvider> p, int limit)
      : provider(std::move(p)), in_flight(limit) {}
  std::shared_ptr<CompletionProvider> provider;
  std::counting_semaphore<1024> in_flight;
};

LlmGateway::LlmGateway(GatewayConfig config) : config_(std::move(config)) {
  if (!config_.sleep) {
    config_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

LlmGateway::~LlmGateway() = default;

void LlmGateway::register_provider(const std::string& id, std::shared_ptr<CompletionProvider> provider,
                                   int max_in_flight) {
  if (!provider) throw Error(ErrorCode::InvalidArgument, "null provider for " + id);
  const int limit = max_in_flight > 0 ? max_in_flight : config_.default_max_in_flight;
  std::unique_lock lock(registry_mutex_);
  providers_[id] = std::make_unique<Slot>(std::move(provider), limit);
}

bool LlmGateway::has_provider(std::string_view id) const {
  std::shared_lock lock(registry_mutex_);
  return providers_.find(id) != providers_.end();
}

std::vector<std::string> LlmGateway::provider_ids() const {
  std::shared_lock lock(registry_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, slot] : providers_) ids.push_back(id);
  return ids;
}

bool LlmGateway::detect_refusal(std::string_view text) const {
  return edit::detect_refusal(text, config_.refusal_patterns, config_.refusal_window);
}

CompletionResult LlmGateway::complete(const CompletionRequest& request, TurnBudget* budget) {
  if (request.max_tokens < 1) throw Error(ErrorCode::InvalidArgument, "max_tokens must be >= 1");
  if (request.temperature < 0) throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");

  Slot* slot = nullptr;
  {
    std::shared_lock lock(registry_mutex_);
    const auto it = providers_.find(request.provider_id);
    if (it != providers_.end()) slot = it->second.get();
  }
  if (slot == nullptr) {
    throw Error(ErrorCode::ProviderUnavailable, "provider not registered: " + request.provider_id);
  }
  if (budget != nullptr && !budget->try_acquire()) {
    throw Error(ErrorCode::BudgetExceeded,
                "per-turn call budget of " + std::to_string(budget->cap()) + " exhausted");
  }

  CallRecord record{request.provider_id, request.prompt_id, request.prompt, 0, false};
  const auto log = [this](CallRecord r) {
    std::lock_guard lock(log_mutex_);
    if (config_.call_log_limit > 0 && log_.size() >= config_.call_log_limit) {
      log_.erase(log_.begin(), log_.begin() + static_cast<std::ptrdiff_t>(log_.size() / 2));
    }
    log_.push_back(std::move(r));
  };

  auto backoff = config_.retry.initial_backoff;
  const int attempts = 1 + std::max(0, config_.retry.max_retries);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    record.attempts = attempt;
    const auto start = std::chrono::steady_clock::now();
    try {
      slot->in_flight.acquire();
      std::string text;
      try {
        text = slot->provider->complete(request);
      } catch (...) {
        slot->in_flight.release();
        throw;
      }
      slot->in_flight.release();
      CompletionResult result;
      result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
      result.refused = detect_refusal(text);
      result.text = std::move(text);
      result.provider_id = request.provider_id;
      record.ok = true;
      log(std::move(record));
      return result;
    } catch (const ProviderFailure& failure) {
      if (!failure.retryable() || attempt == attempts) {
        log(std::move(record));
        if (failure.code() == ErrorCode::Timeout) throw Error(ErrorCode::Timeout, failure.what());
        throw Error(ErrorCode::ProviderUnavailable, failure.what());
      }
    } catch (const std::exception& e) {
      log(std::move(record));
      throw Error(ErrorCode::ProviderUnavailable, e.what());
    }
    config_.sleep(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<std::int64_t>(static_cast<double>(backoff.count()) * config_.retry.backoff_multiplier));
  }
  throw Error(ErrorCode::ProviderUnavailable, "unreachable");
}

std::vector<CallRecord> LlmGateway::call_log() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

void LlmGateway::clear_call_log() {
  std::lock_guard lock(log_mutex_);
  log_.clear();
}

}  // namespace edit
