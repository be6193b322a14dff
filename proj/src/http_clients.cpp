// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

// Outbound HTTP: chat completions, remote embeddings, and the external
// question generation model.

#include <cstdlib>
#include <mutex>

#include <httplib.h>

#include "edit/embedding.hpp"
#include "edit/llm.hpp"
#include "edit/question_gen.hpp"

namespace edit {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidArgument, "URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string join_path(const std::string& base, const std::string& suffix) {
  if (!base.empty() && base.back() == '/') return base.substr(0, base.size() - 1) + suffix;
  return base + suffix;
}

// POSTs JSON and returns the parsed reply. Connection failures, timeouts and
// 5xx are retryable ProviderFailures; other non-2xx statuses are not.
json post_json(const std::string& url, const json& body, const std::string& bearer,
               std::chrono::seconds timeout) {
  const auto parts = split_url(url);
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);

  const auto res = client.Post(parts.path, headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                           err == httplib::Error::ConnectionTimeout;
    throw ProviderFailure(timed_out ? ErrorCode::Timeout : ErrorCode::ProviderUnavailable,
                          url + ": " + httplib::to_string(err), /*retryable=*/true);
  }
  if (res->status >= 500) {
    throw ProviderFailure(ErrorCode::ProviderUnavailable,
                          url + ": HTTP " + std::to_string(res->status), /*retryable=*/true);
  }
  if (res->status < 200 || res->status >= 300) {
    throw ProviderFailure(ErrorCode::ProviderUnavailable,
                          url + ": HTTP " + std::to_string(res->status) + " " + res->body.substr(0, 200),
                          /*retryable=*/false);
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProviderFailure(ErrorCode::ProviderUnavailable, url + ": invalid JSON reply: " + e.what(), false);
  }
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string{};
}

}  // namespace

HttpChatProvider::HttpChatProvider(Options options) : options_(std::move(options)) {}

std::optional<HttpChatProvider::Options> HttpChatProvider::options_from_env() {
  Options o;
  o.base_url = env_or_empty("EDIT_LLM_BASE_URL");
  if (o.base_url.empty()) return std::nullopt;
  o.model = env_or_empty("EDIT_LLM_MODEL");
  o.api_key = env_or_empty("EDIT_LLM_API_KEY");
  return o;
}

std::string HttpChatProvider::complete(const CompletionRequest& request) {
  json body{{"model", options_.model},
            {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};
  const auto reply = post_json(join_path(options_.base_url, "/chat/completions"), body,
                               options_.api_key, options_.timeout);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ProviderFailure(ErrorCode::ProviderUnavailable,
                          std::string("unexpected completion payload: ") + e.what(), false);
  }
}

HttpEmbeddingProvider::HttpEmbeddingProvider(Options options)
    : options_(std::move(options)), dim_(options_.dim) {}

EmbeddingProviderInfo HttpEmbeddingProvider::info() const {
  std::shared_lock lock(mutex_);
  return {"remote:" + options_.model, dim_, EmbeddingKind::RemoteApi};
}

std::vector<std::vector<double>> HttpEmbeddingProvider::encode(std::string_view text) {
  json body{{"input", json::array({std::string(text)})}};
  if (!options_.model.empty()) body["model"] = options_.model;
  const auto reply = post_json(options_.url, body, options_.api_key, std::chrono::seconds(60));

  std::vector<double> v;
  try {
    if (reply.contains("data")) {
      v = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    } else {
      v = reply.at("embeddings").at(0).get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProviderUnavailable, std::string("unexpected embedding payload: ") + e.what());
  }
  std::unique_lock lock(mutex_);
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  if (static_cast<int>(v.size()) != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "remote embedding dim changed from " + std::to_string(dim_) +
                                                  " to " + std::to_string(v.size()));
  }
  return {std::move(v)};
}

EndpointQuestionGenerator::EndpointQuestionGenerator(std::string url, std::chrono::seconds timeout)
    : url_(std::move(url)), timeout_(timeout) {}

GeneratorCall EndpointQuestionGenerator::generate_raw(const DialogueContext& ctx, int /*max_questions*/,
                                                      TurnBudget* /*budget*/) {
  GeneratorCall call;
  try {
    const auto reply = post_json(url_, json{{"context", render_context(ctx)}}, "", timeout_);
    call.raw_output = reply.at("text").get<std::string>();
  } catch (const Error& e) {
    throw Error(ErrorCode::GeneratorUnavailable, std::string("question generation endpoint: ") + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::GeneratorUnavailable, std::string("question generation endpoint reply: ") + e.what());
  }
  return call;
}

}  // namespace edit
