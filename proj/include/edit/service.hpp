// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "edit/core.hpp"
#include "edit/knowledge_base.hpp"
#include "edit/pipeline.hpp"

namespace edit {

struct ServiceOptions {
  PipelineConfig defaults;
  std::optional<std::string> api_token;  // bearer auth when set
  std::vector<std::string> cors_origins;
  std::optional<std::filesystem::path> snapshot_path;  // sessions JSONL
};

/// Reads EDIT_API_TOKEN.
std::optional<std::string> api_token_from_env();

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON text
};

/// Transport-independent /v1 logic. Every method is safe to call from many
/// threads; turns within one session are serialized.
class ChatService {
 public:
  ChatService(Pipeline& pipeline, ServiceOptions options);

  ApiResponse create_session(std::string_view body);
  ApiResponse post_message(const std::string& session_id, std::string_view body);
  ApiResponse delete_session(const std::string& session_id);
  ApiResponse ingest_document(std::string_view body);
  ApiResponse get_trace(const std::string& trace_id) const;
  ApiResponse get_session(const std::string& session_id) const;
  ApiResponse healthz() const;

  /// True when no token is configured or the header carries it.
  bool authorized(std::string_view authorization_header) const;
  const ServiceOptions& options() const { return options_; }
  std::size_t session_count() const;

  /// Restores sessions (context and config) from the snapshot file.
  void load_snapshot();

 private:
  struct Session {
    std::string id;
    std::mutex turn;   // serializes turns and overlay ingest
    std::mutex state;  // guards context for readers outside the turn
    DialogueContext context;
    PipelineConfig config;
    std::shared_ptr<KnowledgeBase> overlay;
    std::string created_at;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  void save_snapshot() const;

  Pipeline& pipeline_;
  ServiceOptions options_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  mutable std::shared_mutex traces_mutex_;
  std::map<std::string, std::string> traces_;
  mutable std::mutex snapshot_mutex_;
};

/// JSON error body {"error":{"code","message"}}.
ApiResponse error_response(int status, std::string_view code, std::string_view message);
/// HTTP status for a library error code.
int http_status_for(ErrorCode code);

/// httplib front end for ChatService.
class HttpServer {
 public:
  explicit HttpServer(ChatService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port (port 0 picks a free one). Returns the bound port or
  /// throws Io.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind.
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace edit
