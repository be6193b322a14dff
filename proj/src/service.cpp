// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include "edit/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include <httplib.h>

#include "edit/errors.hpp"
#include "edit/util.hpp"

namespace edit {

std::optional<std::string> api_token_from_env() {
  const char* v = std::getenv("EDIT_API_TOKEN");
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

ApiResponse error_response(int status, std::string_view code, std::string_view message) {
  return {status, json{{"error", {{"code", code}, {"message", message}}}}.dump()};
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::DuplicateDocId: return 409;
    case ErrorCode::EmptyText:
    case ErrorCode::EmptyContext:
    case ErrorCode::EmptyInput: return 422;
    case ErrorCode::InvalidArgument:
    case ErrorCode::MalformedRecord: return 400;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::Timeout:
    case ErrorCode::BudgetExceeded: return 502;
    default: return 500;
  }
}

namespace {

ApiResponse from_error(const Error& e) {
  return error_response(http_status_for(e.code()), to_string(e.code()), e.what());
}

ApiResponse ok(int status, const json& body) { return {status, body.dump()}; }

std::optional<json> parse_body(std::string_view body) {
  if (trim(body).empty()) return json::object();
  try {
    auto j = json::parse(body);
    if (!j.is_object()) return std::nullopt;
    return j;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ChatService::ChatService(Pipeline& pipeline, ServiceOptions options)
    : pipeline_(pipeline), options_(std::move(options)) {
  options_.defaults.validate();
}

bool ChatService::authorized(std::string_view header) const {
  if (!options_.api_token) return true;
  return header == "Bearer " + *options_.api_token;
}

std::size_t ChatService::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<ChatService::Session> ChatService::find(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

ApiResponse ChatService::create_session(std::string_view body) {
  const auto parsed = parse_body(body);
  if (!parsed) return error_response(400, "InvalidArgument", "body must be a JSON object");
  const json& overrides = parsed->contains("config") ? parsed->at("config") : *parsed;

  auto session = std::make_shared<Session>();
  try {
    session->config = apply_overrides(options_.defaults, overrides);
  } catch (const Error& e) {
    return error_response(400, to_string(e.code()), e.what());
  }
  session->id = random_uuid();
  session->created_at = utc_now();
  {
    std::unique_lock lock(sessions_mutex_);
    sessions_.emplace(session->id, session);
  }
  save_snapshot();
  return ok(201, {{"session_id", session->id}, {"config", session->config}});
}

ApiResponse ChatService::post_message(const std::string& session_id, std::string_view body) {
  auto session = find(session_id);
  if (!session) return error_response(404, "NotFound", "unknown session " + session_id);
  const auto parsed = parse_body(body);
  if (!parsed) return error_response(400, "InvalidArgument", "body must be a JSON object");
  const auto text_it = parsed->find("text");
  if (text_it == parsed->end() || !text_it->is_string() || trim(text_it->get<std::string>()).empty()) {
    return error_response(422, "EmptyText", "message text must be a non-empty string");
  }

  std::lock_guard turn(session->turn);
  // The session may have been deleted while this turn waited.
  if (!find(session_id)) return error_response(404, "NotFound", "unknown session " + session_id);

  DialogueContext ctx;
  {
    std::lock_guard state(session->state);
    ctx = session->context;
  }
  ctx.append(Speaker::User, text_it->get<std::string>());
  ctx.next_speaker = Speaker::Bot;

  std::shared_ptr<const KbIndex> overlay;
  if (session->overlay) overlay = session->overlay->snapshot();

  TurnResult result;
  try {
    result = pipeline_.run(ctx, session->config, overlay && !overlay->empty() ? overlay.get() : nullptr);
  } catch (const TurnError& e) {
    const auto& trace = e.trace();
    {
      std::unique_lock lock(traces_mutex_);
      traces_[trace.trace_id] = trace.serialize();
    }
    json body{{"error", {{"code", to_string(e.code())}, {"message", e.what()}, {"trace_id", trace.trace_id}}}};
    return {http_status_for(e.code()), body.dump()};
  } catch (const Error& e) {
    return from_error(e);
  }

  ctx.append(Speaker::Bot, result.response.text);
  {
    std::lock_guard state(session->state);
    session->context = std::move(ctx);
  }
  {
    std::unique_lock lock(traces_mutex_);
    traces_[result.trace.trace_id] = result.trace.serialize();
  }
  save_snapshot();

  json questions = json::array();
  for (const auto& q : result.trace.questions) questions.push_back(q.text);
  json chosen = json::array();
  for (const auto& a : result.trace.answers) {
    chosen.push_back({{"question_ordinal", a.integrated.question_ordinal},
                      {"chosen", to_string(a.integrated.chosen)},
                      {"text", a.integrated.text}});
  }
  return ok(200, {{"response", result.response.text},
                  {"trace_id", result.trace.trace_id},
                  {"system", to_string(result.trace.system)},
                  {"degraded", result.trace.degraded},
                  {"questions", questions},
                  {"chosen_answers", chosen}});
}

ApiResponse ChatService::delete_session(const std::string& session_id) {
  {
    std::unique_lock lock(sessions_mutex_);
    if (sessions_.erase(session_id) == 0) return error_response(404, "NotFound", "unknown session " + session_id);
  }
  save_snapshot();
  return {204, ""};
}

ApiResponse ChatService::get_session(const std::string& session_id) const {
  auto session = find(session_id);
  if (!session) return error_response(404, "NotFound", "unknown session " + session_id);
  std::lock_guard state(session->state);
  return ok(200, {{"session_id", session->id},
                  {"created_at", session->created_at},
                  {"context", session->context},
                  {"config", session->config},
                  {"kb_overlay_version", session->overlay ? session->overlay->snapshot()->version() : 0}});
}

ApiResponse ChatService::ingest_document(std::string_view body) {
  const auto parsed = parse_body(body);
  if (!parsed) return error_response(400, "InvalidArgument", "body must be a JSON object");
  KnowledgeDocument doc;
  try {
    doc.doc_id = parsed->at("doc_id").get<std::string>();
    doc.text = parsed->at("text").get<std::string>();
    if (parsed->contains("title")) doc.title = parsed->at("title").get<std::string>();
  } catch (const json::exception&) {
    return error_response(400, "InvalidArgument", "doc_id and text must be strings");
  }
  if (trim(doc.doc_id).empty()) return error_response(400, "InvalidArgument", "doc_id must be non-empty");
  if (trim(doc.text).empty()) return error_response(422, "EmptyText", "document text is empty");

  const auto& global = pipeline_.knowledge_base();
  const auto& embedder = pipeline_.embedder();
  try {
    if (parsed->contains("session_id") && !parsed->at("session_id").is_null()) {
      const auto sid = parsed->at("session_id").get<std::string>();
      auto session = find(sid);
      if (!session) return error_response(404, "NotFound", "unknown session " + sid);
      std::lock_guard turn(session->turn);
      if (global && global->snapshot()->doc_ids().count(doc.doc_id)) {
        return error_response(409, "DuplicateDocId", "doc_id already in the global KB: " + doc.doc_id);
      }
      if (!session->overlay) {
        const auto info = embedder->info();
        std::lock_guard state(session->state);
        session->overlay = std::make_shared<KnowledgeBase>(info.dim, info.provider_id);
      }
      const auto stats = session->overlay->ingest(std::span<const KnowledgeDocument>(&doc, 1), *embedder);
      return ok(201, {{"sentence_count", stats.sentence_count}, {"kb_version", stats.version}, {"scope", "session"}});
    }
    if (!global) return error_response(500, "NotFound", "no global knowledge base configured");
    const auto stats = global->ingest(std::span<const KnowledgeDocument>(&doc, 1), *embedder);
    return ok(201, {{"sentence_count", stats.sentence_count}, {"kb_version", stats.version}, {"scope", "global"}});
  } catch (const Error& e) {
    return from_error(e);
  }
}

ApiResponse ChatService::get_trace(const std::string& trace_id) const {
  std::shared_lock lock(traces_mutex_);
  const auto it = traces_.find(trace_id);
  if (it == traces_.end()) return error_response(404, "NotFound", "unknown trace " + trace_id);
  return {200, it->second};
}

ApiResponse ChatService::healthz() const {
  const auto& kb = pipeline_.knowledge_base();
  return ok(200, {{"status", "ok"},
                  {"kb_version", kb ? kb->snapshot()->version() : 0},
                  {"providers", pipeline_.gateway().provider_ids()}});
}

void ChatService::save_snapshot() const {
  if (!options_.snapshot_path) return;
  std::vector<std::shared_ptr<Session>> sessions;
  {
    std::shared_lock lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) sessions.push_back(s);
  }
  std::string out;
  for (const auto& s : sessions) {
    std::lock_guard state(s->state);
    const json j{{"session_id", s->id}, {"created_at", s->created_at}, {"config", s->config},
                 {"context", s->context}};
    out += j.dump() + "\n";
  }
  std::lock_guard lock(snapshot_mutex_);
  write_file_atomic(*options_.snapshot_path, out);
}

void ChatService::load_snapshot() {
  if (!options_.snapshot_path || !std::filesystem::exists(*options_.snapshot_path)) return;
  std::ifstream in(*options_.snapshot_path);
  std::string line;
  int line_no = 0;
  std::unique_lock lock(sessions_mutex_);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      auto s = std::make_shared<Session>();
      s->id = j.at("session_id").get<std::string>();
      s->created_at = j.value("created_at", "");
      s->config = apply_overrides(options_.defaults, j.at("config"));
      if (j.contains("context")) s->context = j.at("context").get<DialogueContext>();
      sessions_[s->id] = std::move(s);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::MalformedRecord,
                  options_.snapshot_path->string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

// --- HTTP -------------------------------------------------------------------

struct HttpServer::Impl {
  ChatService& service;
  httplib::Server server;
  explicit Impl(ChatService& s) : service(s) {}
};

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  if (!r.body.empty()) res.set_content(r.body, "application/json");
}

}  // namespace

HttpServer::HttpServer(ChatService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  auto& svc = impl_->service;

  srv.set_pre_routing_handler([&svc](const httplib::Request& req, httplib::Response& res) {
    const auto origin = req.get_header_value("Origin");
    const auto& allowed = svc.options().cors_origins;
    if (!origin.empty() && std::find(allowed.begin(), allowed.end(), origin) != allowed.end()) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
      res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    }
    if (req.method == "OPTIONS") {
      res.status = 204;
      return httplib::Server::HandlerResponse::Handled;
    }
    if (req.path != "/v1/healthz" && !svc.authorized(req.get_header_value("Authorization"))) {
      send(res, error_response(401, "Unauthorized", "missing or invalid bearer token"));
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  srv.Post("/v1/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.create_session(req.body));
  });
  srv.Post(R"(/v1/sessions/([^/]+)/messages)", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.post_message(req.matches[1], req.body));
  });
  srv.Get(R"(/v1/sessions/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_session(req.matches[1]));
  });
  srv.Delete(R"(/v1/sessions/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.delete_session(req.matches[1]));
  });
  srv.Post("/v1/kb/documents", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.ingest_document(req.body));
  });
  srv.Get(R"(/v1/traces/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_trace(req.matches[1]));
  });
  srv.Get("/v1/healthz", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.healthz()); });

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const auto r = error_response(res.status, res.status == 404 ? "NotFound" : "HttpError", "no such route");
      res.set_content(r.body, "application/json");
    }
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    send(res, error_response(500, "Internal", msg));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int bound = srv.bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorCode::Io, "cannot bind " + host);
    return bound;
  }
  if (!srv.bind_to_port(host, port)) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace edit
