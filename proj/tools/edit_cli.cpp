// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

// edit: ingest, serve, chat, eval, coq-validate, coq-bootstrap, trace-show.
// Exit codes: 0 ok, 2 usage or data error, 1 runtime failure.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "edit/embedding.hpp"
#include "edit/errors.hpp"
#include "edit/eval.hpp"
#include "edit/knowledge_base.hpp"
#include "edit/llm.hpp"
#include "edit/pipeline.hpp"
#include "edit/question_gen.hpp"
#include "edit/service.hpp"
#include "edit/util.hpp"

namespace fs = std::filesystem;
using namespace edit;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord:
    case ErrorCode::UnknownSource:
    case ErrorCode::DuplicateDocId:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyText:
    case ErrorCode::EmptyContext:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::Io: return 2;
    default: return 1;
  }
}

std::string env_or(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

// --embedder: mock | hash-<dim> | remote (EDIT_EMBED_URL, EDIT_EMBED_MODEL,
// EDIT_EMBED_API_KEY, EDIT_EMBED_DIM).
std::shared_ptr<Embedder> make_embedder(const std::string& id, const std::optional<fs::path>& cache_path) {
  std::shared_ptr<EmbeddingProvider> provider;
  if (id == "mock") {
    provider = std::make_shared<HashingEmbeddingProvider>();
  } else if (id.rfind("hash-", 0) == 0) {
    int dim = 0;
    try {
      dim = std::stoi(id.substr(5));
    } catch (const std::exception&) {
    }
    if (dim < 1) throw UsageError("bad embedder id: " + id);
    provider = std::make_shared<HashingEmbeddingProvider>(dim);
  } else if (id == "remote") {
    HttpEmbeddingProvider::Options o;
    o.url = env_or("EDIT_EMBED_URL");
    o.model = env_or("EDIT_EMBED_MODEL");
    o.api_key = env_or("EDIT_EMBED_API_KEY");
    try {
      o.dim = std::stoi(env_or("EDIT_EMBED_DIM", "0"));
    } catch (const std::exception&) {
      throw UsageError("EDIT_EMBED_DIM must be an integer");
    }
    if (o.url.empty() || o.dim < 1) throw UsageError("--embedder remote needs EDIT_EMBED_URL and EDIT_EMBED_DIM");
    provider = std::make_shared<HttpEmbeddingProvider>(o);
  } else {
    throw UsageError("unknown embedder: " + id);
  }
  auto cache = std::make_shared<EmbeddingCache>();
  if (cache_path && fs::exists(*cache_path)) cache->load(*cache_path);
  return std::make_shared<Embedder>(provider, cache);
}

std::shared_ptr<KnowledgeBase> open_kb(const std::optional<fs::path>& path, const Embedder& embedder) {
  const auto info = embedder.info();
  if (!path || !fs::exists(*path)) return std::make_shared<KnowledgeBase>(info.dim, info.provider_id);
  auto index = KbIndex::load(*path);
  if (index.dim() != info.dim || index.provider_id() != info.provider_id) {
    throw Error(ErrorCode::DimensionMismatch, "KB " + path->string() + " was built with " + index.provider_id() +
                                                  " (dim " + std::to_string(index.dim()) + "), embedder is " +
                                                  info.provider_id);
  }
  return std::make_shared<KnowledgeBase>(std::move(index));
}

// Registers "mock" from a script file, or "remote" from EDIT_LLM_* env.
// Returns the provider id to use.
std::string register_llm(LlmGateway& gateway, const std::optional<fs::path>& mock_script, int max_in_flight) {
  if (mock_script) {
    gateway.register_provider("mock", ScriptedProvider::from_file(*mock_script), max_in_flight);
    return "mock";
  }
  if (auto opts = HttpChatProvider::options_from_env()) {
    gateway.register_provider("remote", std::make_shared<HttpChatProvider>(*opts), max_in_flight);
    return "remote";
  }
  throw UsageError("no LLM provider: pass --mock-script or set EDIT_LLM_BASE_URL");
}

PipelineConfig base_config(const std::string& provider, const std::optional<fs::path>& config_file,
                           const std::string& qg_endpoint) {
  PipelineConfig cfg;
  cfg.provider_id = provider;
  cfg.generator.endpoint_or_provider = provider;
  if (!qg_endpoint.empty()) {
    cfg.generator.kind = GeneratorKind::ExternalModelEndpoint;
    cfg.generator.endpoint_or_provider = qg_endpoint;
  }
  if (config_file) {
    try {
      cfg = apply_overrides(cfg, json::parse(read_file(*config_file)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, config_file->string() + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

// Shared flags for commands that run the pipeline.
struct RuntimeFlags {
  std::optional<fs::path> kb;
  std::optional<fs::path> mock_script;
  std::optional<fs::path> config;
  std::optional<fs::path> embed_cache;
  std::string embedder = "mock";
  std::string qg_endpoint;
  int max_in_flight = 4;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--kb", kb, "Knowledge base file (JSONL)");
    cmd->add_option("--mock-script", mock_script, "Scripted LLM responses (JSON); registers provider \"mock\"");
    cmd->add_option("--config", config, "Pipeline config overrides (JSON file)");
    cmd->add_option("--embedder", embedder, "mock | hash-<dim> | remote")->capture_default_str();
    cmd->add_option("--embed-cache", embed_cache, "Embedding cache file (JSONL)");
    cmd->add_option("--qg-endpoint", qg_endpoint, "Question generation model URL");
    cmd->add_option("--max-in-flight", max_in_flight, "Concurrent calls per provider")->capture_default_str();
  }
};

struct Runtime {
  std::unique_ptr<LlmGateway> gateway;
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<KnowledgeBase> kb;
  std::unique_ptr<Pipeline> pipeline;
  PipelineConfig config;
  std::string provider;
};

Runtime make_runtime(const RuntimeFlags& f) {
  Runtime rt;
  rt.gateway = std::make_unique<LlmGateway>();
  rt.provider = register_llm(*rt.gateway, f.mock_script, f.max_in_flight);
  rt.embedder = make_embedder(f.embedder, f.embed_cache);
  rt.kb = open_kb(f.kb, *rt.embedder);
  rt.pipeline = std::make_unique<Pipeline>(*rt.gateway, rt.embedder, rt.kb);
  rt.config = base_config(rt.provider, f.config, f.qg_endpoint);
  return rt;
}

void save_cache(const Runtime& rt, const std::optional<fs::path>& path) {
  if (path && rt.embedder->cache()) rt.embedder->cache()->save(*path);
}

// --- subcommands -------------------------------------------------------------

int cmd_ingest(const fs::path& kb_path, const fs::path& docs_path, const std::string& embedder_id,
               const std::optional<fs::path>& cache_path) {
  const auto embedder = make_embedder(embedder_id, cache_path);
  const auto kb = open_kb(kb_path, *embedder);
  const auto docs = load_documents(docs_path);
  const auto stats = kb->ingest(docs, *embedder);
  kb->save(kb_path);
  if (cache_path) embedder->cache()->save(*cache_path);
  std::cout << "docs=" << stats.doc_count << " sentences=" << stats.sentence_count << " version=" << stats.version
            << "\n";
  return 0;
}

int cmd_serve(const RuntimeFlags& f, const std::string& addr, const std::vector<std::string>& cors,
              const std::optional<fs::path>& snapshot, const std::optional<fs::path>& trace_dir) {
  auto rt = make_runtime(f);
  if (trace_dir) rt.pipeline->set_trace_dir(*trace_dir);
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw UsageError("--addr must be host:port");
  const auto host = addr.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("bad port in --addr " + addr);
  }

  ServiceOptions opts;
  opts.defaults = rt.config;
  opts.api_token = api_token_from_env();
  opts.cors_origins = cors;
  opts.snapshot_path = snapshot;
  ChatService service(*rt.pipeline, opts);
  service.load_snapshot();

  HttpServer server(service);
  const int bound = server.bind(host, port);
  std::cerr << "listening on " << host << ":" << bound << "\n";
  static HttpServer* active = nullptr;
  active = &server;
  std::signal(SIGINT, [](int) {
    if (active) active->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (active) active->stop();
  });
  server.listen();
  active = nullptr;
  save_cache(rt, f.embed_cache);
  return 0;
}

int cmd_chat(const RuntimeFlags& f, const std::string& mode, bool verbose) {
  auto rt = make_runtime(f);
  rt.config.mode = pipeline_mode_from_string(mode);
  DialogueContext ctx;
  std::string line;
  std::cout << "> " << std::flush;
  while (std::getline(std::cin, line)) {
    if (trim(line).empty()) {
      std::cout << "> " << std::flush;
      continue;
    }
    ctx.append(Speaker::User, line);
    ctx.next_speaker = Speaker::Bot;
    try {
      const auto result = rt.pipeline->run(ctx, rt.config);
      ctx.append(Speaker::Bot, result.response.text);
      std::cout << "Bot: " << result.response.text << "\n";
      if (verbose) {
        if (result.trace.degraded) std::cout << "  (no extra knowledge: " << result.trace.degraded_reason << ")\n";
        for (const auto& a : result.trace.answers) {
          std::cout << "  Q" << a.question.ordinal << ": " << a.question.text << "  ["
                    << to_string(a.integrated.chosen) << "]\n";
        }
        std::cout << "  trace " << result.trace.trace_id << "\n";
      }
    } catch (const Error& e) {
      ctx.utterances.pop_back();
      std::cerr << "error: " << e.what() << "\n";
    }
    std::cout << "> " << std::flush;
  }
  std::cout << "\n";
  save_cache(rt, f.embed_cache);
  return 0;
}

int cmd_eval(const RuntimeFlags& f, const std::optional<fs::path>& dataset, const std::string& systems,
             const fs::path& out, const std::string& metrics, std::uint64_t seed, int parallelism,
             const std::optional<fs::path>& coq) {
  if (coq) {
    auto gateway = std::make_unique<LlmGateway>();
    std::string provider = "mock";
    if (f.qg_endpoint.empty()) provider = register_llm(*gateway, f.mock_script, f.max_in_flight);
    const auto data = load_coq(*coq);
    std::vector<CoqRecord> test;
    for (const auto& r : data.records) {
      if (r.split == CoqSplit::Test) test.push_back(r);
    }
    GeneratorBinding binding;
    binding.kind = f.qg_endpoint.empty() ? GeneratorKind::LlmPrompted : GeneratorKind::ExternalModelEndpoint;
    binding.endpoint_or_provider = f.qg_endpoint.empty() ? provider : f.qg_endpoint;
    auto generator = make_generator(binding, *gateway);
    const auto report = run_qg_eval(test, *generator, binding.max_questions);
    write_report(report, out);
    for (const auto& a : report.aggregates) {
      std::printf("%-8s %-7s %8.2f  (n=%d)\n", a.system.c_str(), std::string(to_string(a.metric)).c_str(),
                  a.mean * 100.0, a.count);
    }
    return 0;
  }
  if (!dataset) throw UsageError("eval needs --dataset (or --coq for question generation)");

  auto rt = make_runtime(f);
  BenchmarkConfig cfg;
  cfg.systems = systems_from_aliases(systems, rt.config);
  cfg.metrics = metrics_from_list(metrics);
  cfg.judge_provider = rt.provider;
  cfg.seed = seed;
  cfg.parallelism = parallelism;
  cfg.trace_dir = out / "traces";
  const auto samples = load_eval_dataset(*dataset);
  fs::create_directories(*cfg.trace_dir);
  auto report = run_benchmark(samples, *rt.pipeline, cfg);
  report.config["dataset"] = dataset->filename().string();
  write_report(report, out);
  save_cache(rt, f.embed_cache);

  for (const auto& a : report.aggregates) {
    std::printf("%-12s %-10s %10.4f  (n=%d)\n", a.system.c_str(), std::string(to_string(a.metric)).c_str(), a.mean,
                a.count);
  }
  if (!report.failures.empty()) std::cerr << report.failures.size() << " failure(s) recorded in report.json\n";
  return 0;
}

int cmd_coq_validate(const fs::path& path) {
  const auto data = load_coq(path);
  std::cout << format_coq_table(data.counts);
  std::cout << "train_total=" << data.counts.split_total(CoqSplit::Train) << " total=" << data.counts.total()
            << "\n";
  return 0;
}

int cmd_coq_bootstrap(const std::optional<fs::path>& mock_script, const std::optional<std::string>& context,
                      const std::optional<fs::path>& contexts_file, const std::optional<fs::path>& out) {
  LlmGateway gateway;
  const auto provider = register_llm(gateway, mock_script, 4);
  std::vector<std::string> contexts;
  if (context) contexts.push_back(*context);
  if (contexts_file) {
    std::ifstream in(*contexts_file);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + contexts_file->string());
    std::string line;
    while (std::getline(in, line)) {
      if (!trim(line).empty()) contexts.push_back(line);
    }
  }
  if (contexts.empty()) throw UsageError("coq-bootstrap needs --context or --contexts");

  std::string lines;
  for (const auto& c : contexts) {
    const auto result = bootstrap_coq_candidates(c, gateway, provider);
    json qs = json::array();
    for (const auto& q : result.candidates) qs.push_back(q.text);
    lines += json{{"context", c}, {"questions", qs}, {"refused", result.refused}, {"status", "unfiltered"}}.dump() +
             "\n";
  }
  if (out) {
    write_file_atomic(*out, lines);
  } else {
    std::cout << lines;
  }
  return 0;
}

void print_trace(const json& t) {
  std::cout << "trace " << t.value("trace_id", "") << "  system=" << t.value("system", "")
            << " mode=" << t.value("mode", "") << (t.value("degraded", false) ? " degraded" : "") << "\n";
  if (t.contains("questions")) {
    std::cout << "questions:\n";
    for (const auto& q : t["questions"]) std::cout << "  " << q.value("ordinal", 0) << ". " << q.value("text", "") << "\n";
  }
  if (t.contains("answers")) {
    for (const auto& a : t["answers"]) {
      const auto& kb = a["kb"];
      if (kb.is_null() || !kb.contains("hits")) continue;
      std::cout << "hits for Q" << a["question"].value("ordinal", 0) << ":\n";
      for (const auto& h : kb["hits"]) {
        std::printf("  %.4f  %s\n", h.value("score", 0.0), h.value("text", "").c_str());
      }
    }
  }
  if (t.contains("prompts")) {
    std::cout << "prompts:\n";
    for (const auto& p : t["prompts"]) {
      std::cout << "  [" << p.value("id", "") << "] " << p.value("text", "") << "\n";
    }
  }
  if (t.contains("response")) std::cout << "response: " << t["response"].value("text", "") << "\n";
}

int cmd_trace_show(const std::string& id_or_file, const std::string& server) {
  json trace;
  if (fs::exists(id_or_file)) {
    trace = json::parse(read_file(id_or_file));
  } else {
    httplib::Client client(server);
    httplib::Headers headers;
    if (const auto token = api_token_from_env()) headers.emplace("Authorization", "Bearer " + *token);
    const auto res = client.Get("/v1/traces/" + id_or_file, headers);
    if (!res) throw Error(ErrorCode::ProviderUnavailable, server + ": " + httplib::to_string(res.error()));
    if (res->status == 404) throw Error(ErrorCode::InvalidArgument, "unknown trace " + id_or_file);
    if (res->status != 200) throw Error(ErrorCode::ProviderUnavailable, "HTTP " + std::to_string(res->status));
    trace = json::parse(res->body);
  }
  print_trace(trace);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question-driven knowledge enhancement for dialogue responses"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "Split, embed and add documents to a KB file");
  fs::path kb_path;
  fs::path docs_path;
  std::string ingest_embedder = "mock";
  std::optional<fs::path> ingest_cache;
  ingest->add_option("--kb", kb_path, "KB file to create or extend")->required();
  ingest->add_option("--docs", docs_path, "Documents JSONL {doc_id, title?, text}")->required()->check(CLI::ExistingFile);
  ingest->add_option("--embedder", ingest_embedder, "mock | hash-<dim> | remote")->capture_default_str();
  ingest->add_option("--embed-cache", ingest_cache, "Embedding cache file (JSONL)");

  RuntimeFlags serve_flags;
  auto* serve = app.add_subcommand("serve", "Run the /v1 HTTP API");
  serve_flags.add_to(serve);
  std::string addr = "127.0.0.1:8080";
  std::vector<std::string> cors;
  std::optional<fs::path> snapshot;
  std::optional<fs::path> serve_traces;
  serve->add_option("--addr", addr, "host:port")->capture_default_str();
  serve->add_option("--cors-origin", cors, "Allowed browser origin (repeatable)");
  serve->add_option("--snapshot", snapshot, "Session snapshot file (JSONL)");
  serve->add_option("--trace-dir", serve_traces, "Directory for per-turn trace files");

  RuntimeFlags chat_flags;
  auto* chat = app.add_subcommand("chat", "Interactive terminal chat");
  chat_flags.add_to(chat);
  std::string chat_mode = "full";
  bool verbose = false;
  chat->add_option("--mode", chat_mode, "full | nokb | nollm | baseline")
      ->check(CLI::IsMember({"full", "nokb", "nollm", "baseline"}))
      ->capture_default_str();
  chat->add_flag("--verbose", verbose, "List questions and chosen answer sources per turn");

  RuntimeFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Batch evaluation");
  eval_flags.add_to(eval);
  std::optional<fs::path> dataset;
  std::optional<fs::path> coq_path;
  std::string systems = "edit,baseline";
  fs::path out_dir;
  std::string metrics = "judge";
  std::uint64_t seed = 0;
  int parallelism = 4;
  eval->add_option("--dataset", dataset, "Dataset JSONL")->check(CLI::ExistingFile);
  eval->add_option("--coq", coq_path, "Score question generation on the COQ test split")->check(CLI::ExistingFile);
  eval->add_option("--systems", systems, "edit, baseline, edit-nokb, edit-nollm")->capture_default_str();
  eval->add_option("--out", out_dir, "Output directory")->required();
  eval->add_option("--metrics", metrics, "judge, bleu, rouge (comma separated)")->capture_default_str();
  eval->add_option("--seed", seed, "Judge presentation seed")->capture_default_str();
  eval->add_option("--parallelism", parallelism, "Samples evaluated at once")->capture_default_str();

  auto* coq_validate = app.add_subcommand("coq-validate", "Check a COQ file and print per-split counts");
  fs::path coq_file;
  coq_validate->add_option("file", coq_file, "COQ JSONL")->required()->check(CLI::ExistingFile);

  auto* coq_bootstrap = app.add_subcommand("coq-bootstrap", "Draft candidate questions for manual filtering");
  std::optional<fs::path> boot_script;
  std::optional<std::string> boot_context;
  std::optional<fs::path> boot_contexts;
  std::optional<fs::path> boot_out;
  coq_bootstrap->add_option("--mock-script", boot_script, "Scripted LLM responses (JSON)");
  coq_bootstrap->add_option("--context", boot_context, "A single context");
  coq_bootstrap->add_option("--contexts", boot_contexts, "One context per line")->check(CLI::ExistingFile);
  coq_bootstrap->add_option("--out", boot_out, "Candidate JSONL output");

  auto* trace_show = app.add_subcommand("trace-show", "Pretty-print a trace");
  std::string trace_id;
  std::string server = "http://127.0.0.1:8080";
  trace_show->add_option("trace", trace_id, "Trace id or trace file")->required();
  trace_show->add_option("--server", server, "Service base URL")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*ingest) return cmd_ingest(kb_path, docs_path, ingest_embedder, ingest_cache);
    if (*serve) return cmd_serve(serve_flags, addr, cors, snapshot, serve_traces);
    if (*chat) return cmd_chat(chat_flags, chat_mode, verbose);
    if (*eval) return cmd_eval(eval_flags, dataset, systems, out_dir, metrics, seed, parallelism, coq_path);
    if (*coq_validate) return cmd_coq_validate(coq_file);
    if (*coq_bootstrap) return cmd_coq_bootstrap(boot_script, boot_context, boot_contexts, boot_out);
    if (*trace_show) return cmd_trace_show(trace_id, server);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
