// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include "edit/pipeline.hpp"

#include <chrono>
#include <future>

#include "edit/prompts.hpp"
#include "edit/util.hpp"

namespace edit {

std::string_view to_string(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::Full: return "Full";
    case PipelineMode::NoKb: return "NoKb";
    case PipelineMode::NoLlm: return "NoLlm";
    case PipelineMode::BaselineOnly: return "BaselineOnly";
  }
  return "Full";
}

PipelineMode pipeline_mode_from_string(std::string_view text) {
  const auto lower = to_lower(text);
  if (lower == "full" || lower == "edit") return PipelineMode::Full;
  if (lower == "nokb") return PipelineMode::NoKb;
  if (lower == "nollm") return PipelineMode::NoLlm;
  if (lower == "baselineonly" || lower == "baseline") return PipelineMode::BaselineOnly;
  throw Error(ErrorCode::InvalidArgument, "unknown mode: " + std::string(text));
}

void PipelineConfig::validate() const {
  const auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (retrieval.l < 1) fail("retrieval.l must be >= 1");
  if (extra_know_char_cap < 256) fail("extra_know_char_cap must be >= 256");
  if (generator.max_questions < 1) fail("generator.max_questions must be >= 1");
  if (extra_know_separator.empty()) fail("extra_know_separator must be non-empty");
  if (respond_temperature < 0 || qa_temperature < 0) fail("temperatures must be >= 0");
  if (max_tokens < 1) fail("max_tokens must be >= 1");
  if (provider_id.empty()) fail("provider_id must be non-empty");
}

AnsweringConfig PipelineConfig::answering() const {
  AnsweringConfig a;
  a.provider_id = provider_id;
  a.retrieval = retrieval;
  a.qa_temperature = qa_temperature;
  a.organize_temperature = qa_temperature;
  a.integrate_temperature = 0.0;
  a.max_tokens = max_tokens;
  a.kb_score_floor = kb_score_floor;
  a.swap_and_revote = swap_and_revote;
  return a;
}

void to_json(json& j, const PipelineConfig& cfg) {
  j = json{{"generator",
            {{"kind", cfg.generator.kind == GeneratorKind::LlmPrompted ? "LlmPrompted" : "ExternalModelEndpoint"},
             {"endpoint_or_provider", cfg.generator.endpoint_or_provider},
             {"max_questions", cfg.generator.max_questions}}},
           {"retrieval", {{"l", cfg.retrieval.l}}},
           {"mode", to_string(cfg.mode)},
           {"extra_know_separator", cfg.extra_know_separator},
           {"extra_know_char_cap", cfg.extra_know_char_cap},
           {"qa_prefix", cfg.qa_prefix},
           {"provider_id", cfg.provider_id},
           {"respond_temperature", cfg.respond_temperature},
           {"qa_temperature", cfg.qa_temperature},
           {"max_tokens", cfg.max_tokens},
           {"kb_score_floor", cfg.kb_score_floor},
           {"swap_and_revote", cfg.swap_and_revote}};
}

PipelineConfig apply_overrides(PipelineConfig cfg, const json& o) {
  if (o.is_null()) return cfg;
  if (!o.is_object()) throw Error(ErrorCode::InvalidArgument, "config overrides must be a JSON object");
  try {
    if (o.contains("generator")) {
      const auto& g = o.at("generator");
      if (g.contains("kind")) {
        const auto kind = g.at("kind").get<std::string>();
        if (kind == "LlmPrompted") {
          cfg.generator.kind = GeneratorKind::LlmPrompted;
        } else if (kind == "ExternalModelEndpoint") {
          cfg.generator.kind = GeneratorKind::ExternalModelEndpoint;
        } else {
          throw Error(ErrorCode::InvalidArgument, "unknown generator kind: " + kind);
        }
      }
      if (g.contains("endpoint_or_provider")) cfg.generator.endpoint_or_provider = g.at("endpoint_or_provider").get<std::string>();
      if (g.contains("max_questions")) cfg.generator.max_questions = g.at("max_questions").get<int>();
    }
    if (o.contains("retrieval") && o.at("retrieval").contains("l")) cfg.retrieval.l = o.at("retrieval").at("l").get<int>();
    if (o.contains("mode")) cfg.mode = pipeline_mode_from_string(o.at("mode").get<std::string>());
    if (o.contains("extra_know_separator")) cfg.extra_know_separator = o.at("extra_know_separator").get<std::string>();
    if (o.contains("extra_know_char_cap")) cfg.extra_know_char_cap = o.at("extra_know_char_cap").get<int>();
    if (o.contains("qa_prefix")) cfg.qa_prefix = o.at("qa_prefix").get<bool>();
    if (o.contains("provider_id")) cfg.provider_id = o.at("provider_id").get<std::string>();
    if (o.contains("respond_temperature")) cfg.respond_temperature = o.at("respond_temperature").get<double>();
    if (o.contains("qa_temperature")) cfg.qa_temperature = o.at("qa_temperature").get<double>();
    if (o.contains("max_tokens")) cfg.max_tokens = o.at("max_tokens").get<int>();
    if (o.contains("kb_score_floor")) cfg.kb_score_floor = o.at("kb_score_floor").get<double>();
    if (o.contains("swap_and_revote")) cfg.swap_and_revote = o.at("swap_and_revote").get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("invalid config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json PipelineTrace::to_json() const {
  json answers_json = json::array();
  for (const auto& a : answers) {
    answers_json.push_back({{"question", a.question},
                            {"llm", a.llm ? json(*a.llm) : json(nullptr)},
                            {"kb", a.kb ? json(*a.kb) : json(nullptr)},
                            {"integrated", a.integrated}});
  }
  return json{{"trace_id", trace_id},
              {"system", edit::to_string(system)},
              {"mode", edit::to_string(mode)},
              {"degraded", degraded},
              {"degraded_reason", degraded_reason},
              {"context", context},
              {"generator_raw", generator_raw},
              {"questions", questions},
              {"answers", answers_json},
              {"extra_knowledge", extra_knowledge},
              {"prompts", prompts},
              {"response", response},
              {"timings",
               {{"questions_ms", timings.questions_ms},
                {"answers_ms", timings.answers_ms},
                {"respond_ms", timings.respond_ms},
                {"total_ms", timings.total_ms}}},
              {"provider_call_count", provider_call_count},
              {"retrieval_count", retrieval_count},
              {"call_budget", call_budget},
              {"kb", {{"scope", kb_scope}, {"version", kb_version}}},
              {"config", config}};
}

ExtraKnowledge assemble_extra_knowledge(std::span<const IntegratedAnswer> answers,
                                        const PipelineConfig& cfg, std::span<const Question> questions) {
  ExtraKnowledge out;
  out.separator = cfg.extra_know_separator;
  const auto& sep = cfg.extra_know_separator;
  const std::string replacement = sep.find(' ') == std::string::npos ? " " : "";

  const auto sanitize = [&](std::string text) {
    std::size_t pos = 0;
    while ((pos = text.find(sep, pos)) != std::string::npos) {
      text.replace(pos, sep.size(), replacement);
      pos += replacement.size();
    }
    return trim(text);
  };

  std::size_t answer_chars = 0;
  for (const auto& a : answers) {
    if (a.chosen == Choice::None) continue;
    auto text = sanitize(a.text);
    if (text.empty()) continue;
    if (cfg.qa_prefix) {
      for (const auto& q : questions) {
        if (q.ordinal == a.question_ordinal) text = sanitize("Q: " + q.text + " A: " + text);
      }
    }
    // The cap bounds answer text; separators are not counted.
    if (answer_chars + text.size() > static_cast<std::size_t>(cfg.extra_know_char_cap)) break;
    answer_chars += text.size();
    out.entries.push_back({a.question_ordinal, std::move(text)});
  }
  out.render();
  return out;
}

std::string strip_speaker_echo(std::string_view text, std::string_view label) {
  auto t = trim(text);
  if (!label.empty() && t.size() > label.size() && t.compare(0, label.size(), label) == 0 &&
      t[label.size()] == ':') {
    return trim(std::string_view(t).substr(label.size() + 1));
  }
  return t;
}

Pipeline::Pipeline(LlmGateway& gateway, std::shared_ptr<const Embedder> embedder,
                   std::shared_ptr<KnowledgeBase> kb)
    : gateway_(gateway), embedder_(std::move(embedder)), kb_(std::move(kb)) {
  clock_ = [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
}

TurnResult Pipeline::run(const DialogueContext& ctx, const PipelineConfig& cfg, const KbIndex* overlay) {
  if (cfg.mode == PipelineMode::BaselineOnly) return run_baseline(ctx, cfg);
  return run_edit(ctx, cfg, overlay);
}

std::string Pipeline::respond(const DialogueContext& ctx, const std::string& knowledge,
                              const PipelineConfig& cfg, TurnBudget* budget, PipelineTrace& trace) {
  CompletionRequest req;
  req.prompt = render_prompt(PromptId::Respond, {{"context", render_context(ctx)},
                                                 {"knowledge", knowledge},
                                                 {"next_person", ctx.next_label()}});
  req.temperature = cfg.respond_temperature;
  req.max_tokens = cfg.max_tokens;
  req.provider_id = cfg.provider_id;
  req.prompt_id = PromptId::Respond;
  PromptRecord record{PromptId::Respond, req.prompt, cfg.provider_id, false};
  try {
    const auto result = gateway_.complete(req, budget);
    record.ok = true;
    trace.prompts.push_back(std::move(record));
    return strip_speaker_echo(result.text, ctx.next_label());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BudgetExceeded) trace.prompts.push_back(std::move(record));
    if (e.code() == ErrorCode::Timeout || e.code() == ErrorCode::BudgetExceeded) {
      throw Error(ErrorCode::ProviderUnavailable, std::string("response generation failed: ") + e.what());
    }
    throw;
  }
}

std::string Pipeline::respond_or_fail(const DialogueContext& ctx, const std::string& knowledge,
                                      const PipelineConfig& cfg, TurnBudget* budget, PipelineTrace& trace,
                                      std::int64_t started) {
  try {
    return respond(ctx, knowledge, cfg, budget, trace);
  } catch (const Error& e) {
    trace.degraded = true;
    trace.degraded_reason = std::string("response generation failed: ") + e.what();
    trace.response.text.clear();
    finish(trace, cfg, started);
    throw TurnError(e.code(), e.what(), trace);
  }
}

void Pipeline::finish(PipelineTrace& trace, const PipelineConfig& cfg, std::int64_t started) {
  trace.timings.total_ms = now() - started;
  trace.provider_call_count = static_cast<int>(trace.prompts.size());
  trace.config = cfg;

  if (id_policy_ == TraceIdPolicy::ContentHash) {
    json material{{"system", to_string(trace.system)}, {"context", trace.context}, {"config", trace.config},
                  {"response", trace.response.text}, {"prompts", trace.prompts}};
    trace.trace_id = sha256_hex(material.dump()).substr(0, 32);
  } else {
    trace.trace_id = random_hex(16);
  }
  trace.response.trace_id = trace.trace_id;
  if (trace_dir_) write_file_atomic(*trace_dir_ / (trace.trace_id + ".json"), trace.serialize());
}

TurnResult Pipeline::run_baseline(const DialogueContext& ctx, const PipelineConfig& cfg) {
  if (ctx.empty()) throw Error(ErrorCode::EmptyContext, "dialogue context has no utterances");
  cfg.validate();
  const auto started = now();
  PipelineTrace trace;
  trace.system = SystemKind::Baseline;
  trace.mode = PipelineMode::BaselineOnly;
  trace.context = ctx;
  trace.extra_knowledge.separator = cfg.extra_know_separator;
  TurnBudget budget(1);
  trace.call_budget = budget.cap();

  const auto t0 = now();
  trace.response.text = respond_or_fail(ctx, "", cfg, &budget, trace, started);
  trace.response.system = SystemKind::Baseline;
  trace.timings.respond_ms = now() - t0;
  finish(trace, cfg, started);
  return {trace.response, trace};
}

TurnResult Pipeline::run_edit(const DialogueContext& ctx, const PipelineConfig& cfg, const KbIndex* overlay) {
  if (ctx.empty()) throw Error(ErrorCode::EmptyContext, "dialogue context has no utterances");
  if (cfg.mode == PipelineMode::BaselineOnly) {
    throw Error(ErrorCode::InvalidArgument, "run_edit called with BaselineOnly mode");
  }
  cfg.validate();
  const auto started = now();

  PipelineTrace trace;
  trace.system = SystemKind::Edit;
  trace.mode = cfg.mode;
  trace.context = ctx;
  trace.extra_knowledge.separator = cfg.extra_know_separator;

  const int per_question = cfg.swap_and_revote ? 4 : 3;
  const int max_fit = (TurnBudget::kHardCap - 2) / per_question;
  const int max_questions = std::min(cfg.generator.max_questions, max_fit);
  TurnBudget budget(per_question * max_questions + 2);
  trace.call_budget = budget.cap();

  const auto degrade = [&](std::string reason) {
    trace.degraded = true;
    trace.degraded_reason = std::move(reason);
    const auto t0 = now();
    trace.response.text = respond_or_fail(ctx, "", cfg, &budget, trace, started);
    trace.response.system = SystemKind::Baseline;
    trace.timings.respond_ms = now() - t0;
    finish(trace, cfg, started);
    return TurnResult{trace.response, trace};
  };

  // 1. Questions.
  auto t0 = now();
  std::unique_ptr<QuestionGenerator> owned;
  QuestionGenerator* generator = generator_.get();
  if (generator == nullptr) {
    owned = make_generator(cfg.generator, gateway_);
    generator = owned.get();
  }
  auto generator_prompt = generator->prompt_for(ctx, max_questions);
  try {
    auto generated = generate_questions(ctx, *generator, max_questions, &budget);
    trace.generator_raw = generated.call.raw_output;
    if (generator_prompt) {
      generator_prompt->ok = true;
      trace.prompts.push_back(std::move(*generator_prompt));
    }
    trace.questions = std::move(generated.questions);
  } catch (const Error& e) {
    trace.timings.questions_ms = now() - t0;
    if (e.code() != ErrorCode::NoQuestionsProduced && e.code() != ErrorCode::GeneratorUnavailable) throw;
    // A budget refusal never reached the provider; anything else did.
    const bool sent = std::string_view(e.what()).find("budget") == std::string_view::npos;
    if (generator_prompt && sent) {
      generator_prompt->ok = e.code() == ErrorCode::NoQuestionsProduced;
      trace.prompts.push_back(std::move(*generator_prompt));
    }
    return degrade(std::string(to_string(e.code())) + ": " + e.what());
  }
  trace.timings.questions_ms = now() - t0;

  // 2. Answers, fanned out per question and reassembled in ordinal order.
  t0 = now();
  std::shared_ptr<const KbIndex> global;
  std::optional<KbIndex> merged;
  const KbIndex* kb_view = nullptr;
  if (cfg.mode != PipelineMode::NoKb) {
    if (kb_) {
      global = kb_->snapshot();
      trace.kb_version = global->version();
      trace.kb_scope = "global";
      kb_view = global.get();
    }
    if (overlay != nullptr && !overlay->empty()) {
      merged = global ? KbIndex::unified(*global, *overlay) : *overlay;
      kb_view = &*merged;
      trace.kb_scope = global ? "global+overlay" : "overlay";
    }
  }

  const auto answering = cfg.answering();
  const AnswerMode mode = cfg.mode == PipelineMode::NoKb    ? AnswerMode::NoKb
                          : cfg.mode == PipelineMode::NoLlm ? AnswerMode::NoLlm
                                                            : AnswerMode::Full;
  struct Slot {
    QuestionTrace qt;
    PromptLog llm_log;
    PromptLog kb_log;
    PromptLog integrate_log;
    bool retrieved = false;
  };
  std::vector<Slot> slots(trace.questions.size());

  const auto work = [&](std::size_t i) {
    auto& slot = slots[i];
    const auto& q = trace.questions[i];
    slot.qt.question = q;
    std::future<AnswerCandidate> llm_future;
    if (mode != AnswerMode::NoLlm) {
      llm_future = std::async(std::launch::async, [&] {
        return answer_via_llm(q, gateway_, answering, &budget, &slot.llm_log);
      });
    }
    if (mode != AnswerMode::NoKb) {
      if (kb_view == nullptr || embedder_ == nullptr) {
        AnswerCandidate failed;
        failed.question_ordinal = q.ordinal;
        failed.source = AnswerSource::Kb;
        failed.failed = true;
        failed.error = "EmptyIndex: no knowledge base configured";
        slot.qt.kb = std::move(failed);
      } else {
        slot.retrieved = !kb_view->empty();
        slot.qt.kb = answer_via_kb(q, kb_view, *embedder_, gateway_, answering, &budget, &slot.kb_log);
      }
    }
    if (llm_future.valid()) slot.qt.llm = llm_future.get();
    slot.qt.integrated = integrate(q, slot.qt.llm, slot.qt.kb, gateway_, mode, answering, &budget,
                                   &slot.integrate_log);
  };

  std::vector<std::future<void>> tasks;
  tasks.reserve(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) tasks.push_back(std::async(std::launch::async, work, i));
  for (auto& t : tasks) t.get();

  std::vector<IntegratedAnswer> integrated;
  for (auto& slot : slots) {
    for (auto* log : {&slot.llm_log, &slot.kb_log, &slot.integrate_log}) {
      for (auto& p : *log) trace.prompts.push_back(std::move(p));
    }
    if (slot.retrieved) {
      ++trace.retrieval_count;
      if (kb_) kb_->note_retrieval();
    }
    integrated.push_back(slot.qt.integrated);
    trace.answers.push_back(std::move(slot.qt));
  }
  trace.timings.answers_ms = now() - t0;

  // 3. Extra knowledge and the response.
  trace.extra_knowledge = assemble_extra_knowledge(integrated, cfg, trace.questions);
  if (trace.extra_knowledge.n == 0) return degrade("no usable answers for extra knowledge");

  t0 = now();
  trace.response.text = respond_or_fail(ctx, trace.extra_knowledge.rendered, cfg, &budget, trace, started);
  trace.response.system = SystemKind::Edit;
  trace.timings.respond_ms = now() - t0;
  finish(trace, cfg, started);
  return {trace.response, trace};
}

}  // namespace edit
