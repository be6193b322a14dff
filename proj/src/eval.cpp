// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include "edit/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "edit/errors.hpp"
#include "edit/knowledge_base.hpp"
#include "edit/metrics.hpp"
#include "edit/prompts.hpp"
#include "edit/util.hpp"

namespace edit {

std::vector<EvalSample> load_eval_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open dataset " + path.string());
  std::vector<EvalSample> out;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    EvalSample s;
    try {
      const auto j = json::parse(line);
      s.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      s.context = context_from_turns(j.at("context"));
      if (j.contains("reference_response") && !j["reference_response"].is_null())
        s.reference_response = j["reference_response"].get<std::string>();
      if (j.contains("knowledge_doc") && !j["knowledge_doc"].is_null())
        s.knowledge_doc = j["knowledge_doc"].get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRecord, where + ": " + e.what());
    }
    if (!seen.insert(s.id).second)
      throw Error(ErrorCode::InvalidArgument, where + ": duplicate sample id " + s.id);
    out.push_back(std::move(s));
  }
  return out;
}

std::string_view to_string(MetricKind m) {
  switch (m) {
    case MetricKind::Bleu1: return "Bleu1";
    case MetricKind::Bleu2: return "Bleu2";
    case MetricKind::RougeL: return "RougeL";
    case MetricKind::JudgeScore: return "JudgeScore";
  }
  return "?";
}

namespace {

std::vector<std::string> split_csv(std::string_view csv) {
  std::vector<std::string> parts;
  std::string cur;
  for (const char c : csv) {
    if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(trim(cur));
  parts.erase(std::remove(parts.begin(), parts.end(), std::string{}), parts.end());
  return parts;
}

}  // namespace

std::vector<MetricKind> metrics_from_list(std::string_view csv) {
  std::vector<MetricKind> out;
  const auto add = [&](MetricKind m) {
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  };
  for (const auto& raw : split_csv(csv)) {
    const auto name = to_lower(raw);
    if (name == "judge" || name == "judgescore") {
      add(MetricKind::JudgeScore);
    } else if (name == "bleu") {
      add(MetricKind::Bleu1);
      add(MetricKind::Bleu2);
    } else if (name == "bleu1" || name == "bleu-1") {
      add(MetricKind::Bleu1);
    } else if (name == "bleu2" || name == "bleu-2") {
      add(MetricKind::Bleu2);
    } else if (name == "rouge" || name == "rougel" || name == "rouge-l") {
      add(MetricKind::RougeL);
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown metric: " + raw);
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no metrics requested");
  return out;
}

std::vector<SystemSpec> systems_from_aliases(std::string_view csv, const PipelineConfig& base) {
  std::vector<SystemSpec> out;
  for (const auto& name : split_csv(csv)) {
    SystemSpec s{name, base};
    if (name == "edit") {
      s.config.mode = PipelineMode::Full;
    } else if (name == "baseline") {
      s.config.mode = PipelineMode::BaselineOnly;
    } else if (name == "edit-nokb") {
      s.config.mode = PipelineMode::NoKb;
    } else if (name == "edit-nollm") {
      s.config.mode = PipelineMode::NoLlm;
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown system: " + name);
    }
    for (const auto& prev : out) {
      if (prev.name == name) throw Error(ErrorCode::InvalidArgument, "system listed twice: " + name);
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no systems requested");
  return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::uint64_t state = seed;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(splitmix64(state) % i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

std::vector<std::optional<int>> parse_judge_scores(std::string_view raw, std::size_t count) {
  static const std::regex labeled(
      R"(^\s*[\[(]?\s*(?:response\s*)?#?\s*(\d+)\s*[\])]?\s*(?:[:.)=-]+\s*(?:score\s*[:=]?\s*)?|score\s*[:=]?\s*)(\d{1,3})(?!\d))",
      std::regex::icase);
  std::vector<std::optional<int>> scores(count);
  std::istringstream in{std::string(raw)};
  std::string line;
  bool any = false;
  bool labeled_line = false;
  while (std::getline(in, line)) {
    std::smatch m;
    if (!std::regex_search(line, m, labeled)) continue;
    labeled_line = true;
    const auto label = std::stoul(m[1].str());
    const int score = std::stoi(m[2].str());
    if (label < 1 || label > count || score > 100) continue;
    if (!scores[label - 1]) {
      scores[label - 1] = score;
      any = true;
    }
  }
  if (!labeled_line && count == 1) {
    static const std::regex number(R"((?:^|[^\d.])(\d{1,3})(?![\d]))");
    const std::string text(raw);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), number); it != std::sregex_iterator(); ++it) {
      const int v = std::stoi((*it)[1].str());
      if (v <= 100) {
        scores[0] = v;
        break;
      }
    }
  }
  return scores;
}

JudgeOutcome judge_responses(const DialogueContext& ctx,
                             const std::vector<std::pair<std::string, std::string>>& responses,
                             LlmGateway& gateway, const std::string& provider_id, std::uint64_t seed) {
  if (responses.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to judge");
  JudgeOutcome out;
  out.seed = seed;
  out.order = seeded_permutation(responses.size(), seed);

  std::string list;
  for (std::size_t k = 0; k < out.order.size(); ++k) {
    if (k) list += '\n';
    list += std::to_string(k + 1) + ": " + collapse_whitespace(responses[out.order[k]].second);
  }
  out.prompt = render_prompt(PromptId::Gpt4Judge, {{"context", render_context(ctx)}, {"response_list", list}});

  CompletionRequest req;
  req.prompt = out.prompt;
  req.temperature = 0.0;
  req.provider_id = provider_id;
  req.prompt_id = PromptId::Gpt4Judge;
  out.raw = gateway.complete(req).text;

  const auto by_position = parse_judge_scores(out.raw, responses.size());
  out.scores.reserve(responses.size());
  for (const auto& r : responses) out.scores.emplace_back(r.first, std::nullopt);
  bool any = false;
  for (std::size_t k = 0; k < by_position.size(); ++k) {
    out.scores[out.order[k]].second = by_position[k];
    any = any || by_position[k].has_value();
  }
  if (!any) throw Error(ErrorCode::UnparseableJudgeOutput, "judge output has no readable score");
  return out;
}

// --- report -----------------------------------------------------------------

void MetricReport::aggregate() {
  aggregates.clear();
  for (const auto& system : systems) {
    for (const auto metric : metrics) {
      Aggregate a{system, metric, 0.0, 0};
      double sum = 0.0;
      for (const auto& r : rows) {
        if (r.system != system || r.metric != metric || !r.score) continue;
        sum += *r.score;
        ++a.count;
      }
      a.mean = a.count ? sum / a.count : 0.0;
      aggregates.push_back(a);
    }
  }
}

json MetricReport::to_json() const {
  json j;
  j["tokenizer"] = kMetricTokenizerVersion;
  j["bleu"] = "sentence-level, uniform weights, no smoothing";
  j["judge_scale"] = "mean judge score 0-100 per response; unparsed entries missing, not zero";
  j["external_metrics"] = json::array({"Reasonable: human-judged, recorded externally, not computed"});
  j["config"] = config;
  j["systems"] = systems;
  auto& m = j["metrics"] = json::array();
  for (const auto k : metrics) m.push_back(to_string(k));

  auto& resp = j["responses"] = json::array();
  for (const auto& r : responses) {
    resp.push_back({{"sample_id", r.sample_id},
                    {"system", r.system},
                    {"response", r.response},
                    {"trace_id", r.trace_id},
                    {"degraded", r.degraded}});
  }
  auto& rs = j["rows"] = json::array();
  for (const auto& r : rows) {
    rs.push_back({{"sample_id", r.sample_id},
                  {"system", r.system},
                  {"metric", to_string(r.metric)},
                  {"score", r.score ? json(*r.score) : json(nullptr)}});
  }
  auto& ag = j["aggregates"] = json::array();
  for (const auto& a : aggregates) {
    ag.push_back({{"system", a.system}, {"metric", to_string(a.metric)}, {"mean", a.mean}, {"count", a.count}});
  }
  auto& fs = j["failures"] = json::array();
  for (const auto& f : failures) fs.push_back({{"sample_id", f.sample_id}, {"system", f.system}, {"error", f.error}});
  j["judgements"] = judgements;
  return j;
}

namespace {

std::string csv_field(std::string_view v) {
  if (v.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(v);
  std::string out = "\"";
  for (const char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string MetricReport::to_csv() const {
  std::string out = "sample_id,system,metric,score\n";
  for (const auto& r : rows) {
    out += csv_field(r.sample_id) + ',' + csv_field(r.system) + ',' + std::string(to_string(r.metric)) + ',' +
           (r.score ? format_score(*r.score) : std::string{}) + '\n';
  }
  for (const auto& a : aggregates) {
    out += "MEAN," + csv_field(a.system) + ',' + std::string(to_string(a.metric)) + ',' +
           (a.count ? format_score(a.mean) : std::string{}) + '\n';
  }
  return out;
}

void write_report(const MetricReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "report.json", report.to_json().dump(2) + "\n");
  write_file_atomic(dir / "report.csv", report.to_csv());
}

// --- benchmark --------------------------------------------------------------

namespace {

struct SystemOutcome {
  std::optional<TurnResult> result;
  std::string error;
};

struct SampleOutcome {
  std::vector<SystemOutcome> systems;
  std::optional<JudgeOutcome> judge;
  std::string judge_error;
  std::uint64_t judge_seed = 0;
};

double reference_metric(MetricKind m, const std::string& response, const std::string& reference) {
  const auto cand = metric_tokenize(response);
  const auto ref = metric_tokenize(reference);
  if (cand.empty() || ref.empty()) return 0.0;
  switch (m) {
    case MetricKind::Bleu1: return bleu_n(cand, {ref}, 1);
    case MetricKind::Bleu2: return bleu_n(cand, {ref}, 2);
    case MetricKind::RougeL: return rouge_l(cand, ref);
    case MetricKind::JudgeScore: break;
  }
  return 0.0;
}

template <typename Fn>
void parallel_for(std::size_t n, int parallelism, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, parallelism));
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> futures;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    futures.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    }));
  }
  for (auto& f : futures) f.get();
}

}  // namespace

MetricReport run_benchmark(const std::vector<EvalSample>& dataset, Pipeline& pipeline,
                           const BenchmarkConfig& cfg) {
  if (cfg.systems.empty()) throw Error(ErrorCode::InvalidArgument, "no systems to run");
  for (const auto& s : cfg.systems) s.config.validate();

  pipeline.set_trace_id_policy(TraceIdPolicy::ContentHash);
  pipeline.set_trace_dir(cfg.trace_dir);
  const bool judging = std::find(cfg.metrics.begin(), cfg.metrics.end(), MetricKind::JudgeScore) != cfg.metrics.end();

  std::vector<SampleOutcome> outcomes(dataset.size());
  parallel_for(dataset.size(), cfg.parallelism, [&](std::size_t i) {
    const auto& sample = dataset[i];
    auto& out = outcomes[i];

    std::optional<KbIndex> overlay;
    std::string overlay_error;
    if (sample.knowledge_doc) {
      try {
        const auto& embedder = pipeline.embedder();
        const auto info = embedder->info();
        KnowledgeBase kb(info.dim, info.provider_id);
        const KnowledgeDocument doc{"sample:" + sample.id, "", *sample.knowledge_doc};
        kb.ingest(std::span<const KnowledgeDocument>(&doc, 1), *embedder);
        overlay = *kb.snapshot();
      } catch (const std::exception& e) {
        overlay_error = std::string("knowledge_doc ingest: ") + e.what();
      }
    }

    out.systems.resize(cfg.systems.size());
    for (std::size_t s = 0; s < cfg.systems.size(); ++s) {
      if (!overlay_error.empty()) {
        out.systems[s].error = overlay_error;
        continue;
      }
      try {
        out.systems[s].result = pipeline.run(sample.context, cfg.systems[s].config, overlay ? &*overlay : nullptr);
      } catch (const std::exception& e) {
        out.systems[s].error = e.what();
      }
    }

    if (!judging) return;
    std::vector<std::pair<std::string, std::string>> responses;
    for (std::size_t s = 0; s < cfg.systems.size(); ++s) {
      if (out.systems[s].result) responses.emplace_back(cfg.systems[s].name, out.systems[s].result->response.text);
    }
    if (responses.empty()) return;
    out.judge_seed = cfg.seed ^ fnv1a64(sample.id);
    try {
      out.judge = judge_responses(sample.context, responses, pipeline.gateway(), cfg.judge_provider, out.judge_seed);
    } catch (const std::exception& e) {
      out.judge_error = e.what();
    }
  });

  MetricReport report;
  for (const auto& s : cfg.systems) report.systems.push_back(s.name);
  report.metrics = cfg.metrics;
  report.config = {{"seed", cfg.seed},
                   {"judge_provider", cfg.judge_provider},
                   {"kb_mode", "global KB, plus a per-sample overlay for samples with knowledge_doc"},
                   {"trace_id_policy", "content-hash"}};
  auto& sys_cfg = report.config["systems"] = json::array();
  for (const auto& s : cfg.systems) sys_cfg.push_back({{"name", s.name}, {"config", s.config}});

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& sample = dataset[i];
    const auto& out = outcomes[i];
    std::map<std::string, std::optional<int>> judge_scores;
    if (out.judge) {
      for (const auto& [name, score] : out.judge->scores) judge_scores[name] = score;
      json order = json::array();
      for (const auto idx : out.judge->order) order.push_back(out.judge->scores[idx].first);
      report.judgements.push_back({{"sample_id", sample.id}, {"seed", out.judge_seed}, {"order", order}});
    } else if (!out.judge_error.empty()) {
      report.failures.push_back({sample.id, "judge", out.judge_error});
    }

    for (std::size_t s = 0; s < cfg.systems.size(); ++s) {
      const auto& name = cfg.systems[s].name;
      const auto& so = out.systems[s];
      if (!so.result) {
        report.failures.push_back({sample.id, name, so.error});
        continue;
      }
      const auto& trace = so.result->trace;
      report.responses.push_back({sample.id, name, so.result->response.text, trace.trace_id, trace.degraded});
      for (const auto metric : cfg.metrics) {
        MetricRow row{sample.id, name, metric, std::nullopt};
        if (metric == MetricKind::JudgeScore) {
          if (!out.judge) continue;
          const auto it = judge_scores.find(name);
          if (it != judge_scores.end() && it->second) row.score = static_cast<double>(*it->second);
        } else {
          if (!sample.reference_response) continue;
          row.score = reference_metric(metric, so.result->response.text, *sample.reference_response);
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  report.aggregate();
  return report;
}

MetricReport run_qg_eval(const std::vector<CoqRecord>& records, QuestionGenerator& generator,
                         int max_questions) {
  MetricReport report;
  report.systems = {"qgm"};
  report.metrics = {MetricKind::Bleu1, MetricKind::Bleu2, MetricKind::RougeL};
  report.config = {{"mode", "question-generation"},
                   {"max_questions", max_questions},
                   {"reference", "gold questions joined by a space"}};

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    const auto id = std::string(to_string(rec.source)) + "-" + std::string(to_string(rec.split)) + "-" +
                    std::to_string(i + 1);
    DialogueContext ctx;
    ctx.append(Speaker::User, rec.context);
    std::string generated;
    try {
      const auto qs = generate_questions(ctx, generator, max_questions);
      for (const auto& q : qs.questions) {
        if (!generated.empty()) generated += ' ';
        generated += q.text;
      }
    } catch (const std::exception& e) {
      report.failures.push_back({id, "qgm", e.what()});
      continue;
    }
    std::string reference;
    for (const auto& q : rec.questions) {
      if (!reference.empty()) reference += ' ';
      reference += q;
    }
    report.responses.push_back({id, "qgm", generated, "", false});
    for (const auto metric : report.metrics) {
      report.rows.push_back({id, "qgm", metric, reference_metric(metric, generated, reference)});
    }
  }
  report.aggregate();
  return report;
}

}  // namespace edit
