// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include "edit/question_gen.hpp"

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "edit/prompts.hpp"

namespace edit {

namespace {

std::string strip_enumeration(std::string piece) {
  static const std::regex kPrefix(
      R"(^\s*(?:(?:-|\xE2\x80\xA2|\*)\s*)?(?:[Qq]?\d+\s*[.):]|[Qq]\s*[.):]|[Qq]\d+)?\s*)");
  std::smatch m;
  if (std::regex_search(piece, m, kPrefix) && m.length(0) > 0) piece.erase(0, m.length(0));
  return piece;
}

}  // namespace

std::vector<Question> parse_question_sequence(std::string_view raw, QuestionOrigin origin) {
  std::vector<Question> out;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start < raw.size()) {
    const auto qmark = raw.find('?', start);
    if (qmark == std::string_view::npos) break;
    auto piece = raw.substr(start, qmark - start);
    start = qmark + 1;

    const auto last_break = piece.find_last_of("\r\n");
    if (last_break != std::string_view::npos) piece = piece.substr(last_break + 1);
    auto body = collapse_whitespace(strip_enumeration(std::string(piece)));
    if (body.empty()) continue;
    body.push_back('?');
    if (!seen.insert(to_lower(body)).second) continue;
    out.push_back({std::move(body), origin, static_cast<int>(out.size()) + 1});
  }
  return out;
}

LlmQuestionGenerator::LlmQuestionGenerator(LlmGateway& gateway, std::string provider_id,
                                           double temperature)
    : gateway_(gateway), provider_id_(std::move(provider_id)), temperature_(temperature) {}

std::string LlmQuestionGenerator::build_prompt(const DialogueContext& ctx, int max_questions) {
  return render_prompt(PromptId::LlmCompareQg, {{"count", std::to_string(max_questions)}}) + "\n" +
         render_context(ctx);
}

GeneratorCall LlmQuestionGenerator::generate_raw(const DialogueContext& ctx, int max_questions,
                                                 TurnBudget* budget) {
  GeneratorCall call;
  call.prompt = build_prompt(ctx, max_questions);
  CompletionRequest req;
  req.prompt = call.prompt;
  req.temperature = temperature_;
  req.provider_id = provider_id_;
  req.prompt_id = PromptId::LlmCompareQg;
  try {
    const auto result = gateway_.complete(req, budget);
    call.raw_output = result.refused ? std::string{} : result.text;
  } catch (const Error& e) {
    throw Error(ErrorCode::GeneratorUnavailable, std::string("question generator failed: ") + e.what());
  }
  return call;
}

std::unique_ptr<QuestionGenerator> make_generator(const GeneratorBinding& binding, LlmGateway& gateway) {
  if (binding.max_questions < 1) throw Error(ErrorCode::InvalidArgument, "max_questions must be >= 1");
  if (binding.kind == GeneratorKind::ExternalModelEndpoint) {
    return std::make_unique<EndpointQuestionGenerator>(binding.endpoint_or_provider);
  }
  return std::make_unique<LlmQuestionGenerator>(gateway, binding.endpoint_or_provider);
}

GeneratedQuestions generate_questions(const DialogueContext& ctx, QuestionGenerator& generator,
                                      int max_questions, TurnBudget* budget) {
  if (ctx.empty()) throw Error(ErrorCode::EmptyContext, "cannot generate questions without context");
  if (max_questions < 1) throw Error(ErrorCode::InvalidArgument, "max_questions must be >= 1");
  GeneratedQuestions out;
  out.call = generator.generate_raw(ctx, max_questions, budget);
  out.questions = parse_question_sequence(out.call.raw_output, generator.origin());
  if (out.questions.size() > static_cast<std::size_t>(max_questions)) {
    out.questions.resize(static_cast<std::size_t>(max_questions));
  }
  if (out.questions.empty()) {
    throw Error(ErrorCode::NoQuestionsProduced, "generator output contained no questions");
  }
  return out;
}

std::string_view to_string(CoqSource source) {
  switch (source) {
    case CoqSource::ACR: return "ACR";
    case CoqSource::TT: return "TT";
    case CoqSource::NC: return "NC";
    case CoqSource::GR: return "GR";
  }
  return "ACR";
}

std::string_view to_string(CoqSplit split) {
  switch (split) {
    case CoqSplit::Train: return "Train";
    case CoqSplit::Test: return "Test";
    case CoqSplit::Valid: return "Valid";
  }
  return "Train";
}

int CoqCounts::split_total(CoqSplit split) const {
  int total = 0;
  for (const auto& row : counts) total += row[static_cast<std::size_t>(split)];
  return total;
}

int CoqCounts::total() const {
  int total = 0;
  for (const auto& row : counts)
    for (const int c : row) total += c;
  return total;
}

CoqRecord parse_coq_record(const json& j) {
  CoqRecord r;
  r.context = j.at("context").get<std::string>();
  r.questions = j.at("questions").get<std::vector<std::string>>();

  const auto source = j.at("source").get<std::string>();
  if (source == "ACR") {
    r.source = CoqSource::ACR;
  } else if (source == "TT") {
    r.source = CoqSource::TT;
  } else if (source == "NC") {
    r.source = CoqSource::NC;
  } else if (source == "GR") {
    r.source = CoqSource::GR;
  } else {
    throw Error(ErrorCode::UnknownSource, "unknown COQ source: " + source);
  }

  const auto split = j.at("split").get<std::string>();
  if (split == "Train") {
    r.split = CoqSplit::Train;
  } else if (split == "Test") {
    r.split = CoqSplit::Test;
  } else if (split == "Valid") {
    r.split = CoqSplit::Valid;
  } else {
    throw Error(ErrorCode::MalformedRecord, "unknown COQ split: " + split);
  }

  if (trim(r.context).empty()) throw Error(ErrorCode::MalformedRecord, "empty context");
  if (r.questions.empty()) throw Error(ErrorCode::MalformedRecord, "questions list is empty");
  for (const auto& q : r.questions) {
    const auto t = trim(q);
    if (t.empty() || t.back() != '?') {
      throw Error(ErrorCode::MalformedRecord, "question does not end in '?': " + q);
    }
  }
  return r;
}

CoqDataset load_coq(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open COQ file " + path.string());
  CoqDataset data;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      auto record = parse_coq_record(json::parse(line));
      ++data.counts.counts[static_cast<std::size_t>(record.source)][static_cast<std::size_t>(record.split)];
      data.records.push_back(std::move(record));
    } catch (const Error& e) {
      throw Error(e.code() == ErrorCode::UnknownSource ? ErrorCode::UnknownSource : ErrorCode::MalformedRecord,
                  where + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::MalformedRecord, where + e.what());
    }
  }
  return data;
}

std::string format_coq_table(const CoqCounts& counts) {
  const auto cell = [](const std::string& s, std::size_t width) {
    return std::string(width > s.size() ? width - s.size() : 0, ' ') + s;
  };
  std::ostringstream out;
  out << cell("", 6) << cell("Train", 8) << cell("Test", 8) << cell("Valid", 8) << '\n';
  for (const auto source : {CoqSource::ACR, CoqSource::TT, CoqSource::NC, CoqSource::GR}) {
    out << cell(std::string(to_string(source)), 6);
    for (const auto split : {CoqSplit::Train, CoqSplit::Test, CoqSplit::Valid}) {
      out << cell(std::to_string(counts.at(source, split)), 8);
    }
    out << '\n';
  }
  out << cell("Total", 6);
  for (const auto split : {CoqSplit::Train, CoqSplit::Test, CoqSplit::Valid}) {
    out << cell(std::to_string(counts.split_total(split)), 8);
  }
  out << '\n';
  return out.str();
}

BootstrapResult bootstrap_coq_candidates(std::string_view context, LlmGateway& gateway,
                                         const std::string& provider_id) {
  if (trim(context).empty()) throw Error(ErrorCode::InvalidArgument, "context must be non-empty");
  CompletionRequest req;
  req.prompt = render_prompt(PromptId::CoqBootstrap, {{"context", std::string(context)}});
  req.provider_id = provider_id;
  req.prompt_id = PromptId::CoqBootstrap;
  const auto result = gateway.complete(req);

  BootstrapResult out;
  out.raw = result.text;
  out.refused = result.refused;
  if (!result.refused) out.candidates = parse_question_sequence(result.text, QuestionOrigin::LlmPrompted);
  return out;
}

}  // namespace edit
