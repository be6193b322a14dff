// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include "edit/knowledge_base.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "edit/core.hpp"
#include "edit/util.hpp"

namespace edit {

namespace {

constexpr std::array<std::string_view, 14> kAbbreviations = {
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.",
    "vs.", "etc.", "inc.", "ltd.", "co.", "mt."};

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Length of a closing quote/bracket at `pos`, 0 if none.
std::size_t closer_length(std::string_view text, std::size_t pos) {
  const char c = text[pos];
  if (c == '"' || c == '\'' || c == ')' || c == ']' || c == '}') return 1;
  if (text.compare(pos, 3, "\xE2\x80\x9D") == 0 || text.compare(pos, 3, "\xE2\x80\x99") == 0) return 3;
  return 0;
}

std::size_t opener_length(std::string_view text, std::size_t pos) {
  const char c = text[pos];
  if (c == '"' || c == '\'' || c == '(' || c == '[') return 1;
  if (text.compare(pos, 3, "\xE2\x80\x9C") == 0 || text.compare(pos, 3, "\xE2\x80\x98") == 0) return 3;
  return 0;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// "u.s.", "j.k.": two or more single letters each followed by a dot. A lone
// "a." is treated as a sentence end.
bool is_initialism(std::string_view word) {
  if (word.size() < 4 || word.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < word.size(); i += 2) {
    if (!std::isalpha(static_cast<unsigned char>(word[i])) || word[i + 1] != '.') return false;
  }
  return true;
}

bool suppressed_by_abbreviation(std::string_view text, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  std::string word = to_lower(text.substr(begin, dot - begin + 1));
  while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'')) {
    word.erase(word.begin());
  }
  if (is_initialism(word)) return true;
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  const auto flush = [&out](std::string_view piece) {
    auto sentence = collapse_whitespace(piece);
    if (!sentence.empty()) out.push_back(std::move(sentence));
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < text.size()) {
      const auto len = closer_length(text, end);
      if (len == 0) break;
      end += len;
    }

    bool boundary = false;
    if (end == text.size()) {
      boundary = true;
    } else if (is_space(text[end])) {
      std::size_t k = end;
      while (k < text.size() && is_space(text[k])) ++k;
      while (k < text.size()) {
        const auto len = opener_length(text, k);
        if (len == 0) break;
        k += len;
      }
      if (k == text.size()) {
        boundary = true;
      } else {
        const auto c = static_cast<unsigned char>(text[k]);
        boundary = std::isupper(c) || std::isdigit(c);
      }
    }
    if (boundary && text[i] == '.' && suppressed_by_abbreviation(text, i)) boundary = false;

    if (boundary) {
      flush(text.substr(start, end - start));
      start = end;
    }
    i = end;
  }
  if (start < text.size()) flush(text.substr(start));
  return out;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cosine of vectors with different dims");
  }
  const double na = l2_norm(a.values);
  const double nb = l2_norm(b.values);
  if (!(na > 0.0) || !(nb > 0.0)) throw Error(ErrorCode::ZeroVector, "cosine with a zero vector");
  const double dot = std::inner_product(a.values.begin(), a.values.end(), b.values.begin(), 0.0);
  return dot / (na * nb);
}

KbIndex::KbIndex(int dim, std::string provider_id) : dim_(dim), provider_id_(std::move(provider_id)) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "KB dim must be positive");
}

bool KbIndex::contains_text(std::string_view text) const {
  return texts_.find(std::string(text)) != texts_.end();
}

bool KbIndex::append(std::string text, std::string doc_id, EmbeddingVector embedding) {
  if (embedding.dim() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "sentence embedding dim " + std::to_string(embedding.dim()) +
                                                  " != KB dim " + std::to_string(dim_));
  }
  text = trim(text);
  if (text.empty()) throw Error(ErrorCode::EmptyText, "knowledge sentence is empty");
  if (texts_.count(text) != 0) return false;
  if (!embedding.normalized) embedding = normalize(embedding);

  KnowledgeSentence s;
  s.kb_ordinal = static_cast<int>(sentences_.size());
  s.text = text;
  s.doc_id = std::move(doc_id);
  s.embedding = std::move(embedding);
  matrix_.insert(matrix_.end(), s.embedding.values.begin(), s.embedding.values.end());
  texts_.insert(std::move(text));
  sentences_.push_back(std::move(s));
  return true;
}

std::vector<RetrievalHit> KbIndex::retrieve_top_l(const EmbeddingVector& query,
                                                  const RetrievalConfig& cfg) const {
  if (cfg.l < 1) throw Error(ErrorCode::InvalidArgument, "retrieval L must be >= 1");
  if (empty()) throw Error(ErrorCode::EmptyIndex, "knowledge base is empty");
  if (query.dim() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "query dim " + std::to_string(query.dim()) +
                                                  " != KB dim " + std::to_string(dim_));
  }
  const double qn = l2_norm(query.values);
  if (!(qn > 0.0)) throw Error(ErrorCode::ZeroVector, "query vector is zero");

  const auto d = static_cast<std::size_t>(dim_);
  std::vector<double> scores(sentences_.size());
  for (std::size_t r = 0; r < sentences_.size(); ++r) {
    const double* row = matrix_.data() + r * d;
    double dot = 0.0;
    for (std::size_t c = 0; c < d; ++c) dot += query.values[c] * row[c];
    // Rows are unit-norm, so this is the full cosine.
    scores[r] = dot / qn;
  }

  std::vector<std::size_t> order(sentences_.size());
  std::iota(order.begin(), order.end(), 0);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(cfg.l), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&scores](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });

  std::vector<RetrievalHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) hits.push_back({sentences_[order[i]], scores[order[i]]});
  return hits;
}

KbIndex KbIndex::unified(const KbIndex& global, const KbIndex& overlay) {
  if (global.dim() != overlay.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "overlay dim differs from the global KB");
  }
  KbIndex out = global;
  for (const auto& s : overlay.sentences()) out.append(s.text, s.doc_id, s.embedding);
  for (const auto& id : overlay.doc_ids()) out.add_doc_id(id);
  return out;
}

void KbIndex::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  out << json{{"dim", dim_}, {"provider_id", provider_id_}, {"version", version_},
              {"doc_ids", doc_ids_}}
             .dump()
      << '\n';
  for (const auto& s : sentences_) {
    out << json{{"kb_ordinal", s.kb_ordinal}, {"doc_id", s.doc_id}, {"text", s.text},
                {"values", s.embedding.values}}
               .dump()
        << '\n';
  }
  write_file_atomic(path, out.str());
}

KbIndex KbIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open KB file " + path.string());
  std::string line;
  int line_no = 0;
  std::optional<KbIndex> index;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      if (!index) {
        index.emplace(j.at("dim").get<int>(), j.at("provider_id").get<std::string>());
        index->version_ = j.at("version").get<int>();
        for (const auto& id : j.value("doc_ids", std::vector<std::string>{})) index->add_doc_id(id);
        continue;
      }
      const int ordinal = j.at("kb_ordinal").get<int>();
      if (ordinal != static_cast<int>(index->size())) {
        throw Error(ErrorCode::MalformedRecord, "kb_ordinal out of sequence");
      }
      EmbeddingVector v{j.at("values").get<std::vector<double>>(), true};
      const auto doc_id = j.at("doc_id").get<std::string>();
      if (!index->append(j.at("text").get<std::string>(), doc_id, std::move(v))) {
        throw Error(ErrorCode::MalformedRecord, "duplicate sentence text");
      }
      index->add_doc_id(doc_id);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MalformedRecord || e.code() == ErrorCode::DimensionMismatch) {
        throw Error(ErrorCode::MalformedRecord, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::MalformedRecord, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!index) throw Error(ErrorCode::MalformedRecord, path.string() + ": missing header line");
  return std::move(*index);
}

KnowledgeBase::KnowledgeBase(int dim, std::string provider_id)
    : current_(std::make_shared<const KbIndex>(dim, std::move(provider_id))) {}

KnowledgeBase::KnowledgeBase(KbIndex initial)
    : current_(std::make_shared<const KbIndex>(std::move(initial))) {}

std::shared_ptr<const KbIndex> KnowledgeBase::snapshot() const {
  std::lock_guard lock(publish_);
  return current_;
}

IngestStats KnowledgeBase::ingest(std::span<const KnowledgeDocument> docs, const Embedder& embedder) {
  std::lock_guard writer(writer_);
  const auto base = snapshot();

  std::set<std::string> seen;
  for (const auto& doc : docs) {
    if (base->doc_ids().count(doc.doc_id) != 0 || !seen.insert(doc.doc_id).second) {
      throw Error(ErrorCode::DuplicateDocId, "duplicate doc_id: " + doc.doc_id);
    }
  }
  if (embedder.info().dim != base->dim()) {
    throw Error(ErrorCode::DimensionMismatch, "embedder dim " + std::to_string(embedder.info().dim) +
                                                  " != KB dim " + std::to_string(base->dim()));
  }

  auto next = std::make_shared<KbIndex>(*base);
  IngestStats stats;
  for (const auto& doc : docs) {
    for (auto& sentence : split_sentences(doc.text)) {
      if (next->contains_text(sentence)) continue;
      auto embedding = embedder.embed_text(sentence);
      if (next->append(std::move(sentence), doc.doc_id, std::move(embedding))) ++stats.sentence_count;
    }
    next->add_doc_id(doc.doc_id);
    ++stats.doc_count;
  }
  next->set_version(base->version() + 1);
  stats.version = next->version();

  std::lock_guard lock(publish_);
  current_ = std::move(next);
  return stats;
}

std::vector<RetrievalHit> KnowledgeBase::retrieve_top_l(const EmbeddingVector& query,
                                                        const RetrievalConfig& cfg) const {
  note_retrieval();
  return snapshot()->retrieve_top_l(query, cfg);
}

std::vector<KnowledgeDocument> load_documents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open documents file " + path.string());
  std::vector<KnowledgeDocument> docs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      KnowledgeDocument doc;
      doc.doc_id = j.at("doc_id").get<std::string>();
      doc.title = j.value("title", std::string{});
      doc.text = j.at("text").get<std::string>();
      if (doc.doc_id.empty()) throw Error(ErrorCode::MalformedRecord, "empty doc_id");
      docs.push_back(std::move(doc));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::MalformedRecord,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace edit
