// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "edit/embedding.hpp"

namespace edit {

/// Rule-based sentence segmentation.
///
/// A boundary falls after '.', '!' or '?' (plus any closing quotes or
/// brackets) when followed by end of text, or by whitespace and then an
/// uppercase letter or digit (an opening quote/bracket may come first).
/// A '.' does not end a sentence after a listed abbreviation (Mr., Dr.,
/// etc.) or after a run of single-letter initials such as "U.S." or "J.K.".
/// Whitespace inside each sentence is collapsed; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view document_text);

/// a.b / (|a||b|). Throws DimensionMismatch or ZeroVector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct KnowledgeSentence {
  int kb_ordinal = 0;
  std::string text;
  std::string doc_id;
  EmbeddingVector embedding;
};

struct RetrievalHit {
  KnowledgeSentence sentence;
  double score = 0.0;
};

struct RetrievalConfig {
  int l = 10;
};

struct KnowledgeDocument {
  std::string doc_id;
  std::string title;
  std::string text;
};

struct IngestStats {
  int sentence_count = 0;  // sentences added by this call
  int doc_count = 0;
  int version = 0;
};

/// Immutable-once-published sentence store backing exact top-L search.
/// Row i of the embedding matrix belongs to sentences()[i].
class KbIndex {
 public:
  KbIndex(int dim, std::string provider_id);

  int dim() const noexcept { return dim_; }
  const std::string& provider_id() const noexcept { return provider_id_; }
  int version() const noexcept { return version_; }
  std::size_t size() const noexcept { return sentences_.size(); }
  bool empty() const noexcept { return sentences_.empty(); }
  const std::vector<KnowledgeSentence>& sentences() const noexcept { return sentences_; }
  const std::set<std::string>& doc_ids() const noexcept { return doc_ids_; }
  bool contains_text(std::string_view text) const;

  /// Adds a sentence with the next ordinal unless the exact text is already
  /// stored. Non-normalized embeddings are normalized. Returns false on a
  /// duplicate.
  bool append(std::string text, std::string doc_id, EmbeddingVector embedding);
  void add_doc_id(std::string doc_id) { doc_ids_.insert(std::move(doc_id)); }
  void set_version(int version) { version_ = version; }

  /// Exactly min(L, size) hits by cosine score, descending; ties go to the
  /// lower kb_ordinal. Throws EmptyIndex, DimensionMismatch, ZeroVector.
  std::vector<RetrievalHit> retrieve_top_l(const EmbeddingVector& query,
                                           const RetrievalConfig& cfg = {}) const;

  /// Global sentences followed by the overlay's, renumbered densely.
  static KbIndex unified(const KbIndex& global, const KbIndex& overlay);

  void save(const std::filesystem::path& path) const;
  static KbIndex load(const std::filesystem::path& path);

 private:
  int dim_;
  std::string provider_id_;
  int version_ = 0;
  std::vector<KnowledgeSentence> sentences_;
  std::vector<double> matrix_;  // row-major, size() x dim()
  std::unordered_set<std::string> texts_;
  std::set<std::string> doc_ids_;
};

/// Versioned, concurrently readable knowledge base. Readers take a snapshot;
/// ingest builds a new index off to the side and publishes it atomically.
class KnowledgeBase {
 public:
  KnowledgeBase(int dim, std::string provider_id);
  explicit KnowledgeBase(KbIndex initial);

  /// Splits, embeds and appends documents in order. Throws DuplicateDocId
  /// (before any work), DimensionMismatch, ProviderUnavailable.
  IngestStats ingest(std::span<const KnowledgeDocument> docs, const Embedder& embedder);

  std::shared_ptr<const KbIndex> snapshot() const;
  std::vector<RetrievalHit> retrieve_top_l(const EmbeddingVector& query,
                                           const RetrievalConfig& cfg = {}) const;

  /// Number of retrievals served through this object (used by call-contract tests).
  std::uint64_t retrieval_count() const noexcept { return retrievals_.load(); }
  void note_retrieval() const noexcept { retrievals_.fetch_add(1); }

  void save(const std::filesystem::path& path) const { snapshot()->save(path); }

 private:
  std::mutex writer_;
  mutable std::mutex publish_;
  std::shared_ptr<const KbIndex> current_;
  mutable std::atomic<std::uint64_t> retrievals_{0};
};

/// Reads document JSONL {"doc_id", "title"?, "text"}. Throws MalformedRecord
/// with the 1-based line number.
std::vector<KnowledgeDocument> load_documents(const std::filesystem::path& path);

}  // namespace edit
