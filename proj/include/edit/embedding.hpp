// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "edit/errors.hpp"

namespace edit {

struct EmbeddingVector {
  std::vector<double> values;
  bool normalized = false;

  int dim() const noexcept { return static_cast<int>(values.size()); }
  bool operator==(const EmbeddingVector&) const = default;
};

/// Component-wise mean. Throws EmptyInput or DimensionMismatch.
EmbeddingVector mean_pool(std::span<const std::vector<double>> token_vectors);

double l2_norm(std::span<const double> values);

/// v / ||v||. Throws ZeroVector.
EmbeddingVector normalize(const EmbeddingVector& v);

enum class EmbeddingKind { RemoteApi, TokenModelWithPooling, DeterministicTest };

struct EmbeddingProviderInfo {
  std::string provider_id;
  int dim = 0;
  EmbeddingKind kind = EmbeddingKind::DeterministicTest;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual EmbeddingProviderInfo info() const = 0;
  /// RemoteApi providers return one sentence vector; token-level providers
  /// return one vector per token and are mean-pooled by the Embedder.
  virtual std::vector<std::vector<double>> encode(std::string_view text) = 0;
};

/// Offline token-hashing encoder.
///
/// Tokens are the lowercase alphanumeric runs of the text (bytes >= 0x80
/// count as alphanumeric). Each token maps to a unit vector: the generator
/// state starts at fnv1a64(token) ^ seed, then component i is
/// `(splitmix64(state) >> 11) * 2^-53 * 2 - 1`, and the result is
/// L2-normalized. A text with no tokens is encoded as its trimmed form.
class HashingEmbeddingProvider : public EmbeddingProvider {
 public:
  static constexpr std::uint64_t kDefaultSeed = 0x45444954ULL;  // "EDIT"

  explicit HashingEmbeddingProvider(int dim = 8, std::uint64_t seed = kDefaultSeed);

  EmbeddingProviderInfo info() const override;
  std::vector<std::vector<double>> encode(std::string_view text) override;

  static std::vector<std::string> tokenize(std::string_view text);
  std::vector<double> token_vector(std::string_view token) const;

 private:
  int dim_;
  std::uint64_t seed_;
};

/// POSTs {"input": [text]} and reads the first vector of the reply
/// ({"data":[{"embedding":[...]}]} or {"embeddings":[[...]]}).
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  struct Options {
    std::string url;
    std::string model;
    std::string api_key;
    int dim = 0;  // 0: learned from the first response
  };

  explicit HttpEmbeddingProvider(Options options);
  EmbeddingProviderInfo info() const override;
  std::vector<std::vector<double>> encode(std::string_view text) override;

 private:
  Options options_;
  mutable std::shared_mutex mutex_;
  int dim_;
};

/// Content-addressed vector cache. Keys are SHA-256 over provider id, dim
/// and text; persisted as JSONL {"key","dim","values"}.
class EmbeddingCache {
 public:
  static std::string key(std::string_view provider_id, int dim, std::string_view text);

  std::optional<std::vector<double>> lookup(const std::string& key) const;
  /// Keeps an existing entry; concurrent duplicate computes are harmless.
  void insert(const std::string& key, std::vector<double> values);
  std::size_t size() const;

  void load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

class Embedder {
 public:
  explicit Embedder(std::shared_ptr<EmbeddingProvider> provider,
                    std::shared_ptr<EmbeddingCache> cache = nullptr);

  /// Unit-norm embedding of `text`. Throws EmptyText or ProviderUnavailable.
  EmbeddingVector embed_text(std::string_view text) const;

  EmbeddingProviderInfo info() const { return provider_->info(); }
  const std::shared_ptr<EmbeddingCache>& cache() const { return cache_; }

 private:
  std::shared_ptr<EmbeddingProvider> provider_;
  std::shared_ptr<EmbeddingCache> cache_;
};

}  // namespace edit
