// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include "edit/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "edit/core.hpp"
#include "edit/util.hpp"

namespace edit {

EmbeddingVector mean_pool(std::span<const std::vector<double>> token_vectors) {
  if (token_vectors.empty()) throw Error(ErrorCode::EmptyInput, "mean_pool of no vectors");
  const auto dim = token_vectors.front().size();
  if (dim == 0) throw Error(ErrorCode::EmptyInput, "mean_pool of zero-length vectors");
  EmbeddingVector out;
  out.values.assign(dim, 0.0);
  for (const auto& v : token_vectors) {
    if (v.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "mean_pool expects dim " + std::to_string(dim) +
                                                    ", got " + std::to_string(v.size()));
    }
    for (std::size_t i = 0; i < dim; ++i) out.values[i] += v[i];
  }
  const auto count = static_cast<double>(token_vectors.size());
  for (auto& x : out.values) x /= count;
  return out;
}

double l2_norm(std::span<const double> values) {
  double sum = 0.0;
  for (const double x : values) sum += x * x;
  return std::sqrt(sum);
}

EmbeddingVector normalize(const EmbeddingVector& v) {
  const double norm = l2_norm(v.values);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::ZeroVector, "cannot normalize a zero or non-finite vector");
  }
  EmbeddingVector out;
  out.values.reserve(v.values.size());
  for (const double x : v.values) out.values.push_back(x / norm);
  out.normalized = true;
  return out;
}

HashingEmbeddingProvider::HashingEmbeddingProvider(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "embedding dim must be positive");
}

EmbeddingProviderInfo HashingEmbeddingProvider::info() const {
  return {"hash-" + std::to_string(dim_), dim_, EmbeddingKind::DeterministicTest};
}

std::vector<std::string> HashingEmbeddingProvider::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<double> HashingEmbeddingProvider::token_vector(std::string_view token) const {
  std::uint64_t state = fnv1a64(token) ^ seed_;
  std::vector<double> v(static_cast<std::size_t>(dim_));
  for (auto& x : v) {
    x = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }
  return normalize(EmbeddingVector{std::move(v), false}).values;
}

std::vector<std::vector<double>> HashingEmbeddingProvider::encode(std::string_view text) {
  auto tokens = tokenize(text);
  if (tokens.empty()) tokens.push_back(trim(text));
  std::vector<std::vector<double>> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(token_vector(t));
  return out;
}

std::string EmbeddingCache::key(std::string_view provider_id, int dim, std::string_view text) {
  std::string material(provider_id);
  material.push_back('\x1f');
  material += std::to_string(dim);
  material.push_back('\x1f');
  material += text;
  return sha256_hex(material);
}

std::optional<std::vector<double>> EmbeddingCache::lookup(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::insert(const std::string& key, std::vector<double> values) {
  std::unique_lock lock(mutex_);
  entries_.try_emplace(key, std::move(values));
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void EmbeddingCache::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return;  // no sidecar yet
  std::string line;
  int line_no = 0;
  std::unique_lock lock(mutex_);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      auto values = j.at("values").get<std::vector<double>>();
      if (static_cast<int>(values.size()) != j.at("dim").get<int>()) {
        throw Error(ErrorCode::DimensionMismatch, "dim does not match values length");
      }
      entries_.try_emplace(j.at("key").get<std::string>(), std::move(values));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::MalformedRecord,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void EmbeddingCache::save(const std::filesystem::path& path) const {
  std::shared_lock lock(mutex_);
  std::vector<const std::pair<const std::string, std::vector<double>>*> sorted;
  sorted.reserve(entries_.size());
  for (const auto& e : entries_) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->first < b->first; });
  std::ostringstream out;
  for (const auto* e : sorted) {
    out << json{{"key", e->first}, {"dim", e->second.size()}, {"values", e->second}}.dump() << '\n';
  }
  write_file_atomic(path, out.str());
}

Embedder::Embedder(std::shared_ptr<EmbeddingProvider> provider, std::shared_ptr<EmbeddingCache> cache)
    : provider_(std::move(provider)), cache_(std::move(cache)) {
  if (!provider_) throw Error(ErrorCode::InvalidArgument, "null embedding provider");
}

EmbeddingVector Embedder::embed_text(std::string_view text) const {
  if (trim(text).empty()) throw Error(ErrorCode::EmptyText, "cannot embed empty text");
  const auto info = provider_->info();
  std::string cache_key;
  if (cache_) {
    cache_key = EmbeddingCache::key(info.provider_id, info.dim, text);
    if (auto hit = cache_->lookup(cache_key)) return EmbeddingVector{std::move(*hit), true};
  }

  std::vector<std::vector<double>> encoded;
  try {
    encoded = provider_->encode(text);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ProviderUnavailable, e.what());
  }
  if (encoded.empty()) throw Error(ErrorCode::ProviderUnavailable, "embedding provider returned nothing");

  EmbeddingVector pooled;
  if (info.kind == EmbeddingKind::RemoteApi) {
    pooled.values = std::move(encoded.front());
  } else {
    pooled = mean_pool(encoded);
  }
  auto result = normalize(pooled);
  if (cache_) cache_->insert(cache_key, result.values);
  return result;
}

}  // namespace edit
