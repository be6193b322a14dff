// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include "edit/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>

#include "edit/errors.hpp"

namespace edit {

std::vector<std::string> metric_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t order) {
  NgramCounts counts;
  if (tokens.size() < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + order))];
  }
  return counts;
}

}  // namespace

double bleu_n(const std::vector<std::string>& cand, const std::vector<std::vector<std::string>>& refs,
              int n, BleuSmoothing smoothing) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "BLEU order must be >= 1");
  if (cand.empty()) throw Error(ErrorCode::EmptyText, "BLEU candidate is empty");
  bool any_ref = false;
  for (const auto& r : refs) any_ref = any_ref || !r.empty();
  if (!any_ref) throw Error(ErrorCode::EmptyText, "BLEU needs at least one non-empty reference");

  const std::size_t orders = std::min<std::size_t>(static_cast<std::size_t>(n), cand.size());
  double log_sum = 0.0;
  for (std::size_t order = 1; order <= orders; ++order) {
    const auto cand_counts = count_ngrams(cand, order);
    std::map<std::vector<std::string>, int> max_ref;
    for (const auto& r : refs) {
      for (const auto& [gram, count] : count_ngrams(r, order)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    double matched = 0.0;
    double total = 0.0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      const auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(count, it->second);
    }
    if (smoothing == BleuSmoothing::AddOne && order > 1) {
      matched += 1.0;
      total += 1.0;
    }
    if (matched == 0.0) return 0.0;
    log_sum += std::log(matched / total);
  }

  const auto c = static_cast<double>(cand.size());
  double r = 0.0;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (const auto& ref : refs) {
    if (ref.empty()) continue;
    const auto gap = ref.size() > cand.size() ? ref.size() - cand.size() : cand.size() - ref.size();
    if (gap < best_gap || (gap == best_gap && static_cast<double>(ref.size()) < r)) {
      best_gap = gap;
      r = static_cast<double>(ref.size());
    }
  }
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  if (log_sum == 0.0) return bp;
  return bp * std::exp(log_sum / static_cast<double>(orders));
}

double bleu_n(std::string_view candidate, std::span<const std::string> references, int n,
              BleuSmoothing smoothing) {
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(metric_tokenize(r));
  return bleu_n(metric_tokenize(candidate), refs, n, smoothing);
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
  if (cand.empty() || ref.empty()) throw Error(ErrorCode::EmptyText, "ROUGE-L needs non-empty texts");
  const auto lcs = static_cast<double>(lcs_length(cand, ref));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(cand.size());
  const double r = lcs / static_cast<double>(ref.size());
  return 2.0 * p * r / (p + r);
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  return rouge_l(metric_tokenize(candidate), metric_tokenize(reference));
}

}  // namespace edit
