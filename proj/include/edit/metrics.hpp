// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edit {

/// Identifier recorded in every report next to metric values.
inline constexpr std::string_view kMetricTokenizerVersion = "edit-tok-1";

/// Lowercases, splits on whitespace, and emits each ASCII punctuation
/// character as its own token. Bytes >= 0x80 stay inside words.
std::vector<std::string> metric_tokenize(std::string_view text);

enum class BleuSmoothing { None, AddOne };

/// Sentence-level BLEU with uniform weights over orders 1..n. Orders above
/// the candidate length are left out of the geometric mean, so a one-token
/// candidate is scored on unigrams only. Brevity penalty uses the closest
/// reference length (shorter wins ties). Throws EmptyText.
double bleu_n(std::string_view candidate, std::span<const std::string> references, int n,
              BleuSmoothing smoothing = BleuSmoothing::None);
double bleu_n(const std::vector<std::string>& candidate_tokens,
              const std::vector<std::vector<std::string>>& reference_tokens, int n,
              BleuSmoothing smoothing = BleuSmoothing::None);

/// ROUGE-L F1 over the longest common token subsequence. Throws EmptyText.
double rouge_l(std::string_view candidate, std::string_view reference);
double rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace edit
