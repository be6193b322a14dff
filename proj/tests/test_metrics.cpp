// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "edit/errors.hpp"
#include "edit/metrics.hpp"

namespace edit {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenizer, LowercasesAndSplitsPunctuation) {
  EXPECT_EQ(metric_tokenize("The cat, sat!"), (Tokens{"the", "cat", ",", "sat", "!"}));
  EXPECT_TRUE(metric_tokenize("  ").empty());
}

TEST(Bleu, WorkedExamples) {
  const std::vector<std::string> ref{"the cat sat down"};
  EXPECT_NEAR(bleu_n("the cat sat", ref, 1), std::exp(1.0 - 4.0 / 3.0), 1e-12);
  EXPECT_NEAR(bleu_n("the cat sat", ref, 1), 0.7165, 1e-3);
  const std::vector<std::string> same{"a quick brown fox"};
  EXPECT_EQ(bleu_n("a quick brown fox", same, 2), 1.0);
  const std::vector<std::string> cd{"c d"};
  EXPECT_EQ(bleu_n("a b", cd, 1), 0.0);
  const std::vector<std::string> x{"x"};
  EXPECT_EQ(bleu_n("x", x, 4), 1.0);
}

TEST(Bleu, ClippingAndMultipleReferences) {
  // "the the the" vs "the cat": unigram precision clipped to 1/3.
  const std::vector<std::string> ref{"the cat"};
  EXPECT_NEAR(bleu_n("the the the", ref, 1), 1.0 / 3.0, 1e-12);
  // Closest reference length picks BP = 1.
  const std::vector<std::string> refs{"the cat sat down today", "the cat sat"};
  EXPECT_NEAR(bleu_n("the cat sat", refs, 1), 1.0, 1e-12);
}

TEST(Bleu, AddOneSmoothing) {
  const std::vector<std::string> ref{"a b c"};
  EXPECT_EQ(bleu_n("a c b", ref, 2), 0.0);
  EXPECT_GT(bleu_n("a x b", ref, 2, BleuSmoothing::AddOne), 0.0);
}

TEST(Bleu, EmptyInputsThrow) {
  const std::vector<std::string> ref{"a"};
  EXPECT_THROW(bleu_n("", ref, 1), Error);
  const std::vector<std::string> none{""};
  EXPECT_THROW(bleu_n("a", none, 1), Error);
}

TEST(RougeL, WorkedExamples) {
  EXPECT_NEAR(rouge_l("the cat", "the cat sat"), 0.8, 1e-9);
  EXPECT_EQ(rouge_l("one two three", "one two three"), 1.0);
  EXPECT_EQ(rouge_l("a b", "c d"), 0.0);
}

// Brute-force oracles: explicit n-gram enumeration and exhaustive LCS.
double oracle_bleu(const Tokens& c, const Tokens& r, int n) {
  const int orders = std::min<int>(n, static_cast<int>(c.size()));
  double log_sum = 0;
  for (int k = 1; k <= orders; ++k) {
    int matched = 0, total = 0;
    std::vector<bool> used(r.size() + 1, false);
    std::vector<Tokens> rgrams;
    for (std::size_t i = 0; i + k <= r.size(); ++i) rgrams.emplace_back(r.begin() + i, r.begin() + i + k);
    std::vector<bool> taken(rgrams.size(), false);
    for (std::size_t i = 0; i + k <= c.size(); ++i) {
      const Tokens g(c.begin() + i, c.begin() + i + k);
      ++total;
      for (std::size_t j = 0; j < rgrams.size(); ++j) {
        if (!taken[j] && rgrams[j] == g) {
          taken[j] = true;
          ++matched;
          break;
        }
      }
    }
    if (matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / total);
  }
  const double bp = c.size() < r.size() ? std::exp(1.0 - static_cast<double>(r.size()) / c.size()) : 1.0;
  return bp * std::exp(log_sum / orders);
}

std::size_t oracle_lcs(const Tokens& a, const Tokens& b, std::size_t i = 0, std::size_t j = 0) {
  if (i == a.size() || j == b.size()) return 0;
  if (a[i] == b[j]) return 1 + oracle_lcs(a, b, i + 1, j + 1);
  return std::max(oracle_lcs(a, b, i + 1, j), oracle_lcs(a, b, i, j + 1));
}

TEST(MetricOracles, RandomSequences) {
  std::mt19937 rng(7);
  const Tokens vocab{"a", "b", "c", "d", "e"};
  for (int i = 0; i < 150; ++i) {
    Tokens c(1 + rng() % 9), r(1 + rng() % 9);
    for (auto& t : c) t = vocab[rng() % vocab.size()];
    for (auto& t : r) t = vocab[rng() % vocab.size()];
    for (int n = 1; n <= 2; ++n) EXPECT_NEAR(bleu_n(c, {r}, n), oracle_bleu(c, r, n), 1e-9);
    const auto lcs = static_cast<double>(oracle_lcs(c, r));
    const double f = lcs == 0 ? 0.0 : 2 * (lcs / c.size()) * (lcs / r.size()) / (lcs / c.size() + lcs / r.size());
    EXPECT_NEAR(rouge_l(c, r), f, 1e-9);
    EXPECT_EQ(bleu_n(c, {c}, 2), 1.0);
    EXPECT_EQ(rouge_l(c, c), 1.0);
  }
}

}  // namespace
}  // namespace edit
