// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "edit/errors.hpp"
#include "edit/knowledge_base.hpp"
#include "fixtures.hpp"

namespace edit {
namespace {

using Strings = std::vector<std::string>;

TEST(SplitSentences, Examples) {
  EXPECT_TRUE(split_sentences("").empty());
  EXPECT_EQ(split_sentences("A fox ran. It hid! Why?"), (Strings{"A fox ran.", "It hid!", "Why?"}));
  EXPECT_EQ(split_sentences("He lived in the U.S. for years. Then he left."),
            (Strings{"He lived in the U.S. for years.", "Then he left."}));
  EXPECT_EQ(split_sentences("A. B."), (Strings{"A.", "B."}));
}

TEST(SplitSentences, AbbreviationsAndQuotes) {
  EXPECT_EQ(split_sentences("Dr. Smith arrived. She sat."), (Strings{"Dr. Smith arrived.", "She sat."}));
  EXPECT_EQ(split_sentences("Books by J.K. Rowling sell well. Many agree."),
            (Strings{"Books by J.K. Rowling sell well.", "Many agree."}));
  EXPECT_EQ(split_sentences("He said \"Stop.\" Then left."), (Strings{"He said \"Stop.\"", "Then left."}));
  EXPECT_EQ(split_sentences("version 2.5 is out. ok"), (Strings{"version 2.5 is out. ok"}));
}

TEST(Cosine, Examples) {
  const EmbeddingVector x{{1, 0}, true};
  EXPECT_DOUBLE_EQ(cosine(x, x), 1.0);
  EXPECT_DOUBLE_EQ(cosine(x, EmbeddingVector{{0, 1}, true}), 0.0);
  EXPECT_DOUBLE_EQ(cosine(x, EmbeddingVector{{0.6, 0.8}, true}), 0.6);
  EXPECT_NEAR(cosine(EmbeddingVector{{3, 0.5}, false}, EmbeddingVector{{1, 2}, false}),
              cosine(EmbeddingVector{{30, 5}, false}, EmbeddingVector{{1, 2}, false}), 1e-9);
}

KbIndex index_of(const std::vector<std::vector<double>>& rows) {
  KbIndex idx(static_cast<int>(rows.front().size()), "test");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    idx.append("s" + std::to_string(i), "d", EmbeddingVector{rows[i], false});
  }
  return idx;
}

TEST(Retrieval, WorkedExample) {
  const auto idx = index_of({{1, 0}, {0, 1}, {0.6, 0.8}});
  const auto hits = idx.retrieve_top_l(EmbeddingVector{{1, 0}, true}, RetrievalConfig{2});
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].sentence.kb_ordinal, 0);
  EXPECT_EQ(hits[1].sentence.kb_ordinal, 2);
  EXPECT_NEAR(hits[0].score, 1.0, 1e-12);
  EXPECT_NEAR(hits[1].score, 0.6, 1e-12);
}

TEST(Retrieval, DefaultLAndSmallIndex) {
  EXPECT_EQ(RetrievalConfig{}.l, 10);
  const auto idx = index_of({{0.2, 1}, {1, 0}, {1, 1}});
  const auto hits = idx.retrieve_top_l(EmbeddingVector{{1, 0.1}, false});
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_GE(hits[0].score, hits[1].score);
  EXPECT_GE(hits[1].score, hits[2].score);
}

TEST(Retrieval, TiesGoToLowerOrdinal) {
  KbIndex idx(2, "test");
  idx.append("first", "d", EmbeddingVector{{1, 0}, true});
  idx.append("second", "d", EmbeddingVector{{2, 0}, false});
  const auto hits = idx.retrieve_top_l(EmbeddingVector{{1, 0}, true}, RetrievalConfig{1});
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].sentence.text, "first");
}

TEST(Retrieval, Errors) {
  KbIndex empty(2, "test");
  const auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code_of([&] { empty.retrieve_top_l(EmbeddingVector{{1, 0}, true}); }), ErrorCode::EmptyIndex);
  const auto idx = index_of({{1, 0}});
  EXPECT_EQ(code_of([&] { idx.retrieve_top_l(EmbeddingVector{{1, 0, 0}, true}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { idx.retrieve_top_l(EmbeddingVector{{0, 0}, false}); }), ErrorCode::ZeroVector);
  EXPECT_EQ(code_of([&] { idx.retrieve_top_l(EmbeddingVector{{1, 0}, true}, RetrievalConfig{0}); }),
            ErrorCode::InvalidArgument);
}

TEST(Retrieval, MatchesBruteForceOracle) {
  std::mt19937_64 rng(20261019);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 1 + static_cast<int>(rng() % 64);
    const int dim = 1 + static_cast<int>(rng() % 16);
    const int l = 1 + static_cast<int>(rng() % 12);
    std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
    for (auto& r : rows) {
      for (auto& x : r) x = u(rng);
      if (inst % 5 == 0) r = rows.front();  // force ties
    }
    std::vector<double> q(dim);
    for (auto& x : q) x = u(rng);

    KbIndex idx(dim, "test");
    for (int i = 0; i < n; ++i) idx.append("s" + std::to_string(i), "d", EmbeddingVector{rows[i], false});
    const auto hits = idx.retrieve_top_l(EmbeddingVector{q, false}, RetrievalConfig{l});

    // Oracle: score every stored row against the query, sort, cut.
    std::vector<std::pair<double, int>> all;
    for (const auto& s : idx.sentences()) {
      const auto& r = rows[std::stoi(s.text.substr(1))];
      double dot = 0, na = 0, nb = 0;
      for (int k = 0; k < dim; ++k) {
        dot += r[k] * q[k];
        na += r[k] * r[k];
        nb += q[k] * q[k];
      }
      all.emplace_back(dot / std::sqrt(na * nb), s.kb_ordinal);
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      if (std::abs(a.first - b.first) > 1e-12) return a.first > b.first;
      return a.second < b.second;
    });
    const auto want = std::min<std::size_t>(l, all.size());
    ASSERT_EQ(hits.size(), want);
    for (std::size_t i = 0; i < want; ++i) {
      EXPECT_EQ(hits[i].sentence.kb_ordinal, all[i].second) << "instance " << inst << " rank " << i;
      EXPECT_NEAR(hits[i].score, all[i].first, 1e-9);
    }
  }
}

TEST(KnowledgeBase, IngestExamples) {
  Embedder e(std::make_shared<HashingEmbeddingProvider>());
  KnowledgeBase kb(8, "hash-8");
  const std::vector<KnowledgeDocument> d1{{"d1", "", "A. B."}};
  const auto stats = kb.ingest(d1, e);
  EXPECT_EQ(stats.sentence_count, 2);
  EXPECT_EQ(stats.version, 1);

  const std::vector<KnowledgeDocument> d2{{"d2", "", "B. C."}};
  kb.ingest(d2, e);
  EXPECT_EQ(kb.snapshot()->size(), 3u);  // "B." stored once

  try {
    kb.ingest(d1, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DuplicateDocId);
  }
  EXPECT_EQ(kb.snapshot()->version(), 2);
}

TEST(KnowledgeBase, SnapshotsAreImmutable) {
  Embedder e(std::make_shared<HashingEmbeddingProvider>());
  KnowledgeBase kb(8, "hash-8");
  const std::vector<KnowledgeDocument> d1{{"d1", "", "One sentence here."}};
  kb.ingest(d1, e);
  const auto before = kb.snapshot();
  const std::vector<KnowledgeDocument> d2{{"d2", "", "Another sentence. And more."}};
  kb.ingest(d2, e);
  EXPECT_EQ(before->size(), 1u);
  EXPECT_EQ(kb.snapshot()->size(), 3u);
}

TEST(KnowledgeBase, PersistenceRoundTrip) {
  testing::TempDir dir;
  testing::Rig rig(std::make_shared<ScriptedProvider>());
  rig.kb->save(dir / "kb.jsonl");
  const auto loaded = KbIndex::load(dir / "kb.jsonl");
  const auto original = rig.kb->snapshot();
  ASSERT_EQ(loaded.size(), original->size());
  EXPECT_EQ(loaded.doc_ids(), original->doc_ids());
  EXPECT_EQ(loaded.version(), original->version());
  for (const std::string q : {"critical thinking", "television", "hobbies like hiking"}) {
    const auto e = rig.embedder->embed_text(q);
    const auto a = original->retrieve_top_l(e);
    const auto b = loaded.retrieve_top_l(e);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].sentence.text, b[i].sentence.text);
      EXPECT_EQ(a[i].score, b[i].score);
    }
  }
}

TEST(KnowledgeBase, UnifiedOverlayAppendsAndDedups) {
  KbIndex global(2, "t");
  global.append("g1", "g", EmbeddingVector{{1, 0}, true});
  KbIndex overlay(2, "t");
  overlay.append("g1", "o", EmbeddingVector{{1, 0}, true});
  overlay.append("o1", "o", EmbeddingVector{{0, 1}, true});
  const auto u = KbIndex::unified(global, overlay);
  ASSERT_EQ(u.size(), 2u);
  EXPECT_EQ(u.sentences()[1].text, "o1");
  EXPECT_EQ(u.sentences()[1].kb_ordinal, 1);
}

TEST(LoadDocuments, ReportsLineNumbers) {
  testing::TempDir dir;
  write_file_atomic(dir / "docs.jsonl", "{\"doc_id\":\"a\",\"text\":\"x.\"}\n{broken\n");
  try {
    load_documents(dir / "docs.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }
}

}  // namespace
}  // namespace edit
