#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"

using namespace stormpipe;

namespace {

// Reads EMB1 by hand from raw bytes; shares nothing with the library reader.
struct Emb1 {
  std::uint32_t count = 0, dim = 0;
  std::vector<float> values;
};

std::uint32_t u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

Emb1 parse_emb1(const std::string& bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  EXPECT_EQ(bytes.substr(0, 4), "EMB1");
  Emb1 e;
  e.count = u32_le(p + 4);
  e.dim = u32_le(p + 8);
  EXPECT_EQ(bytes.size(), 12u + 4u * e.count * e.dim);
  for (std::size_t k = 0; k < static_cast<std::size_t>(e.count) * e.dim; ++k) {
    const std::uint32_t bits = u32_le(p + 12 + 4 * k);
    float f;
    std::memcpy(&f, &bits, 4);
    e.values.push_back(f);
  }
  return e;
}

std::vector<float> random_rows(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<float> v(rows * dim);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<ArticleId> iota_ids(std::size_t n) {
  std::vector<ArticleId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

std::string random_text(std::mt19937_64& rng, std::size_t words, std::size_t vocab_lo, std::size_t vocab_hi) {
  std::uniform_int_distribution<std::size_t> w(vocab_lo, vocab_hi);
  std::string s;
  for (std::size_t i = 0; i < words; ++i) s += "w" + std::to_string(w(rng)) + " ";
  return s;
}

}  // namespace

TEST(Emb1, SmallMatrixRoundTripsBitForBit) {
  const std::vector<float> v{0.1f, -2.5f, 3.0f, 1e-20f, 4.0f, 5.5f, -0.0f, 7.25f, 1.0f, 1.0f, 1.0f, 1.0f};
  std::stringstream s;
  write_emb1(s, 4, v);
  const auto raw = read_emb1(s);
  EXPECT_EQ(raw.count, 3u);
  EXPECT_EQ(raw.dim, 4u);
  ASSERT_EQ(raw.values.size(), v.size());
  EXPECT_EQ(std::memcmp(raw.values.data(), v.data(), v.size() * sizeof(float)), 0);
}

TEST(Emb1, BadMagicTruncationAndTrailingBytes) {
  std::stringstream bad("XXXX\x01\0\0\0\x01\0\0\0", std::ios::in | std::ios::binary);
  EXPECT_THROW(read_emb1(bad), FormatError);

  std::stringstream s;
  write_emb1(s, 4, std::vector<float>(8, 0.5f));
  const std::string bytes = s.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 2));
  EXPECT_THROW(read_emb1(truncated), FormatError);
  std::stringstream trailing(bytes + "zz");
  EXPECT_THROW(read_emb1(trailing), FormatError);
}

TEST(Emb1, DimAndIdCountMismatch) {
  const auto dir = stormpipe::testing::temp_dir("emb-mismatch");
  std::mt19937_64 rng(1);
  const EmbeddingMatrix m(8, iota_ids(5), random_rows(rng, 5, 8));
  save_embeddings(m, (dir / "e.emb").string(), (dir / "e.ids").string());
  EXPECT_THROW(load_embeddings((dir / "e.emb").string(), (dir / "e.ids").string(), 16), FormatError);
  std::ofstream((dir / "short.ids")) << "0\n1\n2\n";
  EXPECT_THROW(load_embeddings((dir / "e.emb").string(), (dir / "short.ids").string()), FormatError);
  EXPECT_NO_THROW(load_embeddings((dir / "e.emb").string(), (dir / "e.ids").string(), 8));
}

TEST(Emb1, IndependentReaderAgreesAfterNormalization) {
  std::mt19937_64 rng(2024);
  const std::size_t n = 1000, dim = 64;
  const auto values = random_rows(rng, n, dim);
  const auto dir = stormpipe::testing::temp_dir("emb-independent");
  {
    std::ofstream out(dir / "m.emb", std::ios::binary);
    write_emb1(out, dim, values);
    std::ofstream ids(dir / "m.ids");
    write_ids(ids, iota_ids(n));
  }
  const auto loaded = load_embeddings((dir / "m.emb").string(), (dir / "m.ids").string());
  const auto raw = parse_emb1(stormpipe::testing::slurp(dir / "m.emb"));
  ASSERT_EQ(raw.count, n);
  ASSERT_EQ(loaded.ids(), iota_ids(n));
  double worst = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double sq = 0.0;
    for (std::size_t k = 0; k < dim; ++k) sq += static_cast<double>(raw.values[r * dim + k]) * raw.values[r * dim + k];
    const double norm = std::sqrt(sq);
    for (std::size_t k = 0; k < dim; ++k)
      worst = std::max(worst, std::abs(raw.values[r * dim + k] / norm - loaded.row(r)[k]));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(EmbeddingMatrix, RowsAreUnitNormAfterLoad) {
  std::mt19937_64 rng(8);
  const EmbeddingMatrix m(16, iota_ids(50), random_rows(rng, 50, 16));
  for (std::size_t r = 0; r < m.rows(); ++r) EXPECT_NEAR(dot(m.row(r), m.row(r)), 1.0, 1e-4);
  EXPECT_THROW(EmbeddingMatrix(2, iota_ids(1), std::vector<float>{0.0f, 0.0f}), ValidationError);
  EXPECT_THROW(EmbeddingMatrix(2, std::vector<ArticleId>{3, 3}, std::vector<float>{1, 0, 0, 1}), ValidationError);
}

TEST(Cosine, AnalyticCases) {
  const std::vector<float> e1{1.0f, 0.0f}, e2{0.0f, 1.0f};
  const float h = static_cast<float>(1.0 / std::sqrt(2.0));
  const std::vector<float> diag{h, h};
  EXPECT_NEAR(cosine(e1, e1), 1.0, 1e-12);
  EXPECT_NEAR(cosine(e1, e2), 0.0, 1e-12);
  EXPECT_NEAR(cosine(e1, diag), 0.70710678, 1e-6);
  const std::vector<float> zero{0.0f, 0.0f};
  EXPECT_THROW(cosine(e1, zero), ValidationError);
  EXPECT_THROW(cosine(e1, std::vector<float>{1.0f}), ValidationError);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> scale(0.01f, 100.0f);
  for (int t = 0; t < 200; ++t) {
    const auto u = random_rows(rng, 1, 32), v = random_rows(rng, 1, 32);
    EXPECT_EQ(cosine(u, v), cosine(v, u));
    auto su = u;
    const float a = scale(rng);
    for (auto& x : su) x *= a;
    EXPECT_NEAR(cosine(su, v), cosine(u, v), 1e-6);
    EXPECT_LE(std::abs(cosine(u, v)), 1.0 + 1e-6);
  }
}

TEST(Score, ExactBoundaryExcludedJustAboveIncluded) {
  for (double target : {0.9, 0.9 + 1e-6}) {
    const auto [u, v] = stormpipe::testing::exact_dot_pair(target);
    std::vector<float> values(u);
    values.insert(values.end(), v.begin(), v.end());
    const EmbeddingMatrix m(5, {10, 20}, values);
    ASSERT_EQ(dot(m.row(0), m.row(1)), target) << "fixture precondition";
    const std::vector<CandidatePair> pairs{{10, 20}};
    const auto r = score_candidates(pairs, m, 0.9);
    EXPECT_EQ(r.edges.size(), target > 0.9 ? 1u : 0u) << target;
  }
}

TEST(Score, IdenticalVectorsScoreOne) {
  const EmbeddingMatrix m(3, {1, 2}, {0.6f, 0.8f, 0.0f, 0.6f, 0.8f, 0.0f});
  const std::vector<CandidatePair> pairs{{1, 2}};
  const auto r = score_candidates(pairs, m);
  ASSERT_EQ(r.edges.size(), 1u);
  EXPECT_NEAR(r.edges[0].score, 1.0, 1e-7);
}

TEST(Score, MissingEmbeddingsReportedAndSkipped) {
  const EmbeddingMatrix m(2, {1, 2}, {1.0f, 0.0f, 1.0f, 0.0f});
  const std::vector<CandidatePair> pairs{{1, 2}, {1, 7}, {2, 9}, {7, 9}};
  const auto r = score_candidates(pairs, m);
  EXPECT_EQ(r.edges.size(), 1u);
  EXPECT_EQ(r.skipped_pairs, 3u);
  EXPECT_EQ(r.scored_pairs, 1u);
  EXPECT_EQ(r.missing_articles, (std::vector<ArticleId>{7, 9}));
}

TEST(Score, MatchesBruteForceOnPlantedClusters) {
  // 500 articles: 10 planted clusters of 20 near-identical texts plus 300 unrelated ones.
  std::mt19937_64 rng(99);
  std::vector<std::string> texts;
  for (int c = 0; c < 10; ++c) {
    const auto base = random_text(rng, 120, 0, 30000);
    for (int k = 0; k < 20; ++k) texts.push_back(base + random_text(rng, 3, 0, 30000));
  }
  for (int k = 0; k < 300; ++k) texts.push_back(random_text(rng, 120, 0, 30000));
  std::vector<float> values;
  for (const auto& t : texts) {
    const auto v = mock_embed("", t, 128, 0);
    values.insert(values.end(), v.begin(), v.end());
  }
  const EmbeddingMatrix m(128, iota_ids(texts.size()), values);

  std::vector<CandidatePair> all;
  for (ArticleId a = 0; a < texts.size(); ++a)
    for (ArticleId b = a + 1; b < texts.size(); ++b) all.push_back({a, b});
  const auto r = score_candidates(all, m, 0.9, 4);

  std::set<std::pair<ArticleId, ArticleId>> expected;
  for (const auto& p : all) {
    double s = 0.0;
    for (std::size_t k = 0; k < 128; ++k) s += static_cast<double>(values[p.a * 128 + k]) * values[p.b * 128 + k];
    if (s > 0.9) expected.insert({p.a, p.b});
  }
  std::set<std::pair<ArticleId, ArticleId>> got;
  for (const auto& e : r.edges) got.insert({e.a, e.b});
  EXPECT_EQ(got, expected);
  EXPECT_EQ(got.size(), 10u * 190u);
}

TEST(Score, PureFilterMonotoneAndThreadInvariant) {
  std::mt19937_64 rng(31);
  const std::size_t n = 300;
  auto values = random_rows(rng, n, 8);
  const EmbeddingMatrix m(8, iota_ids(n), values);
  std::vector<CandidatePair> pairs;
  for (ArticleId a = 0; a < n; ++a)
    for (ArticleId b = a + 1; b < n; b += 3) pairs.push_back({a, b});
  std::set<std::pair<ArticleId, ArticleId>> input;
  for (const auto& p : pairs) input.insert({p.a, p.b});

  std::optional<std::size_t> prev;
  for (double th : {0.3, 0.5, 0.7, 0.9, 0.95}) {
    const auto r = score_candidates(pairs, m, th, 1);
    for (const auto& e : r.edges) {
      EXPECT_TRUE(input.contains({e.a, e.b}));
      EXPECT_GT(e.score, th);
    }
    if (prev) {
      EXPECT_LE(r.edges.size(), *prev);
    }
    prev = r.edges.size();
    EXPECT_EQ(score_candidates(pairs, m, th, 4).edges, r.edges);
  }
}

TEST(Edges, BinaryRoundTrip) {
  const std::vector<SimilarityEdge> edges{{1, 2, 0.95f}, {3, 9, 1.0f}};
  std::stringstream s;
  write_edges_bin(s, edges);
  EXPECT_EQ(s.str().size(), 4u + 20u * edges.size());
  EXPECT_EQ(read_edges_bin(s), edges);
}

TEST(MockEmbed, DeterministicUnitAndSelfCosineOne) {
  const auto a = mock_embed("Title", "some words of text here", 64, 7);
  EXPECT_EQ(a, mock_embed("Title", "some words of text here", 64, 7));
  EXPECT_NE(a, mock_embed("Title", "some words of text here", 64, 8));
  EXPECT_NEAR(dot(a, a), 1.0, 1e-6);
  EXPECT_NEAR(cosine(a, a), 1.0, 1e-12);
  EXPECT_THROW(mock_embed("t", "x", 4, 0), ValidationError);
}

TEST(MockEmbed, UsesHeadTailWindow) {
  std::string middle_a, middle_b;
  for (int i = 0; i < 500; ++i) {
    middle_a += "a" + std::to_string(i) + " ";
    middle_b += "b" + std::to_string(i) + " ";
  }
  std::string head, tail;
  for (int i = 0; i < 288; ++i) head += "h" + std::to_string(i) + " ";
  for (int i = 0; i < 96; ++i) tail += " t" + std::to_string(i);
  // only words past the 288-word head and before the 96-word tail differ
  EXPECT_EQ(mock_embed("", head + middle_a + tail, 64, 0), mock_embed("", head + middle_b + tail, 64, 0));
  EXPECT_NE(mock_embed("", head + middle_a + tail, 64, 0), mock_embed("", "x " + head + middle_a + tail, 64, 0));
}

TEST(MockEmbed, NearDuplicatesBeatDisjointTexts) {
  std::mt19937_64 rng(1234);
  int wins = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> w(0, 4999);
    std::vector<std::string> a(200);
    for (auto& x : a) x = "v" + std::to_string(w(rng));
    auto b = a;
    for (int k = 0; k < 10; ++k) b[static_cast<std::size_t>(k * 20)] = "z" + std::to_string(w(rng));  // 95% shared
    std::vector<std::string> c(200);
    for (auto& x : c) x = "q" + std::to_string(w(rng));  // disjoint vocabulary
    auto join = [](const std::vector<std::string>& ws) {
      std::string s;
      for (const auto& x : ws) s += x + " ";
      return s;
    };
    const auto ea = mock_embed("", join(a), 256, 0), eb = mock_embed("", join(b), 256, 0),
               ec = mock_embed("", join(c), 256, 0);
    wins += cosine(ea, eb) > cosine(ea, ec);
  }
  EXPECT_GE(wins, 99);
}
