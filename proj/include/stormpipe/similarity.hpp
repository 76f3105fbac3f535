#pragma once

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stormpipe/binary_io.hpp"
#include "stormpipe/corpus.hpp"
#include "stormpipe/entities.hpp"
#include "stormpipe/hash.hpp"
#include "stormpipe/parallel.hpp"

namespace stormpipe {

inline constexpr double kDefaultSimilarityThreshold = 0.9;
/// Rows whose L2 norm is already within this of 1 are stored untouched.
inline constexpr double kUnitNormTolerance = 1e-6;

/// Row-major f32 embeddings, one unit-norm row per article id.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  EmbeddingMatrix(std::size_t dim, std::vector<ArticleId> ids, std::vector<float> values)
      : dim_(dim), ids_(std::move(ids)), values_(std::move(values)) {
    if (dim_ == 0) throw ValidationError("embedding dim must be positive");
    if (values_.size() != ids_.size() * dim_)
      throw ValidationError("embedding payload holds " + std::to_string(values_.size()) + " values, expected " +
                            std::to_string(ids_.size() * dim_));
    row_of_.reserve(ids_.size());
    for (std::size_t r = 0; r < ids_.size(); ++r) {
      if (!row_of_.emplace(ids_[r], r).second)
        throw ValidationError("duplicate embedding id " + std::to_string(ids_[r]));
      normalize_row(r);
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return ids_.size(); }
  const std::vector<ArticleId>& ids() const noexcept { return ids_; }
  const std::vector<float>& values() const noexcept { return values_; }

  std::span<const float> row(std::size_t r) const noexcept { return {values_.data() + r * dim_, dim_}; }

  std::optional<std::size_t> row_of(ArticleId id) const noexcept {
    auto it = row_of_.find(id);
    if (it == row_of_.end()) return std::nullopt;
    return it->second;
  }

 private:
  void normalize_row(std::size_t r) {
    float* x = values_.data() + r * dim_;
    double sq = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) sq += static_cast<double>(x[k]) * x[k];
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw ValidationError("embedding row for id " + std::to_string(ids_[r]) + " has zero or non-finite norm");
    if (std::abs(norm - 1.0) <= kUnitNormTolerance) return;
    for (std::size_t k = 0; k < dim_; ++k) x[k] = static_cast<float>(x[k] / norm);
  }

  std::size_t dim_ = 0;
  std::vector<ArticleId> ids_;
  std::vector<float> values_;
  std::unordered_map<ArticleId, std::size_t> row_of_;
};

inline constexpr char kEmbeddingMagic[5] = "EMB1";

struct RawEmbeddings {
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
  std::vector<float> values;
};

inline void write_emb1(std::ostream& out, std::uint32_t dim, std::span<const float> values) {
  if (dim == 0 || values.size() % dim != 0) throw ValidationError("EMB1 payload is not a whole number of rows");
  binary::put_magic(out, kEmbeddingMagic);
  binary::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(values.size() / dim));
  binary::put_le<std::uint32_t>(out, dim);
  for (float f : values) binary::put_f32(out, f);
}

/// Reads an EMB1 payload without normalizing it.
inline RawEmbeddings read_emb1(std::istream& in) {
  binary::expect_magic(in, kEmbeddingMagic);
  RawEmbeddings raw;
  raw.count = binary::get_le<std::uint32_t>(in, "EMB1 count");
  raw.dim = binary::get_le<std::uint32_t>(in, "EMB1 dim");
  if (raw.dim == 0) throw FormatError("EMB1 dim is zero");
  raw.values.resize(static_cast<std::size_t>(raw.count) * raw.dim);
  for (auto& v : raw.values) v = binary::get_f32(in, "EMB1 row data");
  if (!binary::at_eof(in)) throw FormatError("EMB1 has trailing bytes after " + std::to_string(raw.count) + " rows");
  return raw;
}

inline void write_ids(std::ostream& out, std::span<const ArticleId> ids) {
  for (ArticleId id : ids) out << id << '\n';
}

inline std::vector<ArticleId> read_ids(std::istream& in) {
  std::vector<ArticleId> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ArticleId id = 0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), id);
    if (ec != std::errc{} || p != line.data() + line.size()) throw ParseError(lineno, "bad article id '" + line + "'");
    ids.push_back(id);
  }
  return ids;
}

/// Loads EMB1 + sibling ids file. `expected_dim` of 0 accepts any dim.
inline EmbeddingMatrix load_embeddings(const std::string& emb_path, const std::string& ids_path,
                                       std::uint32_t expected_dim = 0) {
  std::ifstream in(emb_path, std::ios::binary);
  if (!in) throw FormatError("cannot open embeddings " + emb_path);
  RawEmbeddings raw = read_emb1(in);
  if (expected_dim != 0 && raw.dim != expected_dim)
    throw FormatError("embedding dim " + std::to_string(raw.dim) + " != expected " + std::to_string(expected_dim));
  std::ifstream ids_in(ids_path);
  if (!ids_in) throw FormatError("cannot open ids file " + ids_path);
  auto ids = read_ids(ids_in);
  if (ids.size() != raw.count)
    throw FormatError("ids file lists " + std::to_string(ids.size()) + " ids for " + std::to_string(raw.count) + " rows");
  return EmbeddingMatrix(raw.dim, std::move(ids), std::move(raw.values));
}

inline void save_embeddings(const EmbeddingMatrix& m, const std::string& emb_path, const std::string& ids_path) {
  std::ofstream out(emb_path, std::ios::binary);
  write_emb1(out, static_cast<std::uint32_t>(m.dim()), m.values());
  std::ofstream ids_out(ids_path);
  write_ids(ids_out, m.ids());
  if (!out || !ids_out) throw FormatError("failed writing embeddings to " + emb_path);
}

/// Dot product with f64 accumulation.
inline double dot(std::span<const float> u, std::span<const float> v) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += static_cast<double>(u[k]) * static_cast<double>(v[k]);
  return s;
}

inline double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw ValidationError("cosine of vectors with different dims");
  const double nu = std::sqrt(dot(u, u));
  const double nv = std::sqrt(dot(v, v));
  if (!(nu > 0.0) || !(nv > 0.0)) throw ValidationError("cosine of a zero-norm vector");
  return dot(u, v) / (nu * nv);
}

struct SimilarityEdge {
  ArticleId a = 0;
  ArticleId b = 0;
  double score = 0.0;

  bool operator==(const SimilarityEdge&) const = default;
};

struct ScoreResult {
  std::vector<SimilarityEdge> edges;
  /// Articles referenced by a candidate but absent from the embeddings.
  std::vector<ArticleId> missing_articles;
  std::size_t skipped_pairs = 0;
  std::size_t scored_pairs = 0;
};

/// Keeps the candidate pairs whose embedding dot product is strictly above
/// `threshold`. Output keeps input order (ascending (a, b) for canonical input).
inline ScoreResult score_candidates(std::span<const CandidatePair> pairs, const EmbeddingMatrix& emb,
                                    double threshold = kDefaultSimilarityThreshold, unsigned threads = 1) {
  struct Scored {
    std::size_t pair;
    double score;
    bool missing;
  };
  auto scored = parallel_collect<Scored>(pairs.size(), threads, [&](std::size_t i, std::vector<Scored>& out) {
    const auto ra = emb.row_of(pairs[i].a);
    const auto rb = emb.row_of(pairs[i].b);
    if (!ra || !rb) {
      out.push_back({i, 0.0, true});
      return;
    }
    const double s = dot(emb.row(*ra), emb.row(*rb));
    if (s > threshold) out.push_back({i, s, false});
  });
  ScoreResult result;
  for (const auto& s : scored) {
    const auto& p = pairs[s.pair];
    if (s.missing) {
      ++result.skipped_pairs;
      if (!emb.row_of(p.a)) result.missing_articles.push_back(p.a);
      if (!emb.row_of(p.b)) result.missing_articles.push_back(p.b);
    } else {
      result.edges.push_back({p.a, p.b, s.score});
    }
  }
  result.scored_pairs = pairs.size() - result.skipped_pairs;
  std::sort(result.missing_articles.begin(), result.missing_articles.end());
  result.missing_articles.erase(std::unique(result.missing_articles.begin(), result.missing_articles.end()),
                                result.missing_articles.end());
  return result;
}

inline constexpr char kEdgeMagic[5] = "EDG1";

inline void write_edges_bin(std::ostream& out, std::span<const SimilarityEdge> edges) {
  binary::put_magic(out, kEdgeMagic);
  for (const auto& e : edges) {
    binary::put_le<std::uint64_t>(out, e.a);
    binary::put_le<std::uint64_t>(out, e.b);
    binary::put_f32(out, static_cast<float>(e.score));
  }
}

inline std::vector<SimilarityEdge> read_edges_bin(std::istream& in) {
  binary::expect_magic(in, kEdgeMagic);
  std::vector<SimilarityEdge> edges;
  while (!binary::at_eof(in)) {
    SimilarityEdge e;
    e.a = binary::get_le<std::uint64_t>(in, "edge a");
    e.b = binary::get_le<std::uint64_t>(in, "edge b");
    e.score = binary::get_f32(in, "edge score");
    edges.push_back(e);
  }
  return edges;
}

inline void write_edges_jsonl(std::ostream& out, std::span<const SimilarityEdge> edges) {
  for (const auto& e : edges) {
    nlohmann::ordered_json j;
    j["a"] = e.a;
    j["b"] = e.b;
    j["score"] = e.score;
    out << j.dump() << '\n';
  }
}

inline constexpr std::size_t kEmbedHeadWords = 288;
inline constexpr std::size_t kEmbedTailWords = 96;

namespace detail {

inline std::vector<std::string> embed_words(std::string_view title, std::string_view text) {
  std::vector<std::string> words;
  auto scan = [&](std::string_view s) {
    std::string cur;
    for (char ch : s) {
      const auto c = static_cast<unsigned char>(ch);
      if (std::isalnum(c) || c >= 0x80) {
        cur += static_cast<char>(std::tolower(c));
      } else if (!cur.empty()) {
        words.push_back(std::move(cur));
        cur.clear();
      }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
  };
  scan(title);
  scan(text);
  if (words.size() > kEmbedHeadWords + kEmbedTailWords)
    words.erase(words.begin() + kEmbedHeadWords, words.end() - kEmbedTailWords);
  return words;
}

}  // namespace detail

/// Deterministic stand-in for a trained article encoder: signed feature
/// hashing of word unigrams and bigrams over the title-prepended head/tail
/// word window, L2-normalized.
inline std::vector<float> mock_embed(std::string_view title, std::string_view text, std::size_t dim,
                                     std::uint64_t seed) {
  if (dim < 8) throw ValidationError("mock_embed dim must be at least 8");
  const auto words = detail::embed_words(title, text);
  std::vector<double> acc(dim, 0.0);
  const std::uint64_t salt = mix64(seed);
  auto add = [&](std::uint64_t h) {
    h = mix64(h ^ salt);
    acc[h % dim] += (h >> 63) ? -1.0 : 1.0;
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    add(fnv1a(words[i]));
    if (i + 1 < words.size()) add(fnv1a(words[i + 1], fnv1a(" ", fnv1a(words[i]))));
  }
  double sq = 0.0;
  for (double x : acc) sq += x * x;
  std::vector<float> out(dim, 0.0f);
  if (sq == 0.0) {
    out[mix64(salt) % dim] = 1.0f;
    return out;
  }
  const double norm = std::sqrt(sq);
  for (std::size_t k = 0; k < dim; ++k) out[k] = static_cast<float>(acc[k] / norm);
  return out;
}

inline EmbeddingMatrix mock_embed_corpus(const Corpus& corpus, std::size_t dim, std::uint64_t seed,
                                         unsigned threads = 1) {
  const auto& arts = corpus.articles();
  std::vector<float> values(arts.size() * dim);
  std::vector<ArticleId> ids(arts.size());
  parallel_chunks(arts.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ids[i] = arts[i].id;
      auto v = mock_embed(arts[i].title, arts[i].text, dim, seed);
      std::copy(v.begin(), v.end(), values.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
  });
  return EmbeddingMatrix(dim, std::move(ids), std::move(values));
}

}  // namespace stormpipe
