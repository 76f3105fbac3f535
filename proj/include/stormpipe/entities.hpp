#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stormpipe/binary_io.hpp"
#include "stormpipe/corpus.hpp"
#include "stormpipe/parallel.hpp"

namespace stormpipe {

inline constexpr std::size_t kDefaultMaxEntityArticles = 20000;
inline constexpr std::int32_t kDefaultMaxDayGap = 7;
inline constexpr const char* kFallbackEntityType = "FALLBACK";

/// Organization, event, person, work of art, product.
inline std::set<std::string> default_entity_types() {
  return {"ORG", "EVENT", "PERSON", "WORK_OF_ART", "PRODUCT"};
}

struct EntityIndex {
  std::map<std::string, std::vector<ArticleId>> postings;
  /// Entities dropped by the frequency cap, with their article counts, by name.
  std::vector<std::pair<std::string, std::size_t>> excluded;
  std::set<std::string> type_filter;
  std::size_t max_count = kDefaultMaxEntityArticles;

  bool operator==(const EntityIndex&) const = default;
};

/// Inverted entity -> article index over admitted entity types.
///
/// Counts are distinct articles after type filtering. Entities above
/// `max_count` articles go to `excluded`; entities with fewer than two
/// articles are omitted since they cannot link anything.
inline EntityIndex build_index(const Corpus& corpus, const std::set<std::string>& type_filter,
                               std::size_t max_count = kDefaultMaxEntityArticles) {
  std::unordered_map<std::string, std::vector<ArticleId>> raw;
  for (const Article& a : corpus.articles()) {
    for (const Entity& e : a.entity_list()) {
      if (!type_filter.contains(e.type)) continue;
      auto& ids = raw[e.surface];
      // articles() is id-ordered, so a repeat mention can only be at the back
      if (ids.empty() || ids.back() != a.id) ids.push_back(a.id);
    }
  }
  EntityIndex index;
  index.type_filter = type_filter;
  index.max_count = max_count;
  for (auto& [surface, ids] : raw) {
    if (ids.size() > max_count) index.excluded.emplace_back(surface, ids.size());
    else if (ids.size() >= 2) index.postings.emplace(surface, std::move(ids));
  }
  std::sort(index.excluded.begin(), index.excluded.end());
  return index;
}

struct CandidatePair {
  ArticleId a = 0;
  ArticleId b = 0;

  auto operator<=>(const CandidatePair&) const = default;
};

/// Every unordered pair of articles sharing an indexed entity and dated at most
/// `max_day_gap` days apart, once each, ascending by (a, b).
///
/// Work is split over articles; each article enumerates its higher-id
/// neighbours through date-sorted copies of its posting lists, so only one
/// article's neighbour set is live per worker.
inline std::vector<CandidatePair> generate_candidates(const EntityIndex& index, const Corpus& corpus,
                                                      std::int32_t max_day_gap = kDefaultMaxDayGap,
                                                      unsigned threads = 1) {
  struct Dated {
    std::int32_t day;
    ArticleId id;
    auto operator<=>(const Dated&) const = default;
  };
  const auto& arts = corpus.articles();
  std::vector<std::vector<Dated>> by_date;
  by_date.reserve(index.postings.size());
  std::vector<std::vector<std::uint32_t>> article_postings(arts.size());
  for (const auto& [surface, ids] : index.postings) {
    const auto p = static_cast<std::uint32_t>(by_date.size());
    auto& list = by_date.emplace_back();
    list.reserve(ids.size());
    for (ArticleId id : ids) {
      auto pos = corpus.index_of(id);
      if (!pos) throw ValidationError("index references article " + std::to_string(id) + " absent from corpus");
      list.push_back({arts[*pos].date.serial(), id});
      article_postings[*pos].push_back(p);
    }
    std::sort(list.begin(), list.end());
  }

  return parallel_collect<CandidatePair>(
      arts.size(), threads, [&](std::size_t i, std::vector<CandidatePair>& out) {
        const Article& a = arts[i];
        const std::int32_t d = a.date.serial();
        std::vector<ArticleId> nbrs;
        for (std::uint32_t p : article_postings[i]) {
          const auto& list = by_date[p];
          auto lo = std::lower_bound(list.begin(), list.end(), Dated{d - max_day_gap, 0});
          for (auto it = lo; it != list.end() && it->day <= d + max_day_gap; ++it)
            if (it->id > a.id) nbrs.push_back(it->id);
        }
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        for (ArticleId b : nbrs) out.push_back({a.id, b});
      });
}

/// Capitalized-run entity extractor for corpora without NER output.
///
/// A run is a maximal sequence of consecutive tokens whose first character is
/// an uppercase ASCII letter; only runs of two or more tokens are returned.
/// A lone sentence-initial capital is therefore never an entity, while a run
/// that continues past it keeps it. Punctuation ends a run, and . ! ? also
/// mark the next token as sentence-initial. Results are unique surfaces in
/// first-occurrence order.
inline std::vector<Entity> extract_entities_fallback(std::string_view text) {
  std::vector<Entity> out;
  std::set<std::string, std::less<>> seen;
  std::vector<std::string_view> run;

  auto flush = [&] {
    if (run.size() >= 2) {
      std::string surface;
      for (std::size_t k = 0; k < run.size(); ++k) {
        if (k) surface += ' ';
        surface += run[k];
      }
      if (seen.insert(surface).second) out.push_back({surface, kFallbackEntityType});
    }
    run.clear();
  };
  auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };

  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    if (end == pos) break;
    std::string_view raw = text.substr(pos, end - pos);
    pos = end;

    std::size_t b = 0, e = raw.size();
    while (b < e && !alnum(raw[b])) ++b;
    while (e > b && !alnum(raw[e - 1])) --e;
    const std::string_view core = raw.substr(b, e - b);
    const std::string_view trailing = raw.substr(e);

    if (b > 0) flush();  // leading punctuation such as an opening quote
    if (!core.empty() && std::isupper(static_cast<unsigned char>(core.front()))) {
      run.push_back(core);
    } else {
      flush();
    }
    if (!trailing.empty()) flush();
  }
  flush();
  return out;
}

inline constexpr char kCandidateMagic[5] = "CND1";

inline void write_candidates_bin(std::ostream& out, std::span<const CandidatePair> pairs) {
  binary::put_magic(out, kCandidateMagic);
  for (const auto& p : pairs) {
    binary::put_le<std::uint64_t>(out, p.a);
    binary::put_le<std::uint64_t>(out, p.b);
  }
}

inline std::vector<CandidatePair> read_candidates_bin(std::istream& in) {
  binary::expect_magic(in, kCandidateMagic);
  std::vector<CandidatePair> pairs;
  while (!binary::at_eof(in)) {
    CandidatePair p;
    p.a = binary::get_le<std::uint64_t>(in, "candidate a");
    p.b = binary::get_le<std::uint64_t>(in, "candidate b");
    if (!(p.a < p.b)) throw FormatError("candidate pair not canonical (a < b)");
    pairs.push_back(p);
  }
  return pairs;
}

inline void write_candidates_jsonl(std::ostream& out, std::span<const CandidatePair> pairs) {
  for (const auto& p : pairs) out << "{\"a\":" << p.a << ",\"b\":" << p.b << "}\n";
}

inline nlohmann::ordered_json to_json(const EntityIndex& index) {
  nlohmann::ordered_json j;
  j["max_count"] = index.max_count;
  j["type_filter"] = index.type_filter;
  auto excluded = nlohmann::ordered_json::array();
  for (const auto& [e, n] : index.excluded) excluded.push_back({e, n});
  j["excluded"] = std::move(excluded);
  nlohmann::ordered_json postings = nlohmann::ordered_json::object();
  for (const auto& [e, ids] : index.postings) postings[e] = ids;
  j["postings"] = std::move(postings);
  return j;
}

inline EntityIndex entity_index_from_json(const nlohmann::json& j) {
  EntityIndex index;
  index.max_count = j.at("max_count").get<std::size_t>();
  index.type_filter = j.at("type_filter").get<std::set<std::string>>();
  for (const auto& e : j.at("excluded")) index.excluded.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::size_t>());
  for (const auto& [e, ids] : j.at("postings").items()) index.postings.emplace(e, ids.get<std::vector<ArticleId>>());
  return index;
}

}  // namespace stormpipe
