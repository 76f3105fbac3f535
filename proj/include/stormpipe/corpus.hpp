#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stormpipe/date.hpp"
#include "stormpipe/error.hpp"

namespace stormpipe {

using ArticleId = std::uint64_t;

struct Entity {
  std::string surface;
  std::string type;

  bool operator==(const Entity&) const = default;
};

struct Article {
  ArticleId id = 0;
  std::string outlet;
  Day date;
  std::string title;
  std::string text;
  // Absent and empty are distinct so export reproduces the input record.
  std::optional<std::vector<Entity>> entities;
  std::optional<std::vector<double>> topics;

  std::span<const Entity> entity_list() const noexcept {
    return entities ? std::span<const Entity>(*entities) : std::span<const Entity>{};
  }

  bool operator==(const Article&) const = default;
};

enum class Scope { national, local };
enum class Reliability { reliable, mixed, unreliable, unrated };

inline const char* to_string(Scope s) { return s == Scope::national ? "national" : "local"; }

inline const char* to_string(Reliability r) {
  switch (r) {
    case Reliability::reliable: return "reliable";
    case Reliability::mixed: return "mixed";
    case Reliability::unreliable: return "unreliable";
    case Reliability::unrated: return "unrated";
  }
  return "unrated";
}

inline Reliability parse_reliability(std::string_view s) {
  if (s == "reliable") return Reliability::reliable;
  if (s == "mixed") return Reliability::mixed;
  if (s == "unreliable") return Reliability::unreliable;
  if (s == "unrated") return Reliability::unrated;
  throw ValidationError("unknown reliability '" + std::string(s) + "'");
}

struct OutletProfile {
  std::string name;
  Scope scope = Scope::national;
  std::optional<std::string> state;
  Reliability reliability = Reliability::unrated;

  bool operator==(const OutletProfile&) const = default;
};

inline constexpr double kTopicSumTolerance = 1e-6;

/// Throws when a topic distribution is negative somewhere or does not sum to 1.
inline void validate_topic_dist(std::span<const double> dist) {
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("topic distribution has a negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kTopicSumTolerance)
    throw ValidationError("topic distribution sums to " + std::to_string(sum));
}

/// Immutable, id-ordered article collection plus outlet metadata.
class Corpus {
 public:
  Corpus() = default;

  /// Validates every invariant; articles need not arrive sorted.
  Corpus(std::vector<Article> articles, std::map<std::string, OutletProfile> outlets, DateRange range)
      : articles_(std::move(articles)), outlets_(std::move(outlets)), range_(range) {
    std::sort(articles_.begin(), articles_.end(),
              [](const Article& a, const Article& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < articles_.size(); ++i) {
      const Article& a = articles_[i];
      if (i > 0 && articles_[i - 1].id == a.id)
        throw ValidationError("duplicate article id " + std::to_string(a.id));
      if (!range_.contains(a.date))
        throw ValidationError("article " + std::to_string(a.id) + " dated " + a.date.str() +
                              " outside corpus range");
      if (!outlets_.contains(a.outlet))
        throw ValidationError("article " + std::to_string(a.id) + " has unknown outlet '" + a.outlet + "'");
      if (a.topics) validate_topic_dist(*a.topics);
    }
    for (const auto& [name, p] : outlets_)
      if (p.scope == Scope::national && p.state)
        throw ValidationError("national outlet '" + name + "' carries a state");
  }

  const std::vector<Article>& articles() const noexcept { return articles_; }
  const std::map<std::string, OutletProfile>& outlets() const noexcept { return outlets_; }
  const DateRange& date_range() const noexcept { return range_; }
  std::size_t size() const noexcept { return articles_.size(); }
  bool empty() const noexcept { return articles_.empty(); }

  /// Position of `id` in articles(), if present.
  std::optional<std::size_t> index_of(ArticleId id) const noexcept {
    auto it = std::lower_bound(articles_.begin(), articles_.end(), id,
                               [](const Article& a, ArticleId v) { return a.id < v; });
    if (it == articles_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - articles_.begin());
  }

  const Article* find(ArticleId id) const noexcept {
    auto idx = index_of(id);
    return idx ? &articles_[*idx] : nullptr;
  }

  const Article& at(ArticleId id) const {
    if (const Article* a = find(id)) return *a;
    throw ValidationError("article id " + std::to_string(id) + " not in corpus");
  }

  const OutletProfile& outlet(const std::string& name) const {
    auto it = outlets_.find(name);
    if (it == outlets_.end()) throw ValidationError("unknown outlet '" + name + "'");
    return it->second;
  }

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<Article> articles_;
  std::map<std::string, OutletProfile> outlets_;
  DateRange range_;
};

struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

struct IngestResult {
  Corpus corpus;
  std::vector<Rejection> rejected;
};

struct IngestOptions {
  /// When unset the corpus range is the min..max article date.
  std::optional<DateRange> declared_range;
};

namespace detail {

template <typename T>
T required(const nlohmann::json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(line, std::string("field '") + key + "' has the wrong type");
  }
}

inline bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace detail

inline std::map<std::string, OutletProfile> read_outlets_jsonl(std::istream& in) {
  std::map<std::string, OutletProfile> outlets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
    if (!j.is_object()) throw ParseError(lineno, "record is not an object");
    OutletProfile p;
    p.name = detail::required<std::string>(j, "name", lineno);
    const auto scope = detail::required<std::string>(j, "scope", lineno);
    if (scope == "national") p.scope = Scope::national;
    else if (scope == "local") p.scope = Scope::local;
    else throw ParseError(lineno, "scope must be national or local");
    if (j.contains("state") && !j["state"].is_null()) {
      p.state = detail::required<std::string>(j, "state", lineno);
      if (p.scope == Scope::national) throw ParseError(lineno, "national outlet carries a state");
      if (p.state->size() != 2) throw ParseError(lineno, "state must be a 2-letter code");
    }
    try {
      p.reliability = parse_reliability(detail::required<std::string>(j, "reliability", lineno));
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(lineno, e.what());
    }
    if (!outlets.emplace(p.name, p).second) throw ParseError(lineno, "duplicate outlet '" + p.name + "'");
  }
  return outlets;
}

inline IngestResult ingest(std::istream& articles_in, std::map<std::string, OutletProfile> outlets,
                           const IngestOptions& options = {}) {
  std::vector<Article> articles;
  std::vector<Rejection> rejected;
  std::unordered_map<ArticleId, std::size_t> id_line;
  std::string line;
  std::size_t lineno = 0;
  std::size_t ordinal = 0;
  while (std::getline(articles_in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    const std::size_t record = ordinal++;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
    if (!j.is_object()) throw ParseError(lineno, "record is not an object");

    Article a;
    if (j.contains("id")) {
      const auto& v = j["id"];
      if (!v.is_number_unsigned()) throw ParseError(lineno, "id must be a non-negative integer");
      a.id = v.get<ArticleId>();
    } else {
      a.id = record;
    }
    a.outlet = detail::required<std::string>(j, "outlet", lineno);
    try {
      a.date = Day::parse(detail::required<std::string>(j, "date", lineno));
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(lineno, e.what());
    }
    a.title = detail::required<std::string>(j, "title", lineno);
    a.text = detail::required<std::string>(j, "text", lineno);
    if (j.contains("entities")) {
      const auto& ents = j["entities"];
      if (!ents.is_array()) throw ParseError(lineno, "entities must be an array");
      std::vector<Entity> list;
      for (const auto& e : ents) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
          throw ParseError(lineno, "entity must be a [surface, type] pair of strings");
        list.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
      }
      a.entities = std::move(list);
    }
    if (j.contains("topics")) {
      const auto& t = j["topics"];
      if (!t.is_array()) throw ParseError(lineno, "topics must be an array");
      std::vector<double> dist;
      for (const auto& p : t) {
        if (!p.is_number()) throw ParseError(lineno, "topics must be numeric");
        dist.push_back(p.get<double>());
      }
      try {
        validate_topic_dist(dist);
      } catch (const ValidationError& e) {
        throw ParseError(lineno, e.what());
      }
      a.topics = std::move(dist);
    }
    if (options.declared_range && !options.declared_range->contains(a.date))
      throw ParseError(lineno, "date " + a.date.str() + " outside declared range");

    if (!outlets.contains(a.outlet)) {
      rejected.push_back({lineno, "unknown outlet '" + a.outlet + "'"});
      continue;
    }
    if (auto [it, fresh] = id_line.emplace(a.id, lineno); !fresh)
      throw ParseError(lineno, "duplicate id " + std::to_string(a.id) + " (first seen on line " +
                                   std::to_string(it->second) + ")");
    articles.push_back(std::move(a));
  }

  DateRange range{};
  if (options.declared_range) {
    range = *options.declared_range;
  } else if (!articles.empty()) {
    auto [lo, hi] = std::minmax_element(articles.begin(), articles.end(),
                                        [](const Article& x, const Article& y) { return x.date < y.date; });
    range = {lo->date, hi->date};
  }
  return {Corpus(std::move(articles), std::move(outlets), range), std::move(rejected)};
}

inline IngestResult ingest(const std::string& articles_path, const std::string& outlets_path,
                           const IngestOptions& options = {}) {
  std::ifstream outlets_in(outlets_path);
  if (!outlets_in) throw ValidationError("cannot open outlets file " + outlets_path);
  std::ifstream articles_in(articles_path);
  if (!articles_in) throw ValidationError("cannot open articles file " + articles_path);
  return ingest(articles_in, read_outlets_jsonl(outlets_in), options);
}

inline nlohmann::ordered_json to_json(const Article& a) {
  nlohmann::ordered_json j;
  j["id"] = a.id;
  j["outlet"] = a.outlet;
  j["date"] = a.date.str();
  j["title"] = a.title;
  j["text"] = a.text;
  if (a.entities) {
    auto ents = nlohmann::ordered_json::array();
    for (const auto& e : *a.entities) ents.push_back({e.surface, e.type});
    j["entities"] = std::move(ents);
  }
  if (a.topics) j["topics"] = *a.topics;
  return j;
}

inline nlohmann::ordered_json to_json(const OutletProfile& p) {
  nlohmann::ordered_json j;
  j["name"] = p.name;
  j["scope"] = to_string(p.scope);
  if (p.state) j["state"] = *p.state;
  j["reliability"] = to_string(p.reliability);
  return j;
}

inline void write_articles_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& a : corpus.articles()) out << to_json(a).dump() << '\n';
}

inline void write_outlets_jsonl(const std::map<std::string, OutletProfile>& outlets, std::ostream& out) {
  for (const auto& [_, p] : outlets) out << to_json(p).dump() << '\n';
}

/// At most one article per (outlet, exact title): the earliest, then lowest id.
inline Corpus dedup(const Corpus& corpus) {
  std::map<std::pair<std::string_view, std::string_view>, std::size_t> keep;
  const auto& arts = corpus.articles();
  for (std::size_t i = 0; i < arts.size(); ++i) {
    auto [it, fresh] = keep.try_emplace({arts[i].outlet, arts[i].title}, i);
    if (fresh) continue;
    const Article& cur = arts[it->second];
    if (std::tie(arts[i].date, arts[i].id) < std::tie(cur.date, cur.id)) it->second = i;
  }
  std::vector<bool> survive(arts.size(), false);
  for (const auto& [_, i] : keep) survive[i] = true;
  std::vector<Article> out;
  out.reserve(keep.size());
  for (std::size_t i = 0; i < arts.size(); ++i)
    if (survive[i]) out.push_back(arts[i]);
  return Corpus(std::move(out), corpus.outlets(), corpus.date_range());
}

/// Keeps articles dated within [start, end]; the result's range becomes [start, end].
inline Corpus truncate_range(const Corpus& corpus, Day start, Day end) {
  if (end < start) throw ValidationError("inverted date range " + start.str() + " > " + end.str());
  std::vector<Article> out;
  for (const auto& a : corpus.articles())
    if (start <= a.date && a.date <= end) out.push_back(a);
  return Corpus(std::move(out), corpus.outlets(), DateRange{start, end});
}

}  // namespace stormpipe
