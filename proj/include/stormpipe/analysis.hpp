#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stormpipe/corpus.hpp"
#include "stormpipe/hash.hpp"
#include "stormpipe/storms.hpp"

namespace stormpipe {

inline constexpr std::size_t kDefaultTopicCount = 30;

struct TopicModelMeta {
  std::size_t k = kDefaultTopicCount;
  std::vector<std::string> labels;  // empty or k names

  void validate() const {
    if (k < 2) throw ValidationError("topic count must be at least 2");
    if (!labels.empty() && labels.size() != k) throw ValidationError("topic labels must number k");
  }
};

/// Raised when an analysis needs topic distributions that some articles lack.
class MissingTopicsError : public ValidationError {
 public:
  explicit MissingTopicsError(std::vector<ArticleId> ids)
      : ValidationError(describe(ids)), ids_(std::move(ids)) {}
  const std::vector<ArticleId>& ids() const noexcept { return ids_; }

 private:
  static std::string describe(const std::vector<ArticleId>& ids) {
    std::string s = std::to_string(ids.size()) + " article(s) lack a topic distribution:";
    for (std::size_t i = 0; i < std::min<std::size_t>(ids.size(), 10); ++i) s += " " + std::to_string(ids[i]);
    if (ids.size() > 10) s += " ...";
    return s;
  }
  std::vector<ArticleId> ids_;
};

/// Argmax with ties to the lowest index.
inline std::size_t argmax_lowest(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

inline std::size_t assign_article_topic(std::span<const double> dist, std::size_t k) {
  if (dist.size() != k)
    throw ValidationError("topic distribution has length " + std::to_string(dist.size()) + ", expected " +
                          std::to_string(k));
  return argmax_lowest(dist);
}

inline std::size_t assign_article_topic(const Article& a, std::size_t k) {
  if (!a.topics) throw MissingTopicsError({a.id});
  return assign_article_topic(*a.topics, k);
}

/// Argmax of the element-wise sum of the members' topic distributions.
inline std::size_t storm_topic(std::span<const ArticleId> ids, const Corpus& corpus, std::size_t k) {
  std::vector<double> sum(k, 0.0);
  std::vector<ArticleId> missing;
  for (ArticleId id : ids) {
    const Article& a = corpus.at(id);
    if (!a.topics) {
      missing.push_back(id);
      continue;
    }
    if (a.topics->size() != k) throw ValidationError("article " + std::to_string(id) + " topic length mismatch");
    for (std::size_t t = 0; t < k; ++t) sum[t] += (*a.topics)[t];
  }
  if (!missing.empty()) throw MissingTopicsError(std::move(missing));
  if (ids.empty()) throw ValidationError("storm_topic of an empty article set");
  return argmax_lowest(sum);
}

/// Percentage of articles per topic.
inline std::vector<double> topic_percentages(std::span<const std::size_t> topics, std::size_t k) {
  if (topics.empty()) throw ValidationError("topic percentages of an empty article set");
  std::vector<double> pct(k, 0.0);
  for (std::size_t t : topics) {
    if (t >= k) throw ValidationError("topic index out of range");
    pct[t] += 1.0;
  }
  for (auto& p : pct) p *= 100.0 / static_cast<double>(topics.size());
  return pct;
}

/// Per-topic storm minus non-storm share, in percentage points.
inline std::vector<double> topic_skew(std::span<const std::size_t> storm_topics,
                                      std::span<const std::size_t> nonstorm_topics, std::size_t k) {
  auto s = topic_percentages(storm_topics, k);
  const auto n = topic_percentages(nonstorm_topics, k);
  for (std::size_t t = 0; t < k; ++t) s[t] -= n[t];
  return s;
}

inline std::vector<std::size_t> assign_topics(std::span<const ArticleId> ids, const Corpus& corpus, std::size_t k) {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  std::vector<ArticleId> missing;
  for (ArticleId id : ids) {
    const Article& a = corpus.at(id);
    if (!a.topics) missing.push_back(id);
    else out.push_back(assign_article_topic(*a.topics, k));
  }
  if (!missing.empty()) throw MissingTopicsError(std::move(missing));
  return out;
}

inline std::vector<double> topic_skew(std::span<const ArticleId> storm_articles,
                                      std::span<const ArticleId> nonstorm_articles, const Corpus& corpus,
                                      std::size_t k) {
  const auto s = assign_topics(storm_articles, corpus, k);
  const auto n = assign_topics(nonstorm_articles, corpus, k);
  return topic_skew(s, n, k);
}

/// Article positions grouped by day over the corpus range.
class DayIndex {
 public:
  explicit DayIndex(const Corpus& corpus) : range_(corpus.date_range()) {
    by_day_.resize(static_cast<std::size_t>(std::max(range_.days(), 0)));
    const auto& arts = corpus.articles();
    for (std::size_t i = 0; i < arts.size(); ++i) by_day_[static_cast<std::size_t>(arts[i].date - range_.start)].push_back(i);
  }

  bool covers(Day d) const noexcept { return range_.contains(d); }

  std::span<const std::size_t> on(Day d) const noexcept {
    if (!covers(d)) return {};
    return by_day_[static_cast<std::size_t>(d - range_.start)];
  }

 private:
  DateRange range_;
  std::vector<std::vector<std::size_t>> by_day_;
};

inline constexpr std::int32_t kDefaultGatekeepingWindow = 14;

/// One point per offset -window..+window; nullopt where no article qualifies.
using GatekeepingSeries = std::vector<std::optional<double>>;

/// Share (in percent) of the storm's topic among articles that the storm's own
/// outlets published on each day around its start.
inline GatekeepingSeries gatekeeping_series(const StormRecord& storm, const Corpus& corpus, const DayIndex& days,
                                            std::size_t k, std::int32_t window = kDefaultGatekeepingWindow,
                                            bool exclude_storm_articles = false) {
  const std::size_t topic = storm_topic(storm.article_ids, corpus, k);
  std::set<std::string> outlets;
  for (ArticleId id : storm.article_ids) outlets.insert(corpus.at(id).outlet);
  const std::unordered_set<ArticleId> members(storm.article_ids.begin(), storm.article_ids.end());

  GatekeepingSeries series;
  series.reserve(static_cast<std::size_t>(2 * window + 1));
  std::vector<ArticleId> missing;
  for (std::int32_t d = -window; d <= window; ++d) {
    const Day day = storm.start_day + d;
    std::size_t total = 0, matching = 0;
    for (std::size_t pos : days.on(day)) {
      const Article& a = corpus.articles()[pos];
      if (!outlets.contains(a.outlet)) continue;
      if (exclude_storm_articles && members.contains(a.id)) continue;
      if (!a.topics) {
        missing.push_back(a.id);
        continue;
      }
      ++total;
      if (assign_article_topic(*a.topics, k) == topic) ++matching;
    }
    if (total == 0) series.emplace_back(std::nullopt);
    else series.emplace_back(100.0 * static_cast<double>(matching) / static_cast<double>(total));
  }
  if (!missing.empty()) throw MissingTopicsError(std::move(missing));
  return series;
}

inline GatekeepingSeries gatekeeping_series(const StormRecord& storm, const Corpus& corpus, std::size_t k,
                                            std::int32_t window = kDefaultGatekeepingWindow,
                                            bool exclude_storm_articles = false) {
  return gatekeeping_series(storm, corpus, DayIndex(corpus), k, window, exclude_storm_articles);
}

/// Per-offset mean over the non-null points.
inline GatekeepingSeries average_gatekeeping_series(std::span<const GatekeepingSeries> series) {
  if (series.empty()) throw ValidationError("averaging needs at least one series");
  const std::size_t len = series.front().size();
  GatekeepingSeries out(len);
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : series) {
      if (s.size() != len) throw ValidationError("gatekeeping series lengths differ");
      if (s[i]) {
        sum += *s[i];
        ++n;
      }
    }
    if (n) out[i] = sum / static_cast<double>(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Influence graphs

enum class NodeKey { outlet, outlet_type };

/// "local" or "national-<reliability>".
inline std::string outlet_type_label(const OutletProfile& p) {
  if (p.scope == Scope::local) return "local";
  return std::string("national-") + to_string(p.reliability);
}

struct InfluenceGraph {
  std::vector<std::string> nodes;  // sorted
  std::map<std::pair<std::string, std::string>, std::int64_t> edges;
  std::map<std::string, std::int64_t> net;

  std::int64_t weight(const std::string& src, const std::string& dst) const {
    auto it = edges.find({src, dst});
    return it == edges.end() ? 0 : it->second;
  }

  bool operator==(const InfluenceGraph&) const = default;
};

/// Out-weight minus in-weight for every node.
inline void recompute_net(InfluenceGraph& g) {
  g.net.clear();
  for (const auto& n : g.nodes) g.net[n] = 0;
  for (const auto& [e, w] : g.edges) {
    g.net[e.first] += w;
    g.net[e.second] -= w;
  }
}

inline constexpr std::int32_t kDefaultLookbackDays = 2;

/// Lead-lag credit graph: for each storm and each outlet j first covering it
/// on day d, every other outlet with a member article dated in
/// [d - lookback, d - 1] earns one unit of credit on edge (i -> j). Each
/// ordered node pair is credited at most once per storm.
inline InfluenceGraph build_influence_graph(std::span<const StormRecord> storms, const Corpus& corpus,
                                            std::int32_t lookback_days = kDefaultLookbackDays,
                                            NodeKey key = NodeKey::outlet) {
  auto node_of = [&](const std::string& outlet) {
    return key == NodeKey::outlet ? outlet : outlet_type_label(corpus.outlet(outlet));
  };
  InfluenceGraph g;
  std::set<std::string> nodes;
  for (const auto& storm : storms) {
    std::map<std::string, std::set<Day>> dates;
    for (ArticleId id : storm.article_ids) {
      const Article& a = corpus.at(id);
      dates[a.outlet].insert(a.date);
    }
    std::set<std::pair<std::string, std::string>> credited;
    for (const auto& [j, jdates] : dates) {
      nodes.insert(node_of(j));
      const Day first = *jdates.begin();
      for (const auto& [i, idates] : dates) {
        if (i == j) continue;
        auto it = idates.lower_bound(first - lookback_days);
        if (it == idates.end() || *it >= first) continue;
        auto src = node_of(i), dst = node_of(j);
        if (src != dst) credited.emplace(std::move(src), std::move(dst));
      }
    }
    for (const auto& e : credited) ++g.edges[e];
  }
  g.nodes.assign(nodes.begin(), nodes.end());
  recompute_net(g);
  return g;
}

struct SubgraphResult {
  InfluenceGraph graph;
  bool clamped = false;  // fewer qualifying outlets than requested
};

/// Restricts an outlet-level graph to the `n` qualifying outlets with the most
/// storm-member articles (ties by name) and recomputes net influence.
inline SubgraphResult top_outlets_subgraph(const InfluenceGraph& graph, std::span<const StormRecord> storms,
                                           const Corpus& corpus, std::size_t n,
                                           const std::function<bool(const OutletProfile&)>& filter) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : storms)
    for (ArticleId id : s.article_ids) ++counts[corpus.at(id).outlet];
  const std::set<std::string> in_graph(graph.nodes.begin(), graph.nodes.end());
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (const auto& [outlet, c] : counts)
    if (in_graph.contains(outlet) && filter(corpus.outlet(outlet))) ranked.emplace_back(outlet, c);
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  SubgraphResult out;
  out.clamped = n > ranked.size();
  ranked.resize(std::min(n, ranked.size()));
  std::set<std::string> keep;
  for (const auto& [o, _] : ranked) keep.insert(o);
  out.graph.nodes.assign(keep.begin(), keep.end());
  for (const auto& [e, w] : graph.edges)
    if (keep.contains(e.first) && keep.contains(e.second)) out.graph.edges.emplace(e, w);
  recompute_net(out.graph);
  return out;
}

inline nlohmann::ordered_json to_json(const InfluenceGraph& g) {
  nlohmann::ordered_json j;
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes) nodes.push_back({{"id", n}, {"net", g.net.at(n)}});
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [e, w] : g.edges) edges.push_back({{"src", e.first}, {"dst", e.second}, {"weight", w}});
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  return j;
}

/// Graphviz digraph; pen width scales with edge weight relative to the max.
inline void write_dot(std::ostream& out, const InfluenceGraph& g, const std::string& name = "influence") {
  std::int64_t max_w = 1;
  for (const auto& [_, w] : g.edges) max_w = std::max(max_w, w);
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') q += '\\';
      q += c;
    }
    return q + "\"";
  };
  out << "digraph " << quote(name) << " {\n";
  for (const auto& n : g.nodes) out << "  " << quote(n) << " [label=" << quote(n + " (" + std::to_string(g.net.at(n)) + ")") << "];\n";
  for (const auto& [e, w] : g.edges) {
    char width[32];
    std::snprintf(width, sizeof width, "%.2f", 0.5 + 4.5 * static_cast<double>(w) / static_cast<double>(max_w));
    out << "  " << quote(e.first) << " -> " << quote(e.second) << " [weight=" << w << ", penwidth=" << width << "];\n";
  }
  out << "}\n";
}

/// Fixture-only topic assigner: each word votes for bucket hash(word) mod k.
/// Not a topic model; it exists so synthetic corpora carry distributions.
inline std::vector<double> keyword_bucket_topics(std::string_view text, std::size_t k, double smoothing = 0.01) {
  std::vector<double> counts(k, smoothing);
  std::string word;
  auto vote = [&] {
    if (!word.empty()) counts[mix64(fnv1a(word)) % k] += 1.0;
    word.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) word += static_cast<char>(std::tolower(c));
    else vote();
  }
  vote();
  double sum = 0.0;
  for (double c : counts) sum += c;
  for (auto& c : counts) c /= sum;
  return counts;
}

}  // namespace stormpipe
