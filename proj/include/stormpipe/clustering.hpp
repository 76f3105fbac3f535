#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "stormpipe/corpus.hpp"

namespace stormpipe {

/// Union-find with path halving and union by size.
class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) noexcept {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  /// Returns false when x and y were already joined.
  bool unite(std::size_t x, std::size_t y) noexcept {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    if (size_[x] < size_[y]) std::swap(x, y);
    parent_[y] = x;
    size_[x] += size_[y];
    return true;
  }

  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// Component label per article id. Labels run 0..count-1 in order of each
/// component's smallest member id, so they do not depend on edge order.
struct ComponentAssignment {
  std::vector<ArticleId> ids;           // ascending, unique
  std::vector<std::uint32_t> component;  // parallel to ids
  std::size_t count = 0;

  std::uint32_t of(ArticleId id) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) throw ValidationError("article " + std::to_string(id) + " outside universe");
    return component[static_cast<std::size_t>(it - ids.begin())];
  }

  /// Members of each component, ascending.
  std::vector<std::vector<ArticleId>> groups() const {
    std::vector<std::vector<ArticleId>> out(count);
    for (std::size_t i = 0; i < ids.size(); ++i) out[component[i]].push_back(ids[i]);
    return out;
  }

  bool operator==(const ComponentAssignment&) const = default;
};

/// Connected components of the graph whose edges are any range of objects
/// with `.a` and `.b` article ids.
template <typename EdgeRange>
ComponentAssignment connected_components(const EdgeRange& edges, std::vector<ArticleId> universe) {
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
  auto pos = [&](ArticleId id) {
    auto it = std::lower_bound(universe.begin(), universe.end(), id);
    if (it == universe.end() || *it != id)
      throw ValidationError("edge endpoint " + std::to_string(id) + " outside article universe");
    return static_cast<std::size_t>(it - universe.begin());
  };
  DisjointSet dsu(universe.size());
  for (const auto& e : edges) dsu.unite(pos(e.a), pos(e.b));

  ComponentAssignment out;
  out.component.resize(universe.size());
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> label(universe.size(), kUnset);
  for (std::size_t i = 0; i < universe.size(); ++i) {
    auto& l = label[dsu.find(i)];
    if (l == kUnset) l = static_cast<std::uint32_t>(out.count++);
    out.component[i] = l;
  }
  out.ids = std::move(universe);
  return out;
}

struct StoryCluster {
  std::uint32_t cluster_id = 0;
  std::vector<ArticleId> article_ids;  // ascending
  Day first_day;
  Day last_day;

  std::size_t size() const noexcept { return article_ids.size(); }
  bool operator==(const StoryCluster&) const = default;
};

inline constexpr std::size_t kDefaultMinClusterSize = 2;

/// Materializes components of at least `min_size` articles with their date
/// spans. Kept clusters are renumbered 0.. in ascending smallest-member order.
inline std::vector<StoryCluster> build_story_clusters(const ComponentAssignment& assignment, const Corpus& corpus,
                                                      std::size_t min_size = kDefaultMinClusterSize) {
  std::vector<StoryCluster> out;
  for (auto& members : assignment.groups()) {
    if (members.size() < min_size) continue;
    StoryCluster c;
    c.cluster_id = static_cast<std::uint32_t>(out.size());
    c.first_day = c.last_day = corpus.at(members.front()).date;
    for (ArticleId id : members) {
      const Day d = corpus.at(id).date;
      c.first_day = std::min(c.first_day, d);
      c.last_day = std::max(c.last_day, d);
    }
    c.article_ids = std::move(members);
    out.push_back(std::move(c));
  }
  return out;
}

inline void write_clusters_jsonl(std::ostream& out, std::span<const StoryCluster> clusters) {
  for (const auto& c : clusters) {
    nlohmann::ordered_json j;
    j["cluster_id"] = c.cluster_id;
    j["articles"] = c.article_ids;
    j["first_day"] = c.first_day.str();
    j["last_day"] = c.last_day.str();
    out << j.dump() << '\n';
  }
}

inline std::vector<StoryCluster> read_clusters_jsonl(std::istream& in) {
  std::vector<StoryCluster> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      StoryCluster c;
      c.cluster_id = j.at("cluster_id").get<std::uint32_t>();
      c.article_ids = j.at("articles").get<std::vector<ArticleId>>();
      c.first_day = Day::parse(j.at("first_day").get<std::string>());
      c.last_day = Day::parse(j.at("last_day").get<std::string>());
      out.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

}  // namespace stormpipe
