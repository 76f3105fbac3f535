#pragma once

// Small builders shared by the unit and acceptance tests.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "stormpipe/stormpipe.hpp"

namespace stormpipe::testing {

inline constexpr Day kBase = Day::from_ymd(2021, 1, 1);

/// Builds a corpus article by article; dates are day offsets from kBase.
class CorpusBuilder {
 public:
  CorpusBuilder& outlet(const std::string& name, Scope scope = Scope::national,
                        std::optional<std::string> state = std::nullopt,
                        Reliability reliability = Reliability::reliable) {
    outlets_[name] = OutletProfile{name, scope, std::move(state), reliability};
    return *this;
  }

  ArticleId add(const std::string& outlet, std::int32_t day, std::string title = {},
                std::optional<std::vector<Entity>> entities = std::nullopt,
                std::optional<std::vector<double>> topics = std::nullopt) {
    Article a;
    a.id = next_++;
    a.outlet = outlet;
    a.date = kBase + day;
    a.title = title.empty() ? "article " + std::to_string(a.id) : std::move(title);
    a.text = "body " + std::to_string(a.id);
    a.entities = std::move(entities);
    a.topics = std::move(topics);
    last_day_ = std::max(last_day_, day);
    articles_.push_back(std::move(a));
    return articles_.back().id;
  }

  /// `n` filler articles for `outlet` on `day`.
  void fill(const std::string& outlet, std::int32_t day, std::int64_t n,
            std::optional<std::vector<double>> topics = std::nullopt) {
    for (std::int64_t k = 0; k < n; ++k) add(outlet, day, {}, std::nullopt, topics);
  }

  Corpus build(std::optional<std::int32_t> days = std::nullopt) const {
    const std::int32_t span = days ? *days : last_day_ + 1;
    return Corpus(articles_, outlets_, DateRange{kBase, kBase + (span - 1)});
  }

  std::vector<Article>& articles() { return articles_; }

 private:
  std::map<std::string, OutletProfile> outlets_;
  std::vector<Article> articles_;
  ArticleId next_ = 0;
  std::int32_t last_day_ = 0;
};

inline StoryCluster cluster_of(const Corpus& corpus, std::vector<ArticleId> ids, std::uint32_t cluster_id = 0) {
  std::sort(ids.begin(), ids.end());
  StoryCluster c;
  c.cluster_id = cluster_id;
  c.first_day = c.last_day = corpus.at(ids.front()).date;
  for (ArticleId id : ids) {
    c.first_day = std::min(c.first_day, corpus.at(id).date);
    c.last_day = std::max(c.last_day, corpus.at(id).date);
  }
  c.article_ids = std::move(ids);
  return c;
}

struct BoundaryCase {
  std::int32_t duration = 7;
  std::int32_t mode_outlets = 5;
  std::int64_t window_total = 100;  // T per storm-mode outlet
  std::int64_t members = 10;        // S per storm-mode outlet
};

/// A single cluster for storm-criteria boundary checks. Each candidate
/// storm-mode outlet publishes `window_total` articles in one burst on day 0,
/// `members` of them in the cluster; a low-volume wire outlet carries the
/// cluster once a day so its span equals `duration`.
inline std::pair<Corpus, StoryCluster> boundary_fixture(const BoundaryCase& bc) {
  CorpusBuilder b;
  b.outlet("wire", Scope::local, "OH", Reliability::unrated);
  std::vector<ArticleId> members;
  for (std::int32_t o = 0; o < bc.mode_outlets; ++o) {
    const std::string name = "outlet-" + std::to_string(o);
    b.outlet(name);
    for (std::int64_t k = 0; k < bc.window_total; ++k) {
      const auto id = b.add(name, 0);
      if (k < bc.members) members.push_back(id);
    }
  }
  for (std::int32_t d = 0; d < bc.duration; ++d) members.push_back(b.add("wire", d));
  const Corpus corpus = b.build(bc.duration + 3);
  return {corpus, cluster_of(corpus, members)};
}

/// Fresh empty directory under the system temp dir, private to this process.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() /
           ("stormpipe-test-" + std::to_string(::getpid()) + "-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Removes every directory temp_dir created in this process.
inline void remove_temp_dirs() {
  const std::string prefix = "stormpipe-test-" + std::to_string(::getpid()) + "-";
  for (const auto& e : std::filesystem::directory_iterator(std::filesystem::temp_directory_path()))
    if (e.path().filename().string().starts_with(prefix)) std::filesystem::remove_all(e.path());
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<double> one_hot(std::size_t k, std::size_t hot) {
  std::vector<double> v(k, 0.0);
  v[hot] = 1.0;
  return v;
}

/// Random corpus for blocking oracles: `n` articles over `days` days, each
/// with 0-3 entities drawn from a small vocabulary of mixed types.
inline Corpus random_entity_corpus(std::mt19937_64& rng, std::size_t n, std::int32_t days, std::size_t vocab) {
  static const char* types[] = {"ORG", "PERSON", "EVENT", "GPE", "PRODUCT", "WORK_OF_ART", "DATE"};
  CorpusBuilder b;
  b.outlet("o1").outlet("o2");
  std::uniform_int_distribution<std::int32_t> day(0, days - 1);
  std::uniform_int_distribution<std::size_t> ent(0, vocab - 1), count(0, 3);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Entity> es;
    for (std::size_t k = count(rng); k > 0; --k) {
      const auto e = ent(rng);
      es.push_back({"E" + std::to_string(e), types[e % 7]});
    }
    b.add(i % 2 ? "o1" : "o2", day(rng), {}, es);
  }
  return b.build(days);
}


/// A 30-day corpus with one planted storm; small enough for repeated full runs.
inline synthetic::GeneratorSpec small_spec() {
  synthetic::GeneratorSpec spec;
  spec.days = 30;
  spec.national_outlets = 6;
  spec.local_outlets = 6;
  spec.low_volume_outlets = 2;
  spec.minor_stories = 15;
  spec.common_entity_rate = 0.02;
  synthetic::StorySpec storm;
  storm.label = "storm-0";
  storm.start_day = 5;
  storm.duration = 8;
  storm.mode_outlets = 5;
  storm.trickle_outlets = 2;
  spec.stories.push_back(storm);
  return spec;
}

/// Writes `spec` into `dir` and returns a config whose workdir is `dir/work`.
inline PipelineConfig write_dataset(const std::filesystem::path& dir, const synthetic::GeneratorSpec& spec,
                                    std::uint64_t seed = 1) {
  const auto files = synthetic::write(synthetic::generate(spec, seed), dir);
  PipelineConfig cfg;
  cfg.articles = files.articles;
  cfg.outlets = files.outlets;
  cfg.embeddings = files.embeddings;
  cfg.embedding_ids = files.ids;
  cfg.workdir = (dir / "work").string();
  cfg.bootstrap_reps = 200;
  return cfg;
}

/// Every file under a workdir mapped to its content; manifests lose their
/// "run" block, which legitimately differs between runs.
inline std::map<std::string, std::string> workdir_contents(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), root).generic_string();
    std::string body = slurp(e.path());
    if (rel.starts_with("manifests/")) {
      auto j = nlohmann::ordered_json::parse(body);
      j.erase("run");
      body = j.dump();
    }
    out[rel] = std::move(body);
  }
  return out;
}

/// Two float rows, both within the unit-norm tolerance, whose f64-accumulated
/// dot product equals `target` exactly. u = (1, c, c, c, 0) with c = 2^-12 and
/// v = (r, t1, t2, t3, w): r carries float(target) and t1..t3 carry the residual
/// scaled by 1/c, split over three floats.
inline std::pair<std::vector<float>, std::vector<float>> exact_dot_pair(double target) {
  const float c = 1.0f / 4096.0f;
  const float r = static_cast<float>(target);
  double rest = (target - static_cast<double>(r)) / static_cast<double>(c);
  float t[3];
  for (float& ti : t) {
    ti = static_cast<float>(rest);
    rest -= static_cast<double>(ti);
  }
  const float w = static_cast<float>(std::sqrt(1.0 - static_cast<double>(r) * r));
  return {{1.0f, c, c, c, 0.0f}, {r, t[0], t[1], t[2], w}};
}

}  // namespace stormpipe::testing
