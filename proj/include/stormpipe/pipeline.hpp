#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stormpipe/analysis.hpp"
#include "stormpipe/clustering.hpp"
#include "stormpipe/corpus.hpp"
#include "stormpipe/entities.hpp"
#include "stormpipe/error.hpp"
#include "stormpipe/hash.hpp"
#include "stormpipe/similarity.hpp"
#include "stormpipe/storms.hpp"

namespace stormpipe {

struct PipelineConfig {
  // paths
  std::string articles;
  std::string outlets;
  std::string embeddings;     // EMB1; empty -> mock embeddings
  std::string embedding_ids;  // defaults to <embeddings>.ids sibling
  std::string workdir;

  std::optional<Day> declared_start, declared_end;  // ingest rejects dates outside
  std::optional<Day> window_start, window_end;      // ingest keeps only dates inside

  // knobs
  std::vector<std::string> entity_types;
  std::size_t max_count = kDefaultMaxEntityArticles;
  std::int32_t max_day_gap = kDefaultMaxDayGap;
  double threshold = kDefaultSimilarityThreshold;
  std::size_t mock_dim = 256;
  std::uint64_t embed_seed = 0;
  std::size_t min_cluster_size = kDefaultMinClusterSize;
  StormCriteria criteria;
  std::size_t topics = kDefaultTopicCount;
  std::size_t horizon_days = kDefaultHorizonDays;
  std::size_t bootstrap_reps = kDefaultBootstrapReps;
  std::uint64_t seed = 0;
  std::int32_t gatekeeping_window = kDefaultGatekeepingWindow;
  std::int32_t lookback_days = kDefaultLookbackDays;
  std::size_t top_outlets = 20;
  std::size_t type_graph_outlets = 200;
  unsigned threads = 1;

  PipelineConfig() {
    auto types = default_entity_types();
    entity_types.assign(types.begin(), types.end());
    entity_types.push_back(kFallbackEntityType);
  }

  void validate() const {
    auto fail = [](const std::string& m) { throw ValidationError("config: " + m); };
    if (workdir.empty()) fail("workdir is not set");
    if (max_count == 0) fail("max_count must be positive");
    if (max_day_gap <= 0) fail("max_day_gap must be positive");
    if (!(threshold > 0.0 && threshold <= 1.0)) fail("threshold must lie in (0, 1]");
    if (mock_dim < 8) fail("mock_dim must be at least 8");
    if (min_cluster_size == 0) fail("min_cluster_size must be positive");
    if (criteria.window_days <= 0) fail("window_days must be positive");
    if (!(criteria.share_threshold > 0.0 && criteria.share_threshold <= 1.0)) fail("share_threshold must lie in (0, 1]");
    if (criteria.min_window_articles <= 0) fail("min_window_articles must be positive");
    if (criteria.min_duration <= 0) fail("min_duration must be positive");
    if (criteria.min_storm_outlets == 0) fail("min_storm_outlets must be positive");
    if (topics < 2) fail("topics must be at least 2");
    if (horizon_days == 0 || bootstrap_reps == 0) fail("horizon_days and bootstrap_reps must be positive");
    if (gatekeeping_window <= 0 || lookback_days <= 0) fail("gatekeeping_window and lookback_days must be positive");
    if (top_outlets == 0 || type_graph_outlets == 0) fail("outlet limits must be positive");
    if (threads == 0) fail("threads must be positive");
    if (declared_start.has_value() != declared_end.has_value()) fail("declared_start and declared_end go together");
    if (window_start.has_value() != window_end.has_value()) fail("window_start and window_end go together");
    if (declared_start && *declared_end < *declared_start) fail("declared range is inverted");
    if (window_start && *window_end < *window_start) fail("window range is inverted");
  }

  std::string ids_path() const { return embedding_ids.empty() ? embeddings + ".ids" : embedding_ids; }

  /// Everything that can change stage outputs. Thread count and workdir are
  /// deliberately absent.
  nlohmann::ordered_json snapshot() const {
    nlohmann::ordered_json j;
    j["articles"] = articles;
    j["outlets"] = outlets;
    j["embeddings"] = embeddings;
    j["embedding_ids"] = embeddings.empty() ? std::string() : ids_path();
    auto day = [](const std::optional<Day>& d) { return d ? nlohmann::ordered_json(d->str()) : nlohmann::ordered_json(); };
    j["declared_start"] = day(declared_start);
    j["declared_end"] = day(declared_end);
    j["window_start"] = day(window_start);
    j["window_end"] = day(window_end);
    j["entity_types"] = entity_types;
    j["max_count"] = max_count;
    j["max_day_gap"] = max_day_gap;
    j["threshold"] = threshold;
    j["mock_dim"] = mock_dim;
    j["embed_seed"] = embed_seed;
    j["min_cluster_size"] = min_cluster_size;
    j["window_days"] = criteria.window_days;
    j["share_threshold"] = criteria.share_threshold;
    j["min_window_articles"] = criteria.min_window_articles;
    j["min_duration"] = criteria.min_duration;
    j["min_storm_outlets"] = criteria.min_storm_outlets;
    j["topics"] = topics;
    j["horizon_days"] = horizon_days;
    j["bootstrap_reps"] = bootstrap_reps;
    j["seed"] = seed;
    j["gatekeeping_window"] = gatekeeping_window;
    j["lookback_days"] = lookback_days;
    j["top_outlets"] = top_outlets;
    j["type_graph_outlets"] = type_graph_outlets;
    return j;
  }

  /// Applies keys from a JSON object; unknown keys are an error.
  void apply(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
      try {
        apply_key(key, v);
      } catch (const nlohmann::json::exception&) {
        throw ValidationError("config: key '" + key + "' has the wrong type");
      }
    }
  }

  static PipelineConfig from_json(const nlohmann::json& j) {
    PipelineConfig c;
    c.apply(j);
    return c;
  }

 private:
  void apply_key(const std::string& key, const nlohmann::json& v) {
    auto day = [&](std::optional<Day>& out) {
      if (v.is_null()) out.reset();
      else out = Day::parse(v.get<std::string>());
    };
    if (key == "articles") articles = v.get<std::string>();
    else if (key == "outlets") outlets = v.get<std::string>();
    else if (key == "embeddings") embeddings = v.get<std::string>();
    else if (key == "embedding_ids") embedding_ids = v.get<std::string>();
    else if (key == "workdir") workdir = v.get<std::string>();
    else if (key == "declared_start") day(declared_start);
    else if (key == "declared_end") day(declared_end);
    else if (key == "window_start") day(window_start);
    else if (key == "window_end") day(window_end);
    else if (key == "entity_types") entity_types = v.get<std::vector<std::string>>();
    else if (key == "max_count") max_count = v.get<std::size_t>();
    else if (key == "max_day_gap") max_day_gap = v.get<std::int32_t>();
    else if (key == "threshold") threshold = v.get<double>();
    else if (key == "mock_dim") mock_dim = v.get<std::size_t>();
    else if (key == "embed_seed") embed_seed = v.get<std::uint64_t>();
    else if (key == "min_cluster_size") min_cluster_size = v.get<std::size_t>();
    else if (key == "window_days") criteria.window_days = v.get<std::int32_t>();
    else if (key == "share_threshold") criteria.share_threshold = v.get<double>();
    else if (key == "min_window_articles") criteria.min_window_articles = v.get<std::int64_t>();
    else if (key == "min_duration") criteria.min_duration = v.get<std::int32_t>();
    else if (key == "min_storm_outlets") criteria.min_storm_outlets = v.get<std::size_t>();
    else if (key == "topics") topics = v.get<std::size_t>();
    else if (key == "horizon_days") horizon_days = v.get<std::size_t>();
    else if (key == "bootstrap_reps") bootstrap_reps = v.get<std::size_t>();
    else if (key == "seed") seed = v.get<std::uint64_t>();
    else if (key == "gatekeeping_window") gatekeeping_window = v.get<std::int32_t>();
    else if (key == "lookback_days") lookback_days = v.get<std::int32_t>();
    else if (key == "top_outlets") top_outlets = v.get<std::size_t>();
    else if (key == "type_graph_outlets") type_graph_outlets = v.get<std::size_t>();
    else if (key == "threads") threads = v.get<unsigned>();
    else throw ValidationError("config: unknown key '" + key + "'");
  }
};

enum class Stage { ingest, index, candidates, score, cluster, storms, stats, topics, gatekeeping, influence };

inline const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages{Stage::ingest,  Stage::index, Stage::candidates, Stage::score,
                                         Stage::cluster, Stage::storms, Stage::stats,     Stage::topics,
                                         Stage::gatekeeping, Stage::influence};
  return stages;
}

inline std::string stage_name(Stage s) {
  static const char* names[] = {"ingest", "index",  "candidates", "score",       "cluster",
                                "storms", "stats",  "topics",     "gatekeeping", "influence"};
  return names[static_cast<int>(s)];
}

inline std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : all_stages())
    if (stage_name(s) == name) return s;
  return std::nullopt;
}

struct StageReport {
  Stage stage = Stage::ingest;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  double wall_ms = 0.0;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

/// Runs pipeline stages against a workdir. Each stage reads upstream
/// artifacts from disk, verifies them against their producer's manifest, and
/// writes its own artifacts followed by `manifests/<stage>.json`.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config) : cfg_(std::move(config)) {
    cfg_.validate();
    root_ = cfg_.workdir;
    std::filesystem::create_directories(root_ / "manifests");
  }

  const PipelineConfig& config() const noexcept { return cfg_; }
  std::filesystem::path path(const std::string& artifact) const { return root_ / artifact; }
  std::filesystem::path manifest_path(Stage s) const { return root_ / "manifests" / (stage_name(s) + ".json"); }

  StageReport run(Stage stage) {
    const auto t0 = std::chrono::steady_clock::now();
    current_ = StageReport{};
    current_.stage = stage;
    inputs_.clear();
    switch (stage) {
      case Stage::ingest: ingest(); break;
      case Stage::index: index(); break;
      case Stage::candidates: candidates(); break;
      case Stage::score: score(); break;
      case Stage::cluster: cluster(); break;
      case Stage::storms: storms(); break;
      case Stage::stats: stats(); break;
      case Stage::topics: topics(); break;
      case Stage::gatekeeping: gatekeeping(); break;
      case Stage::influence: influence(); break;
    }
    current_.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    write_manifest();
    return current_;
  }

  std::vector<StageReport> run_all() {
    std::vector<StageReport> out;
    for (Stage s : all_stages()) out.push_back(run(s));
    return out;
  }

 private:
  // ---- artifact plumbing -------------------------------------------------

  void record_external_input(const std::string& file) {
    if (!std::filesystem::exists(file)) throw ValidationError("input file " + file + " does not exist");
    inputs_.push_back({file, hex64(hash_file(file))});
  }

  /// Ensures `artifact` was produced by `producer` and is byte-identical to
  /// what its manifest recorded.
  void require(Stage producer, const std::string& artifact) {
    const auto mpath = manifest_path(producer);
    if (!std::filesystem::exists(mpath))
      throw MissingArtifactError("stage '" + stage_name(producer) + "' has not run (no " + mpath.string() + ")");
    nlohmann::json manifest;
    {
      std::ifstream in(mpath);
      try {
        manifest = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception&) {
        throw MissingArtifactError("manifest " + mpath.string() + " is unreadable");
      }
    }
    const auto file = path(artifact);
    if (!std::filesystem::exists(file)) throw MissingArtifactError("missing artifact " + file.string());
    const std::string actual = hex64(hash_file(file.string()));
    for (const auto& o : manifest.at("outputs"))
      if (o.at("path").get<std::string>() == artifact) {
        if (o.at("fnv1a64").get<std::string>() != actual)
          throw MissingArtifactError("artifact " + file.string() + " does not match its manifest (partial write?)");
        inputs_.push_back({artifact, actual});
        return;
      }
    throw MissingArtifactError("manifest of '" + stage_name(producer) + "' does not list " + artifact);
  }

  /// Writes via a temporary file and rename so readers never see a partial artifact.
  void write_artifact(const std::string& artifact, const std::function<void(std::ostream&)>& body, bool binary = false) {
    const auto final_path = path(artifact);
    auto tmp = final_path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
      body(out);
      out.flush();
      if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, final_path);
    current_.outputs.push_back(artifact);
  }

  void write_json_artifact(const std::string& artifact, const nlohmann::ordered_json& j) {
    write_artifact(artifact, [&](std::ostream& out) { out << j.dump(1) << '\n'; });
  }

  void write_manifest() {
    nlohmann::ordered_json m;
    m["stage"] = stage_name(current_.stage);
    m["config"] = cfg_.snapshot();
    auto inputs = nlohmann::ordered_json::array();
    for (const auto& [p, h] : inputs_) inputs.push_back({{"path", p}, {"fnv1a64", h}});
    m["inputs"] = std::move(inputs);
    auto outputs = nlohmann::ordered_json::array();
    for (const auto& o : current_.outputs) {
      const auto p = path(o);
      outputs.push_back({{"path", o},
                         {"bytes", std::filesystem::file_size(p)},
                         {"fnv1a64", hex64(hash_file(p.string()))}});
    }
    m["outputs"] = std::move(outputs);
    m["counts"] = current_.counts;
    m["warnings"] = current_.warnings;
    m["run"] = {{"threads", cfg_.threads}, {"wall_time_ms", current_.wall_ms}, {"workdir", root_.string()}};
    const auto final_path = manifest_path(current_.stage);
    auto tmp = final_path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << m.dump(1) << '\n';
    }
    std::filesystem::rename(tmp, final_path);
  }

  // ---- shared loaders ----------------------------------------------------

  Corpus load_corpus() {
    require(Stage::ingest, "corpus.jsonl");
    require(Stage::ingest, "outlets.jsonl");
    require(Stage::ingest, "corpus_meta.json");
    nlohmann::json meta;
    {
      std::ifstream in(path("corpus_meta.json"));
      meta = nlohmann::json::parse(in);
    }
    IngestOptions opts;
    opts.declared_range = DateRange{Day::parse(meta.at("start").get<std::string>()),
                                    Day::parse(meta.at("end").get<std::string>())};
    std::ifstream outlets_in(path("outlets.jsonl"));
    std::ifstream articles_in(path("corpus.jsonl"));
    auto result = stormpipe::ingest(articles_in, read_outlets_jsonl(outlets_in), opts);
    return std::move(result.corpus);
  }

  std::vector<StoryCluster> load_clusters() {
    require(Stage::cluster, "clusters.jsonl");
    std::ifstream in(path("clusters.jsonl"));
    return read_clusters_jsonl(in);
  }

  std::vector<StormRecord> load_storms() {
    require(Stage::storms, "storms.jsonl");
    std::ifstream in(path("storms.jsonl"));
    std::vector<StormRecord> out;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) out.push_back(storm_from_json(nlohmann::json::parse(line)));
    return out;
  }

  // ---- stages ------------------------------------------------------------

  void ingest() {
    if (cfg_.articles.empty() || cfg_.outlets.empty()) throw ValidationError("config: articles and outlets paths are required");
    record_external_input(cfg_.articles);
    record_external_input(cfg_.outlets);
    IngestOptions opts;
    if (cfg_.declared_start) opts.declared_range = DateRange{*cfg_.declared_start, *cfg_.declared_end};
    auto result = stormpipe::ingest(cfg_.articles, cfg_.outlets, opts);
    const std::size_t records = result.corpus.size();
    Corpus corpus = dedup(result.corpus);
    const std::size_t after_dedup = corpus.size();
    if (cfg_.window_start) corpus = truncate_range(corpus, *cfg_.window_start, *cfg_.window_end);

    write_artifact("corpus.jsonl", [&](std::ostream& out) { write_articles_jsonl(corpus, out); });
    write_artifact("outlets.jsonl", [&](std::ostream& out) { write_outlets_jsonl(corpus.outlets(), out); });
    nlohmann::ordered_json meta;
    meta["start"] = corpus.date_range().start.str();
    meta["end"] = corpus.date_range().end.str();
    meta["articles"] = corpus.size();
    write_json_artifact("corpus_meta.json", meta);
    write_artifact("rejections.jsonl", [&](std::ostream& out) {
      for (const auto& r : result.rejected)
        out << nlohmann::ordered_json{{"line", r.line}, {"reason", r.reason}}.dump() << '\n';
    });
    current_.counts["records_accepted"] = records;
    current_.counts["records_rejected"] = result.rejected.size();
    current_.counts["duplicates_removed"] = records - after_dedup;
    current_.counts["outside_window"] = after_dedup - corpus.size();
    current_.counts["articles"] = corpus.size();
    if (!result.rejected.empty())
      current_.warnings.push_back(std::to_string(result.rejected.size()) + " record(s) rejected; see rejections.jsonl");
  }

  void index() {
    Corpus corpus = load_corpus();
    std::size_t fallback = 0;
    std::vector<Article> arts = corpus.articles();
    for (auto& a : arts)
      if (!a.entities) {
        a.entities = extract_entities_fallback(a.title + ". " + a.text);
        ++fallback;
      }
    if (fallback) corpus = Corpus(std::move(arts), corpus.outlets(), corpus.date_range());
    const std::set<std::string> types(cfg_.entity_types.begin(), cfg_.entity_types.end());
    const EntityIndex idx = build_index(corpus, types, cfg_.max_count);
    write_artifact("entity_index.json", [&](std::ostream& out) { out << to_json(idx).dump() << '\n'; });
    current_.counts["articles"] = corpus.size();
    current_.counts["fallback_extracted"] = fallback;
    current_.counts["entities"] = idx.postings.size();
    current_.counts["excluded_entities"] = idx.excluded.size();
  }

  void candidates() {
    const Corpus corpus = load_corpus();
    require(Stage::index, "entity_index.json");
    EntityIndex idx;
    {
      std::ifstream in(path("entity_index.json"));
      idx = entity_index_from_json(nlohmann::json::parse(in));
    }
    const auto pairs = generate_candidates(idx, corpus, cfg_.max_day_gap, cfg_.threads);
    write_artifact("candidates.cnd", [&](std::ostream& out) { write_candidates_bin(out, pairs); }, true);
    current_.counts["articles"] = corpus.size();
    current_.counts["candidates"] = pairs.size();
  }

  void score() {
    const Corpus corpus = load_corpus();
    require(Stage::candidates, "candidates.cnd");
    std::vector<CandidatePair> pairs;
    {
      std::ifstream in(path("candidates.cnd"), std::ios::binary);
      pairs = read_candidates_bin(in);
    }
    EmbeddingMatrix emb;
    if (cfg_.embeddings.empty()) {
      emb = mock_embed_corpus(corpus, cfg_.mock_dim, cfg_.embed_seed, cfg_.threads);
      write_artifact("embeddings.emb", [&](std::ostream& out) {
        write_emb1(out, static_cast<std::uint32_t>(emb.dim()), emb.values());
      }, true);
      write_artifact("embeddings.ids", [&](std::ostream& out) { write_ids(out, emb.ids()); });
    } else {
      record_external_input(cfg_.embeddings);
      record_external_input(cfg_.ids_path());
      try {
        emb = load_embeddings(cfg_.embeddings, cfg_.ids_path());
      } catch (const FormatError& e) {
        throw ValidationError(e.what());
      }
    }
    const auto result = score_candidates(pairs, emb, cfg_.threshold, cfg_.threads);
    write_artifact("edges.edg", [&](std::ostream& out) { write_edges_bin(out, result.edges); }, true);
    nlohmann::ordered_json report;
    report["candidates"] = pairs.size();
    report["scored_pairs"] = result.scored_pairs;
    report["skipped_pairs"] = result.skipped_pairs;
    report["missing_articles"] = result.missing_articles;
    write_json_artifact("score_report.json", report);
    current_.counts["candidates"] = pairs.size();
    current_.counts["edges"] = result.edges.size();
    current_.counts["missing_articles"] = result.missing_articles.size();
    if (!result.missing_articles.empty())
      current_.warnings.push_back(std::to_string(result.missing_articles.size()) + " article(s) lack embeddings");
  }

  void cluster() {
    const Corpus corpus = load_corpus();
    require(Stage::score, "edges.edg");
    std::vector<SimilarityEdge> edges;
    {
      std::ifstream in(path("edges.edg"), std::ios::binary);
      edges = read_edges_bin(in);
    }
    std::vector<ArticleId> universe;
    universe.reserve(corpus.size());
    for (const auto& a : corpus.articles()) universe.push_back(a.id);
    const auto assignment = connected_components(edges, std::move(universe));
    const auto clusters = build_story_clusters(assignment, corpus, cfg_.min_cluster_size);
    write_artifact("clusters.jsonl", [&](std::ostream& out) { write_clusters_jsonl(out, clusters); });
    std::size_t clustered = 0;
    for (const auto& c : clusters) clustered += c.size();
    current_.counts["edges"] = edges.size();
    current_.counts["components"] = assignment.count;
    current_.counts["clusters"] = clusters.size();
    current_.counts["clustered_articles"] = clustered;
  }

  void storms() {
    const Corpus corpus = load_corpus();
    const auto clusters = load_clusters();
    const auto found = identify_storms(clusters, corpus, cfg_.criteria, cfg_.threads);
    write_artifact("storms.jsonl", [&](std::ostream& out) {
      for (const auto& s : found) out << to_json(s).dump() << '\n';
    });
    write_artifact("storms.csv", [&](std::ostream& out) { write_storms_csv(out, found); });
    write_artifact("storm_events.jsonl", [&](std::ostream& out) {
      for (const auto& s : found)
        for (const auto& e : s.events) {
          auto j = to_json(e);
          j["cluster_id"] = s.cluster_id;
          out << j.dump() << '\n';
        }
    });
    std::size_t articles = 0, clustered = 0;
    for (const auto& s : found) articles += s.article_ids.size();
    for (const auto& c : clusters) clustered += c.size();
    current_.counts["clusters"] = clusters.size();
    current_.counts["clustered_articles"] = clustered;
    current_.counts["storms"] = found.size();
    current_.counts["storm_articles"] = articles;
  }

  void stats() {
    const auto clusters = load_clusters();
    const auto found = load_storms();
    std::set<std::uint32_t> storm_ids;
    for (const auto& s : found) storm_ids.insert(s.cluster_id);

    nlohmann::ordered_json summary;
    summary["storms"] = found.size();
    if (!found.empty()) {
      const auto s = storm_summary(found);
      auto feat = [](const FeatureStats& f) {
        return nlohmann::ordered_json{{"min", f.min}, {"max", f.max}, {"mean", f.mean}, {"median", f.median}};
      };
      summary["article_count"] = feat(s.articles);
      summary["duration_days"] = feat(s.duration);
      summary["outlet_count"] = feat(s.outlets);
      summary["pct_national"] = feat(s.pct_national);
      const auto peaks = peak_statistics(found);
      nlohmann::ordered_json hist = nlohmann::ordered_json::object();
      for (const auto& [day, n] : peaks.histogram) hist[std::to_string(day)] = n;
      summary["peak_day"] = {{"median", peaks.median}, {"mode", peaks.mode}, {"histogram", hist}};
    } else {
      current_.warnings.push_back("no storms; summary is empty");
    }
    write_json_artifact("summary.json", summary);

    write_artifact("storm_series.csv", [&](std::ostream& out) {
      out << "day,mean_articles,lower_articles,upper_articles,mean_states,lower_states,upper_states\n";
      if (found.size() < 2) return;
      const auto a = average_storm_series(found, SeriesKind::articles, cfg_.horizon_days, cfg_.bootstrap_reps, cfg_.seed);
      const auto s = average_storm_series(found, SeriesKind::states, cfg_.horizon_days, cfg_.bootstrap_reps, cfg_.seed);
      for (std::size_t d = 0; d < cfg_.horizon_days; ++d)
        out << d + 1 << ',' << detail::fmt(a.mean[d]) << ',' << detail::fmt(a.lower[d]) << ',' << detail::fmt(a.upper[d])
            << ',' << detail::fmt(s.mean[d]) << ',' << detail::fmt(s.lower[d]) << ',' << detail::fmt(s.upper[d]) << '\n';
    });
    if (found.size() < 2) current_.warnings.push_back("fewer than two storms; average series omitted");

    std::vector<double> storm_durations, other_durations;
    for (const auto& c : clusters)
      (storm_ids.contains(c.cluster_id) ? storm_durations : other_durations)
          .push_back(static_cast<double>(c.last_day - c.first_day + 1));
    write_artifact("duration_ecdf.csv", [&](std::ostream& out) {
      out << "group,duration_days,cdf\n";
      auto emit = [&](const char* group, const std::vector<double>& d) {
        if (d.empty()) return;
        for (const auto& p : duration_ecdf(d)) out << group << ',' << p.x << ',' << detail::fmt(p.cdf) << '\n';
      };
      emit("storm", storm_durations);
      emit("non_storm", other_durations);
    });
    current_.counts["storms"] = found.size();
    current_.counts["non_storm_clusters"] = other_durations.size();
  }

  void topics() {
    const Corpus corpus = load_corpus();
    const auto found = load_storms();
    const std::size_t k = cfg_.topics;
    std::set<ArticleId> in_storm;
    nlohmann::ordered_json per_storm = nlohmann::ordered_json::array();
    for (const auto& s : found) {
      in_storm.insert(s.article_ids.begin(), s.article_ids.end());
      per_storm.push_back({{"cluster_id", s.cluster_id}, {"topic", storm_topic(s.article_ids, corpus, k)}});
    }
    write_json_artifact("storm_topics.json", per_storm);
    std::vector<ArticleId> storm_ids(in_storm.begin(), in_storm.end()), other_ids;
    for (const auto& a : corpus.articles())
      if (!in_storm.contains(a.id)) other_ids.push_back(a.id);
    write_artifact("topic_skew.csv", [&](std::ostream& out) {
      out << "topic,pct_storm,pct_non_storm,difference_pp\n";
      if (storm_ids.empty() || other_ids.empty()) return;
      const auto st = topic_percentages(assign_topics(storm_ids, corpus, k), k);
      const auto ot = topic_percentages(assign_topics(other_ids, corpus, k), k);
      for (std::size_t t = 0; t < k; ++t)
        out << t << ',' << detail::fmt(st[t]) << ',' << detail::fmt(ot[t]) << ',' << detail::fmt(st[t] - ot[t]) << '\n';
    });
    if (storm_ids.empty()) current_.warnings.push_back("no storms; topic skew omitted");
    current_.counts["storm_articles"] = storm_ids.size();
    current_.counts["non_storm_articles"] = other_ids.size();
  }

  void gatekeeping() {
    const Corpus corpus = load_corpus();
    const auto found = load_storms();
    const DayIndex days(corpus);
    std::vector<GatekeepingSeries> all, excl;
    for (const auto& s : found) {
      all.push_back(gatekeeping_series(s, corpus, days, cfg_.topics, cfg_.gatekeeping_window, false));
      excl.push_back(gatekeeping_series(s, corpus, days, cfg_.topics, cfg_.gatekeeping_window, true));
    }
    auto cell = [](const std::optional<double>& v) { return v ? detail::fmt(*v) : std::string(); };
    write_artifact("gatekeeping.csv", [&](std::ostream& out) {
      out << "offset,all_articles,excluding_storm_articles\n";
      if (found.empty()) return;
      const auto ma = average_gatekeeping_series(all);
      const auto me = average_gatekeeping_series(excl);
      for (std::size_t i = 0; i < ma.size(); ++i)
        out << static_cast<std::int32_t>(i) - cfg_.gatekeeping_window << ',' << cell(ma[i]) << ',' << cell(me[i]) << '\n';
    });
    write_artifact("gatekeeping_storms.csv", [&](std::ostream& out) {
      out << "cluster_id,offset,all_articles,excluding_storm_articles\n";
      for (std::size_t s = 0; s < found.size(); ++s)
        for (std::size_t i = 0; i < all[s].size(); ++i)
          out << found[s].cluster_id << ',' << static_cast<std::int32_t>(i) - cfg_.gatekeeping_window << ','
              << cell(all[s][i]) << ',' << cell(excl[s][i]) << '\n';
    });
    current_.counts["storms"] = found.size();
  }

  void influence() {
    const Corpus corpus = load_corpus();
    const auto found = load_storms();
    const auto outlets = build_influence_graph(found, corpus, cfg_.lookback_days, NodeKey::outlet);
    write_json_artifact("influence_outlets.json", to_json(outlets));
    write_artifact("influence_outlets.dot", [&](std::ostream& out) { write_dot(out, outlets, "outlets"); });

    auto reliable_national = [](const OutletProfile& p) {
      return p.scope == Scope::national && p.reliability == Reliability::reliable;
    };
    const auto top = top_outlets_subgraph(outlets, found, corpus, cfg_.top_outlets, reliable_national);
    if (top.clamped)
      current_.warnings.push_back("fewer than " + std::to_string(cfg_.top_outlets) + " reliable national outlets; using " +
                                  std::to_string(top.graph.nodes.size()));
    write_json_artifact("influence_top.json", to_json(top.graph));
    write_artifact("influence_top.dot", [&](std::ostream& out) { write_dot(out, top.graph, "top_reliable_national"); });

    // type-level graph over the outlets with the most storm coverage
    const auto covered = top_outlets_subgraph(outlets, found, corpus, cfg_.type_graph_outlets,
                                              [](const OutletProfile&) { return true; });
    const std::set<std::string> keep(covered.graph.nodes.begin(), covered.graph.nodes.end());
    std::vector<StormRecord> restricted;
    for (const auto& s : found) {
      StormRecord r = s;
      std::erase_if(r.article_ids, [&](ArticleId id) { return !keep.contains(corpus.at(id).outlet); });
      if (!r.article_ids.empty()) restricted.push_back(std::move(r));
    }
    const auto types = build_influence_graph(restricted, corpus, cfg_.lookback_days, NodeKey::outlet_type);
    write_json_artifact("influence_types.json", to_json(types));
    write_artifact("influence_types.dot", [&](std::ostream& out) { write_dot(out, types, "outlet_types"); });
    current_.counts["storms"] = found.size();
    current_.counts["outlet_nodes"] = outlets.nodes.size();
    current_.counts["outlet_edges"] = outlets.edges.size();
    current_.counts["top_nodes"] = top.graph.nodes.size();
    current_.counts["type_nodes"] = types.nodes.size();
  }

  PipelineConfig cfg_;
  std::filesystem::path root_;
  StageReport current_;
  std::vector<std::pair<std::string, std::string>> inputs_;
};

/// Loads a JSON config file; relative paths inside it resolve against the
/// file's directory.
inline PipelineConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open config " + file);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  auto cfg = PipelineConfig::from_json(j);
  const auto base = std::filesystem::absolute(file).parent_path();
  for (std::string* p : {&cfg.articles, &cfg.outlets, &cfg.embeddings, &cfg.embedding_ids, &cfg.workdir})
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  return cfg;
}

}  // namespace stormpipe
