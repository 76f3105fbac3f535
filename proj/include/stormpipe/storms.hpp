#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stormpipe/clustering.hpp"
#include "stormpipe/corpus.hpp"
#include "stormpipe/parallel.hpp"

namespace stormpipe {

struct StormCriteria {
  std::int32_t window_days = 3;
  double share_threshold = 0.03;
  std::int64_t min_window_articles = 40;
  std::int32_t min_duration = 7;
  std::size_t min_storm_outlets = 5;
};

/// Per-outlet daily article totals over the corpus range, with prefix sums
/// for O(1) window totals. Days outside the range count as zero.
class CoverageTable {
 public:
  explicit CoverageTable(const Corpus& corpus) : range_(corpus.date_range()) {
    const auto days = static_cast<std::size_t>(std::max(range_.days(), 0));
    for (const auto& [name, _] : corpus.outlets()) {
      slot_.emplace(name, prefix_.size());
      prefix_.emplace_back(days + 1, 0);
    }
    for (const Article& a : corpus.articles())
      ++prefix_[slot_.at(a.outlet)][static_cast<std::size_t>(a.date - range_.start) + 1];
    for (auto& p : prefix_)
      for (std::size_t k = 1; k < p.size(); ++k) p[k] += p[k - 1];
  }

  /// Articles by `outlet` dated in [first, first + days - 1].
  std::int64_t window_total(const std::string& outlet, Day first, std::int32_t days) const {
    auto it = slot_.find(outlet);
    if (it == slot_.end()) return 0;
    const auto& p = prefix_[it->second];
    const auto n = static_cast<std::int64_t>(p.size()) - 1;
    const std::int64_t lo = std::clamp<std::int64_t>(first - range_.start, 0, n);
    const std::int64_t hi = std::clamp<std::int64_t>((first - range_.start) + days, 0, n);
    return p[static_cast<std::size_t>(hi)] - p[static_cast<std::size_t>(lo)];
  }

  std::int64_t day_total(const std::string& outlet, Day day) const { return window_total(outlet, day, 1); }

 private:
  DateRange range_;
  std::unordered_map<std::string, std::size_t> slot_;
  std::vector<std::vector<std::int64_t>> prefix_;
};

struct StormModeEvent {
  std::string outlet;
  Day window_start;
  double share = 0.0;
  std::int64_t outlet_window_total = 0;
  std::int64_t cluster_window_count = 0;

  bool operator==(const StormModeEvent&) const = default;
};

/// Every (outlet, sliding window) in which the outlet gave the cluster at least
/// `share_threshold` of a window holding at least `min_window_articles`
/// articles. Windows start from first_day - (window_days - 1) through
/// last_day, stride one day. Sorted by (outlet, window_start).
inline std::vector<StormModeEvent> detect_storm_mode(const StoryCluster& cluster, const Corpus& corpus,
                                                     const CoverageTable& coverage,
                                                     const StormCriteria& criteria = {}) {
  std::map<std::string, std::map<Day, std::int64_t>> member_days;
  for (ArticleId id : cluster.article_ids) {
    const Article& a = corpus.at(id);
    ++member_days[a.outlet][a.date];
  }
  std::vector<StormModeEvent> events;
  const std::int32_t w = criteria.window_days;
  for (const auto& [outlet, days] : member_days) {
    for (Day start = cluster.first_day - (w - 1); start <= cluster.last_day; start += 1) {
      std::int64_t s = 0;
      for (auto it = days.lower_bound(start); it != days.end() && it->first < start + w; ++it) s += it->second;
      if (s == 0) continue;
      const std::int64_t t = coverage.window_total(outlet, start, w);
      if (t < criteria.min_window_articles) continue;
      const double share = static_cast<double>(s) / static_cast<double>(t);
      if (share >= criteria.share_threshold) events.push_back({outlet, start, share, t, s});
    }
  }
  return events;
}

inline std::vector<StormModeEvent> detect_storm_mode(const StoryCluster& cluster, const Corpus& corpus,
                                                     const StormCriteria& criteria = {}) {
  return detect_storm_mode(cluster, corpus, CoverageTable(corpus), criteria);
}

struct StormRecord {
  std::uint32_t cluster_id = 0;
  std::vector<ArticleId> article_ids;
  Day start_day;
  Day last_day;
  std::int32_t peak_day_index = 1;  // 1-based
  std::int32_t duration_days = 0;
  std::size_t outlet_count = 0;
  std::vector<std::string> storm_mode_outlets;
  double pct_national = 0.0;
  std::vector<std::int64_t> daily_counts;
  std::vector<std::int64_t> daily_state_counts;
  std::vector<StormModeEvent> events;

  Day peak_day() const noexcept { return start_day + (peak_day_index - 1); }
  bool operator==(const StormRecord&) const = default;
};

struct StormSeries {
  std::vector<std::int64_t> daily_counts;
  std::vector<std::int64_t> daily_state_counts;
};

/// Daily article counts and distinct local-outlet states, day 1 = `start`.
inline StormSeries storm_time_series(std::span<const ArticleId> article_ids, Day start, std::int32_t duration,
                                     const Corpus& corpus) {
  StormSeries s;
  s.daily_counts.assign(static_cast<std::size_t>(std::max(duration, 0)), 0);
  std::vector<std::set<std::string>> states(s.daily_counts.size());
  for (ArticleId id : article_ids) {
    const Article& a = corpus.at(id);
    const auto d = a.date - start;
    if (d < 0 || d >= duration) throw ValidationError("article " + std::to_string(id) + " outside storm span");
    ++s.daily_counts[static_cast<std::size_t>(d)];
    const OutletProfile& o = corpus.outlet(a.outlet);
    if (o.scope == Scope::local && o.state) states[static_cast<std::size_t>(d)].insert(*o.state);
  }
  s.daily_state_counts.reserve(states.size());
  for (const auto& st : states) s.daily_state_counts.push_back(static_cast<std::int64_t>(st.size()));
  return s;
}

inline StormSeries storm_time_series(const StormRecord& storm, const Corpus& corpus) {
  return storm_time_series(storm.article_ids, storm.start_day, storm.duration_days, corpus);
}

/// 1-based index of the largest count; ties go to the earliest day.
inline std::int32_t peak_day_index(std::span<const std::int64_t> daily_counts) {
  if (daily_counts.empty()) throw ValidationError("peak of an empty series");
  return static_cast<std::int32_t>(std::max_element(daily_counts.begin(), daily_counts.end()) - daily_counts.begin()) + 1;
}

/// Evaluates one cluster; returns a record when it meets every criterion.
inline std::optional<StormRecord> evaluate_storm(const StoryCluster& cluster, const Corpus& corpus,
                                                 const CoverageTable& coverage, const StormCriteria& criteria = {}) {
  const std::int32_t duration = cluster.last_day - cluster.first_day + 1;
  if (duration < criteria.min_duration) return std::nullopt;
  auto events = detect_storm_mode(cluster, corpus, coverage, criteria);
  std::vector<std::string> mode_outlets;
  for (const auto& e : events)
    if (mode_outlets.empty() || mode_outlets.back() != e.outlet) mode_outlets.push_back(e.outlet);
  if (mode_outlets.size() < criteria.min_storm_outlets) return std::nullopt;

  StormRecord r;
  r.cluster_id = cluster.cluster_id;
  r.article_ids = cluster.article_ids;
  r.start_day = cluster.first_day;
  r.last_day = cluster.last_day;
  r.duration_days = duration;
  r.storm_mode_outlets = std::move(mode_outlets);
  r.events = std::move(events);
  std::set<std::string> outlets;
  std::size_t national = 0;
  for (ArticleId id : r.article_ids) {
    const Article& a = corpus.at(id);
    outlets.insert(a.outlet);
    if (corpus.outlet(a.outlet).scope == Scope::national) ++national;
  }
  r.outlet_count = outlets.size();
  r.pct_national = 100.0 * static_cast<double>(national) / static_cast<double>(r.article_ids.size());
  auto series = storm_time_series(r.article_ids, r.start_day, r.duration_days, corpus);
  r.daily_counts = std::move(series.daily_counts);
  r.daily_state_counts = std::move(series.daily_state_counts);
  r.peak_day_index = peak_day_index(r.daily_counts);
  return r;
}

/// Clusters spanning at least `min_duration` days with at least
/// `min_storm_outlets` outlets in storm mode. Output follows cluster order.
inline std::vector<StormRecord> identify_storms(std::span<const StoryCluster> clusters, const Corpus& corpus,
                                                const StormCriteria& criteria = {}, unsigned threads = 1) {
  const CoverageTable coverage(corpus);
  return parallel_collect<StormRecord>(clusters.size(), threads, [&](std::size_t i, std::vector<StormRecord>& out) {
    if (auto r = evaluate_storm(clusters[i], corpus, coverage, criteria)) out.push_back(std::move(*r));
  });
}

// ---------------------------------------------------------------------------
// Descriptive statistics over storms

struct FeatureStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;

  bool operator==(const FeatureStats&) const = default;
};

/// Median with the even-length convention of averaging the central pair.
inline double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty list");
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

inline FeatureStats describe(std::span<const double> values) {
  if (values.empty()) throw ValidationError("statistics of an empty list");
  FeatureStats s;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.median = median({values.begin(), values.end()});
  return s;
}

struct StormSummary {
  std::size_t storms = 0;
  FeatureStats articles;
  FeatureStats duration;
  FeatureStats outlets;
  FeatureStats pct_national;
};

inline StormSummary storm_summary(std::span<const StormRecord> storms) {
  if (storms.empty()) throw ValidationError("storm_summary needs at least one storm");
  std::vector<double> articles, duration, outlets, national;
  for (const auto& s : storms) {
    articles.push_back(static_cast<double>(s.article_ids.size()));
    duration.push_back(s.duration_days);
    outlets.push_back(static_cast<double>(s.outlet_count));
    national.push_back(s.pct_national);
  }
  return {storms.size(), describe(articles), describe(duration), describe(outlets), describe(national)};
}

struct SeriesBands {
  std::vector<double> mean;
  std::vector<double> lower;  // 2.5th percentile of bootstrap means
  std::vector<double> upper;  // 97.5th percentile
};

/// Linear interpolation between order statistics at position q * (n - 1).
inline double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("percentile of an empty list");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

/// Per-day mean over series zero-padded (or cut) to `horizon`, with percentile
/// bootstrap bands from resampling whole series with replacement.
inline SeriesBands average_series(const std::vector<std::vector<double>>& series, std::size_t horizon,
                                  std::size_t reps, std::uint64_t seed) {
  if (series.size() < 2) throw ValidationError("averaging needs at least two series");
  if (reps == 0) throw ValidationError("bootstrap needs at least one replicate");
  const std::size_t n = series.size();
  std::vector<std::vector<double>> padded(n, std::vector<double>(horizon, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < std::min(horizon, series[i].size()); ++d) padded[i][d] = series[i][d];

  SeriesBands bands;
  bands.mean.assign(horizon, 0.0);
  for (const auto& row : padded)
    for (std::size_t d = 0; d < horizon; ++d) bands.mean[d] += row[d];
  for (auto& m : bands.mean) m /= static_cast<double>(n);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::vector<double>> boot(horizon, std::vector<double>(reps, 0.0));
  for (std::size_t r = 0; r < reps; ++r) {
    std::vector<double> sum(horizon, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& row = padded[pick(rng)];
      for (std::size_t d = 0; d < horizon; ++d) sum[d] += row[d];
    }
    for (std::size_t d = 0; d < horizon; ++d) boot[d][r] = sum[d] / static_cast<double>(n);
  }
  bands.lower.resize(horizon);
  bands.upper.resize(horizon);
  for (std::size_t d = 0; d < horizon; ++d) {
    std::sort(boot[d].begin(), boot[d].end());
    bands.lower[d] = percentile_sorted(boot[d], 0.025);
    bands.upper[d] = percentile_sorted(boot[d], 0.975);
  }
  return bands;
}

enum class SeriesKind { articles, states };

inline constexpr std::size_t kDefaultHorizonDays = 30;
inline constexpr std::size_t kDefaultBootstrapReps = 1000;

inline SeriesBands average_storm_series(std::span<const StormRecord> storms, SeriesKind kind,
                                        std::size_t horizon = kDefaultHorizonDays,
                                        std::size_t reps = kDefaultBootstrapReps, std::uint64_t seed = 0) {
  std::vector<std::vector<double>> series;
  for (const auto& s : storms) {
    const auto& src = kind == SeriesKind::articles ? s.daily_counts : s.daily_state_counts;
    series.emplace_back(src.begin(), src.end());
  }
  return average_series(series, horizon, reps, seed);
}

struct EcdfPoint {
  double x = 0.0;
  double cdf = 0.0;

  bool operator==(const EcdfPoint&) const = default;
};

/// F(x) = fraction of values <= x, at each distinct value.
inline std::vector<EcdfPoint> duration_ecdf(std::vector<double> values) {
  if (values.empty()) throw ValidationError("ECDF of an empty list");
  std::sort(values.begin(), values.end());
  std::vector<EcdfPoint> out;
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (i + 1 == values.size() || values[i + 1] != values[i])
      out.push_back({values[i], static_cast<double>(i + 1) / n});
  return out;
}

struct PeakStatistics {
  std::map<std::int32_t, std::size_t> histogram;  // peak day -> storms
  double median = 0.0;
  std::int32_t mode = 1;  // smallest day on ties
};

inline PeakStatistics peak_statistics(std::span<const StormRecord> storms) {
  if (storms.empty()) throw ValidationError("peak statistics need at least one storm");
  PeakStatistics p;
  std::vector<double> days;
  for (const auto& s : storms) {
    const auto day = peak_day_index(s.daily_counts);
    ++p.histogram[day];
    days.push_back(day);
  }
  p.median = median(std::move(days));
  std::size_t best = 0;
  for (const auto& [day, n] : p.histogram)
    if (n > best) {
      best = n;
      p.mode = day;
    }
  return p;
}

// ---------------------------------------------------------------------------
// Export

inline nlohmann::ordered_json to_json(const StormRecord& s) {
  nlohmann::ordered_json j;
  j["cluster_id"] = s.cluster_id;
  j["start_day"] = s.start_day.str();
  j["peak_day"] = s.peak_day().str();
  j["peak_day_index"] = s.peak_day_index;
  j["duration_days"] = s.duration_days;
  j["article_count"] = s.article_ids.size();
  j["outlet_count"] = s.outlet_count;
  j["pct_national"] = s.pct_national;
  j["storm_mode_outlets"] = s.storm_mode_outlets;
  j["daily_counts"] = s.daily_counts;
  j["daily_state_counts"] = s.daily_state_counts;
  j["articles"] = s.article_ids;
  return j;
}

/// Inverse of to_json(StormRecord); storm-mode events are not round-tripped.
inline StormRecord storm_from_json(const nlohmann::json& j) {
  StormRecord s;
  s.cluster_id = j.at("cluster_id").get<std::uint32_t>();
  s.start_day = Day::parse(j.at("start_day").get<std::string>());
  s.peak_day_index = j.at("peak_day_index").get<std::int32_t>();
  s.duration_days = j.at("duration_days").get<std::int32_t>();
  s.last_day = s.start_day + (s.duration_days - 1);
  s.outlet_count = j.at("outlet_count").get<std::size_t>();
  s.pct_national = j.at("pct_national").get<double>();
  s.storm_mode_outlets = j.at("storm_mode_outlets").get<std::vector<std::string>>();
  s.daily_counts = j.at("daily_counts").get<std::vector<std::int64_t>>();
  s.daily_state_counts = j.at("daily_state_counts").get<std::vector<std::int64_t>>();
  s.article_ids = j.at("articles").get<std::vector<ArticleId>>();
  return s;
}

inline nlohmann::ordered_json to_json(const StormModeEvent& e) {
  nlohmann::ordered_json j;
  j["outlet"] = e.outlet;
  j["window_start"] = e.window_start.str();
  j["share"] = e.share;
  j["outlet_window_total"] = e.outlet_window_total;
  j["cluster_window_count"] = e.cluster_window_count;
  return j;
}

namespace detail {
inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}
}  // namespace detail

/// Storm table: start date, peak date, length, article count, % national,
/// and an empty description column for manual annotation.
inline void write_storms_csv(std::ostream& out, std::span<const StormRecord> storms) {
  out << "cluster_id,start_date,peak_date,length_days,article_count,pct_national,description\n";
  for (const auto& s : storms)
    out << s.cluster_id << ',' << s.start_day.str() << ',' << s.peak_day().str() << ',' << s.duration_days << ','
        << s.article_ids.size() << ',' << detail::fixed(s.pct_national, 1) << ",\n";
}

}  // namespace stormpipe
