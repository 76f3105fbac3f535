#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"

using namespace stormpipe;
using stormpipe::testing::BoundaryCase;
using stormpipe::testing::CorpusBuilder;
using stormpipe::testing::kBase;

namespace {

StormRecord record_with_counts(std::vector<std::int64_t> counts) {
  StormRecord r;
  r.daily_counts = std::move(counts);
  r.duration_days = static_cast<std::int32_t>(r.daily_counts.size());
  return r;
}

bool is_storm(const BoundaryCase& bc) {
  const auto [corpus, cluster] = stormpipe::testing::boundary_fixture(bc);
  return identify_storms(std::vector<StoryCluster>{cluster}, corpus).size() == 1;
}

}  // namespace

TEST(StormMode, InclusiveShareBoundary) {
  CorpusBuilder b;
  b.outlet("a");
  std::vector<ArticleId> members;
  for (int k = 0; k < 100; ++k) {
    const auto id = b.add("a", 1);
    if (k < 3) members.push_back(id);
  }
  const auto corpus = b.build(3);
  const auto events = detect_storm_mode(stormpipe::testing::cluster_of(corpus, members), corpus);
  ASSERT_FALSE(events.empty());
  for (const auto& e : events) {
    EXPECT_EQ(e.outlet_window_total, 100);
    EXPECT_EQ(e.cluster_window_count, 3);
    EXPECT_DOUBLE_EQ(e.share, 0.03);
  }
}

TEST(StormMode, WindowFloorOfForty) {
  CorpusBuilder b;
  b.outlet("a");
  std::vector<ArticleId> members;
  for (int k = 0; k < 39; ++k) {
    const auto id = b.add("a", 1);
    if (k < 5) members.push_back(id);
  }
  const auto corpus = b.build(3);
  EXPECT_TRUE(detect_storm_mode(stormpipe::testing::cluster_of(corpus, members), corpus).empty());
}

TEST(StormMode, HandEnumeratedFourOutletTenDays) {
  // Daily volume: A 20, B 13, C 14, E 15, every day 0..9.
  // Members: A 2 on day 3; B 1 on day 4; C 1 on days 5 and 6; E 1 on days 8 and 9.
  CorpusBuilder b;
  b.outlet("A").outlet("B").outlet("C").outlet("E");
  const std::map<std::string, int> volume{{"A", 20}, {"B", 13}, {"C", 14}, {"E", 15}};
  const std::map<std::pair<std::string, int>, int> member_days{
      {{"A", 3}, 2}, {{"B", 4}, 1}, {{"C", 5}, 1}, {{"C", 6}, 1}, {{"E", 8}, 1}, {{"E", 9}, 1}};
  std::vector<ArticleId> members;
  for (int d = 0; d < 10; ++d)
    for (const auto& [o, v] : volume) {
      auto it = member_days.find({o, d});
      const int m = it == member_days.end() ? 0 : it->second;
      for (int k = 0; k < v; ++k) {
        const auto id = b.add(o, d);
        if (k < m) members.push_back(id);
      }
    }
  const auto corpus = b.build(10);
  const auto cluster = stormpipe::testing::cluster_of(corpus, members);
  ASSERT_EQ(cluster.first_day, kBase + 3);
  ASSERT_EQ(cluster.last_day, kBase + 9);

  // Windows start at days 1..9. Hand tally (outlet, start, S, T):
  //   A: starts 1,2,3 hold day 3: S=2, T=60, 3.33%          -> events
  //   B: every window T=39 < 40                              -> none
  //   C: start 3 S=1/42; starts 4,5 S=2/42 (4.76%); 6 S=1/42 -> starts 4,5
  //   E: start 6 S=1/45; start 7 S=2/45 (4.44%); starts 8,9 run past day 9, T=30,15 -> start 7
  struct Want {
    std::string outlet;
    int start;
    std::int64_t s, t;
  };
  const std::vector<Want> want{{"A", 1, 2, 60}, {"A", 2, 2, 60}, {"A", 3, 2, 60},
                               {"C", 4, 2, 42}, {"C", 5, 2, 42}, {"E", 7, 2, 45}};
  const auto events = detect_storm_mode(cluster, corpus);
  ASSERT_EQ(events.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(events[i].outlet, want[i].outlet);
    EXPECT_EQ(events[i].window_start, kBase + want[i].start);
    EXPECT_EQ(events[i].cluster_window_count, want[i].s);
    EXPECT_EQ(events[i].outlet_window_total, want[i].t);
  }
}

TEST(StormMode, MatchesScanningOracleOnRandomCorpora) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    CorpusBuilder b;
    std::uniform_int_distribution<int> vol(5, 30), coin(0, 9);
    std::vector<ArticleId> members;
    for (int o = 0; o < 4; ++o) b.outlet("o" + std::to_string(o));
    for (int d = 0; d < 12; ++d)
      for (int o = 0; o < 4; ++o)
        for (int k = vol(rng); k > 0; --k) {
          const auto id = b.add("o" + std::to_string(o), d);
          if (coin(rng) == 0 && d >= 2 && d <= 9) members.push_back(id);
        }
    if (members.empty()) continue;
    const auto corpus = b.build(12);
    const std::set<ArticleId> member_set(members.begin(), members.end());
    const auto events = detect_storm_mode(stormpipe::testing::cluster_of(corpus, members), corpus);
    std::vector<oracle::ModeWindow> got;
    for (const auto& e : events)
      got.push_back({e.outlet, e.window_start.serial(), e.cluster_window_count, e.outlet_window_total});
    EXPECT_EQ(got, oracle::storm_mode(corpus, member_set, 3, 0.03, 40));
  }
}

TEST(Storms, BoundaryCasesInclusive) {
  EXPECT_TRUE(is_storm({7, 5, 100, 10}));
  EXPECT_TRUE(is_storm({7, 5, 100, 3}));
  EXPECT_TRUE(is_storm({7, 5, 40, 2}));
  EXPECT_FALSE(is_storm({6, 5, 100, 10}));
  EXPECT_FALSE(is_storm({7, 4, 100, 10}));
  EXPECT_FALSE(is_storm({7, 5, 39, 2}));
  EXPECT_FALSE(is_storm({7, 5, 100, 2}));
}

TEST(Storms, SixDaysWithTenOutletsIsNotAStorm) { EXPECT_FALSE(is_storm({6, 10, 100, 10})); }

TEST(Storms, RecordFieldsAndInvariants) {
  const auto [corpus, cluster] = stormpipe::testing::boundary_fixture({9, 6, 100, 10});
  const auto storms = identify_storms(std::vector<StoryCluster>{cluster}, corpus);
  ASSERT_EQ(storms.size(), 1u);
  const auto& s = storms[0];
  EXPECT_EQ(s.duration_days, 9);
  EXPECT_EQ(s.start_day, kBase);
  EXPECT_EQ(s.article_ids, cluster.article_ids);
  EXPECT_EQ(s.storm_mode_outlets.size(), 6u);
  EXPECT_EQ(s.outlet_count, 7u);
  EXPECT_EQ(s.peak_day_index, 1);
  EXPECT_EQ(s.daily_counts.front(), 61);
  EXPECT_EQ(s.daily_state_counts, std::vector<std::int64_t>(9, 1));
  std::int64_t total = 0;
  for (auto c : s.daily_counts) total += c;
  EXPECT_EQ(total, static_cast<std::int64_t>(s.article_ids.size()));
  EXPECT_NEAR(s.pct_national, 100.0 * 60.0 / 69.0, 1e-12);
}

TEST(Storms, ThresholdMonotonicity) {
  std::mt19937_64 rng(3);
  std::vector<std::pair<Corpus, StoryCluster>> fixtures;
  for (int i = 0; i < 12; ++i) {
    std::uniform_int_distribution<int> dur(5, 10), outs(3, 8), mem(1, 8);
    fixtures.push_back(stormpipe::testing::boundary_fixture({dur(rng), outs(rng), 100, mem(rng)}));
  }
  auto count = [&](StormCriteria c) {
    std::size_t n = 0;
    for (const auto& [corpus, cluster] : fixtures) n += identify_storms(std::vector<StoryCluster>{cluster}, corpus, c).size();
    return n;
  };
  StormCriteria base;
  const auto n0 = count(base);
  for (double share : {0.04, 0.06, 0.08}) {
    StormCriteria c = base;
    c.share_threshold = share;
    EXPECT_LE(count(c), n0);
  }
  for (int d : {8, 9}) {
    StormCriteria c = base;
    c.min_duration = d;
    EXPECT_LE(count(c), n0);
  }
  for (std::size_t o : {6u, 7u}) {
    StormCriteria c = base;
    c.min_storm_outlets = o;
    EXPECT_LE(count(c), n0);
  }
}

TEST(TimeSeries, SingleDayAndStates) {
  CorpusBuilder b;
  b.outlet("n").outlet("l1", Scope::local, "OH").outlet("l2", Scope::local, "OH").outlet("l3", Scope::local, "TX");
  std::vector<ArticleId> ids{b.add("n", 0), b.add("l1", 0), b.add("l2", 0), b.add("l3", 0), b.add("l3", 0)};
  const auto corpus = b.build();
  const auto s = storm_time_series(ids, kBase, 1, corpus);
  EXPECT_EQ(s.daily_counts, std::vector<std::int64_t>{5});
  EXPECT_EQ(s.daily_state_counts, std::vector<std::int64_t>{2});

  CorpusBuilder n;
  n.outlet("x").outlet("y");
  std::vector<ArticleId> nat{n.add("x", 0), n.add("y", 1), n.add("x", 3)};
  const auto nc = n.build();
  const auto ns = storm_time_series(nat, kBase, 4, nc);
  EXPECT_EQ(ns.daily_counts, (std::vector<std::int64_t>{1, 1, 0, 1}));
  EXPECT_EQ(ns.daily_state_counts, (std::vector<std::int64_t>{0, 0, 0, 0}));
}

TEST(Summary, ExamplesAndErrors) {
  StormRecord one;
  one.article_ids.resize(51);
  one.duration_days = 7;
  one.outlet_count = 5;
  one.pct_national = 40.0;
  const auto s = storm_summary(std::vector<StormRecord>{one});
  EXPECT_EQ(s.articles.min, 51);
  EXPECT_EQ(s.articles.max, 51);
  EXPECT_EQ(s.articles.mean, 51);
  EXPECT_EQ(s.articles.median, 51);
  EXPECT_THROW(storm_summary(std::vector<StormRecord>{}), ValidationError);

  EXPECT_EQ(median({7.0, 11.0}), 9.0);
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
}

TEST(Summary, MatchesOracleOnRandomStorms) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    std::uniform_int_distribution<int> n(1, 40), art(51, 1378), dur(7, 60), outs(5, 200);
    std::uniform_real_distribution<double> pct(0, 100);
    std::vector<StormRecord> storms(static_cast<std::size_t>(n(rng)));
    std::vector<double> a, d, o, p;
    for (auto& s : storms) {
      s.article_ids.resize(static_cast<std::size_t>(art(rng)));
      s.duration_days = dur(rng);
      s.outlet_count = static_cast<std::size_t>(outs(rng));
      s.pct_national = pct(rng);
      a.push_back(static_cast<double>(s.article_ids.size()));
      d.push_back(s.duration_days);
      o.push_back(static_cast<double>(s.outlet_count));
      p.push_back(s.pct_national);
    }
    const auto sum = storm_summary(storms);
    auto check = [](const FeatureStats& f, const std::vector<double>& v) {
      EXPECT_EQ(f.min, *std::min_element(v.begin(), v.end()));
      EXPECT_EQ(f.max, *std::max_element(v.begin(), v.end()));
      EXPECT_NEAR(f.mean, oracle::mean(v), 1e-9);
      EXPECT_NEAR(f.median, oracle::median(v), 1e-9);
      EXPECT_LE(f.min, f.median);
      EXPECT_LE(f.median, f.max);
    };
    check(sum.articles, a);
    check(sum.duration, d);
    check(sum.outlets, o);
    check(sum.pct_national, p);
  }
}

TEST(Ecdf, ExamplesAndOracle) {
  const auto e = duration_ecdf({7, 10, 10, 20});
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[1].x, 10);
  EXPECT_EQ(e[1].cdf, 0.75);
  EXPECT_EQ(duration_ecdf({5})[0], (EcdfPoint{5, 1.0}));
  EXPECT_THROW(duration_ecdf({}), ValidationError);

  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> d(1, 90);
  std::vector<double> v(1000);
  for (auto& x : v) x = d(rng);
  for (const auto& p : duration_ecdf(v)) EXPECT_NEAR(p.cdf, oracle::ecdf_at(v, p.x), 1e-12);
}

TEST(Peaks, TiesAndMonotone) {
  EXPECT_EQ(peak_day_index(std::vector<std::int64_t>{5, 9, 9, 2}), 2);
  EXPECT_EQ(peak_day_index(std::vector<std::int64_t>{9, 7, 3, 1}), 1);
  const std::vector<StormRecord> storms{record_with_counts({5, 9, 9, 2}), record_with_counts({9, 1}),
                                        record_with_counts({1, 2, 3, 4, 5}), record_with_counts({8, 1, 1})};
  const auto p = peak_statistics(storms);
  EXPECT_EQ(p.mode, 1);
  EXPECT_EQ(p.median, 1.5);
  EXPECT_EQ(p.histogram.at(1), 2u);
  EXPECT_EQ(p.histogram.at(2), 1u);
  EXPECT_EQ(p.histogram.at(5), 1u);
}

TEST(AverageSeries, IdenticalStormsZeroWidth) {
  const std::vector<StormRecord> storms(5, record_with_counts({4, 8, 2}));
  const auto b = average_storm_series(storms, SeriesKind::articles, 5, 200, 1);
  for (std::size_t d = 0; d < 5; ++d) {
    EXPECT_EQ(b.lower[d], b.mean[d]);
    EXPECT_EQ(b.upper[d], b.mean[d]);
  }
  EXPECT_EQ(b.mean, (std::vector<double>{4, 8, 2, 0, 0}));
}

TEST(AverageSeries, TwoStormsDayOneMean) {
  const std::vector<StormRecord> storms{record_with_counts({10}), record_with_counts({20})};
  EXPECT_EQ(average_storm_series(storms, SeriesKind::articles, 30, 100, 0).mean[0], 15.0);
  EXPECT_THROW(average_storm_series(std::vector<StormRecord>{record_with_counts({1})}, SeriesKind::articles),
               ValidationError);
}

TEST(AverageSeries, MeanMatchesColumnOracleAndBandsContainIt) {
  std::mt19937_64 rng(50);
  std::vector<StormRecord> storms;
  std::vector<std::vector<double>> rows;
  std::uniform_int_distribution<int> len(7, 45), cnt(0, 80);
  for (int i = 0; i < 50; ++i) {
    std::vector<std::int64_t> c(static_cast<std::size_t>(len(rng)));
    for (auto& x : c) x = cnt(rng);
    rows.emplace_back(c.begin(), c.end());
    storms.push_back(record_with_counts(c));
  }
  const auto b = average_storm_series(storms, SeriesKind::articles, 30, 1000, 5);
  const auto want = oracle::column_mean(rows, 30);
  for (std::size_t d = 0; d < 30; ++d) {
    EXPECT_NEAR(b.mean[d], want[d], 1e-9);
    EXPECT_LE(b.lower[d], b.mean[d]);
    EXPECT_GE(b.upper[d], b.mean[d]);
  }
  EXPECT_EQ(average_storm_series(storms, SeriesKind::articles, 30, 1000, 5).lower, b.lower);
}

TEST(Export, CsvColumnsAndJsonRoundTrip) {
  const auto [corpus, cluster] = stormpipe::testing::boundary_fixture({8, 5, 100, 10});
  const auto storms = identify_storms(std::vector<StoryCluster>{cluster}, corpus);
  ASSERT_EQ(storms.size(), 1u);
  std::ostringstream csv;
  write_storms_csv(csv, storms);
  EXPECT_EQ(csv.str(),
            "cluster_id,start_date,peak_date,length_days,article_count,pct_national,description\n"
            "0,2021-01-01,2021-01-01,8,58,86.2,\n");
  auto back = storm_from_json(nlohmann::json::parse(to_json(storms[0]).dump()));
  back.events = storms[0].events;
  EXPECT_EQ(back, storms[0]);
}
