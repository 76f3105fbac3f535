#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "stormpipe/analysis.hpp"
#include "stormpipe/corpus.hpp"
#include "stormpipe/similarity.hpp"
#include "stormpipe/storms.hpp"

namespace stormpipe::synthetic {

enum class StoryKind { storm, near_miss, minor };

inline const char* to_string(StoryKind k) {
  switch (k) {
    case StoryKind::storm: return "storm";
    case StoryKind::near_miss: return "near_miss";
    case StoryKind::minor: return "minor";
  }
  return "minor";
}

/// Planted story. Storms use `mode_outlets` outlets publishing every day plus
/// `trickle_outlets` publishing every third day. When `articles` is set the
/// story instead spreads exactly that many articles over national and local
/// outlets at `national_pct` percent national.
///
/// Near-miss reasons:
///   duration - spans fewer than the minimum days, otherwise a storm
///   outlets  - too few storm-mode outlets even if share or volume were relaxed
///   share    - covered by many outlets, none above the share threshold
///   volume   - enough high-share outlets, but most have thin 3-day windows
struct StorySpec {
  std::string label;
  StoryKind kind = StoryKind::storm;
  std::string reason;
  std::int32_t start_day = 0;  // offset from corpus start
  std::int32_t duration = 7;
  std::int32_t mode_outlets = 5;
  std::int32_t trickle_outlets = 0;
  std::int32_t volume_outlets = 0;  // low-volume outlets at high share
  std::optional<std::int64_t> articles;
  double national_pct = 50.0;
};

struct GeneratorSpec {
  std::string start_date = "2021-01-01";
  std::int32_t days = 100;
  std::int32_t national_outlets = 20;
  std::int32_t local_outlets = 20;
  std::int32_t daily_volume = 22;
  std::int32_t low_volume_outlets = 12;
  std::int32_t low_daily_volume = 10;
  std::size_t entity_pool = 3000;
  double common_entity_rate = 0.25;
  std::size_t vocabulary = 20000;
  std::size_t topics = kDefaultTopicCount;
  std::size_t embed_dim = 256;
  std::uint64_t embed_seed = 0;
  std::int32_t minor_stories = 200;
  std::int32_t duplicates = 0;
  std::vector<StorySpec> stories;

  std::int64_t expected_articles() const {
    return static_cast<std::int64_t>(days) *
               ((national_outlets + local_outlets) * static_cast<std::int64_t>(daily_volume) +
                low_volume_outlets * static_cast<std::int64_t>(low_daily_volume)) +
           duplicates;
  }
};

/// One article slot of a planted story: outlet index and day offset from the story start.
struct Placement {
  std::int32_t outlet = 0;
  std::int32_t day = 0;
};

struct PlantedStory {
  StorySpec spec;
  std::vector<ArticleId> articles;  // ascending
  Day first_day;
  Day last_day;
};

struct GroundTruth {
  std::vector<PlantedStory> stories;

  std::vector<const PlantedStory*> of_kind(StoryKind k) const {
    std::vector<const PlantedStory*> out;
    for (const auto& s : stories)
      if (s.spec.kind == k) out.push_back(&s);
    return out;
  }
};

struct SyntheticCorpus {
  Corpus corpus;
  EmbeddingMatrix embeddings;
  GroundTruth truth;
};

/// Outlet layout: national high-volume, local high-volume, then local low-volume.
struct OutletPlan {
  std::vector<OutletProfile> profiles;
  std::vector<std::int32_t> daily_volume;
  std::vector<std::int32_t> national_high, local_high, low;
  std::vector<std::int32_t> high_interleaved;  // national/local alternating
};

inline OutletPlan plan_outlets(const GeneratorSpec& spec) {
  static const char* states[] = {"AL", "AZ", "CA", "CO", "FL", "GA", "IL", "MA", "MI", "MN", "NC", "NY",
                                 "OH", "OR", "PA", "TN", "TX", "VA", "WA", "WI"};
  static const Reliability ratings[] = {Reliability::reliable, Reliability::reliable, Reliability::mixed,
                                        Reliability::unreliable, Reliability::reliable, Reliability::unrated};
  OutletPlan p;
  auto add = [&](std::string name, Scope scope, std::optional<std::string> state, Reliability r, std::int32_t vol) {
    p.profiles.push_back({std::move(name), scope, std::move(state), r});
    p.daily_volume.push_back(vol);
    return static_cast<std::int32_t>(p.profiles.size() - 1);
  };
  char buf[32];
  for (std::int32_t i = 0; i < spec.national_outlets; ++i) {
    std::snprintf(buf, sizeof buf, "national-%03d", i);
    p.national_high.push_back(add(buf, Scope::national, std::nullopt, ratings[i % 6], spec.daily_volume));
  }
  for (std::int32_t i = 0; i < spec.local_outlets; ++i) {
    std::snprintf(buf, sizeof buf, "local-%03d", i);
    p.local_high.push_back(add(buf, Scope::local, states[i % 20], Reliability::unrated, spec.daily_volume));
  }
  for (std::int32_t i = 0; i < spec.low_volume_outlets; ++i) {
    std::snprintf(buf, sizeof buf, "smalltown-%03d", i);
    p.low.push_back(add(buf, Scope::local, states[(i + 7) % 20], Reliability::unrated, spec.low_daily_volume));
  }
  for (std::size_t i = 0; i < std::max(p.national_high.size(), p.local_high.size()); ++i) {
    if (i < p.national_high.size()) p.high_interleaved.push_back(p.national_high[i]);
    if (i < p.local_high.size()) p.high_interleaved.push_back(p.local_high[i]);
  }
  return p;
}

/// Article slots for a storm or near-miss story. `rotation` spreads stories
/// over different outlets.
inline std::vector<Placement> schedule_story(const StorySpec& s, const OutletPlan& plan, std::size_t rotation) {
  std::vector<Placement> out;
  const auto& high = plan.high_interleaved;
  if (high.empty()) throw ValidationError("generator spec has no high-volume outlets");
  auto pick = [&](std::size_t k) { return high[(rotation + k) % high.size()]; };

  if (s.articles) {
    const auto total = *s.articles;
    const auto national = static_cast<std::int64_t>(std::llround(static_cast<double>(total) * s.national_pct / 100.0));
    auto spread = [&](std::int64_t count, const std::vector<std::int32_t>& group) {
      if (count > 0 && group.empty()) throw ValidationError("story '" + s.label + "' needs outlets of a missing scope");
      for (std::int64_t k = 0; k < count; ++k)
        out.push_back({group[static_cast<std::size_t>((k / s.duration) % static_cast<std::int64_t>(group.size()))],
                       static_cast<std::int32_t>(k % s.duration)});
    };
    spread(national, plan.national_high);
    spread(total - national, plan.local_high);
    return out;
  }

  const auto modes = static_cast<std::size_t>(s.mode_outlets);
  const auto trickles = static_cast<std::size_t>(s.trickle_outlets);
  if (modes + trickles > high.size()) throw ValidationError("story '" + s.label + "' needs more outlets than exist");
  for (std::size_t m = 0; m < modes; ++m)
    for (std::int32_t d = 0; d < s.duration; ++d) {
      const int per_day = d < 3 ? 3 : 1;  // early peak, then steady coverage
      for (int r = 0; r < per_day; ++r) out.push_back({pick(m), d});
    }
  for (std::size_t t = 0; t < trickles; ++t)
    for (std::int32_t d = static_cast<std::int32_t>(t % 3); d < s.duration; d += 3) out.push_back({pick(modes + t), d});
  for (std::int32_t v = 0; v < s.volume_outlets; ++v) {
    if (plan.low.empty()) throw ValidationError("story '" + s.label + "' needs low-volume outlets");
    const auto o = plan.low[(rotation + static_cast<std::size_t>(v)) % plan.low.size()];
    for (std::int32_t d = 0; d < s.duration; ++d) {
      out.push_back({o, d});
      out.push_back({o, d});
    }
  }
  return out;
}

/// Classification of a schedule against the storm criteria, computed from
/// outlet daily volumes alone (no corpus). Returns "storm" or a near-miss
/// reason: duration, outlets, share, volume.
inline std::string classify_schedule(const std::vector<Placement>& placements, std::int32_t story_start,
                                     std::int32_t corpus_days, const std::vector<std::int32_t>& daily_volume,
                                     const StormCriteria& criteria) {
  std::map<std::int32_t, std::map<std::int32_t, std::int64_t>> per_outlet;  // outlet -> abs day -> count
  std::int32_t first = INT32_MAX, last = INT32_MIN;
  for (const auto& p : placements) {
    const auto day = story_start + p.day;
    ++per_outlet[p.outlet][day];
    first = std::min(first, day);
    last = std::max(last, day);
  }
  auto mode_outlets = [&](double share_threshold, std::int64_t min_window) {
    std::size_t n = 0;
    for (const auto& [outlet, days] : per_outlet) {
      bool mode = false;
      for (std::int32_t w = first - (criteria.window_days - 1); w <= last && !mode; ++w) {
        std::int64_t s = 0, t = 0;
        for (std::int32_t d = w; d < w + criteria.window_days; ++d) {
          if (d < 0 || d >= corpus_days) continue;
          t += daily_volume[static_cast<std::size_t>(outlet)];
          if (auto it = days.find(d); it != days.end()) s += it->second;
        }
        mode = s > 0 && t >= min_window && static_cast<double>(s) / static_cast<double>(t) >= share_threshold;
      }
      n += mode;
    }
    return n;
  };
  const std::size_t full = mode_outlets(criteria.share_threshold, criteria.min_window_articles);
  const bool long_enough = last - first + 1 >= criteria.min_duration;
  if (!long_enough) return full >= criteria.min_storm_outlets ? "duration" : "duration+outlets";
  if (full >= criteria.min_storm_outlets) return "storm";
  const bool by_share = mode_outlets(1e-12, criteria.min_window_articles) >= criteria.min_storm_outlets;
  const bool by_volume = mode_outlets(criteria.share_threshold, 0) >= criteria.min_storm_outlets;
  if (by_share && !by_volume) return "share";
  if (by_volume && !by_share) return "volume";
  if (!by_share && !by_volume) return "outlets";
  return "share+volume";
}

namespace detail {

inline std::string pseudo_word(std::size_t i) {
  static const char* syl[] = {"ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du", "fa", "fe", "fi", "fo", "fu",
                              "ga", "ge", "gi", "go", "gu", "ka", "ke", "ki", "ko", "ku", "la", "le", "li", "lo", "lu",
                              "ma", "me", "mi", "mo", "mu", "na", "ne", "ni", "no", "nu", "pa", "pe", "pi", "po", "pu",
                              "ra", "re", "ri", "ro", "ru", "sa", "se", "si", "so", "su", "ta", "te", "ti", "to", "tu"};
  constexpr std::size_t n = 60;
  std::string w = syl[i % n];
  w += syl[(i / n) % n];
  w += syl[(i / (n * n)) % n];
  return w;
}

inline std::string capitalized(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

inline std::string base36(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string s;
  do {
    s.insert(s.begin(), digits[v % 36]);
    v /= 36;
  } while (v);
  return s;
}

class TextSampler {
 public:
  TextSampler(std::size_t vocab, std::size_t topics) : k_(topics), by_topic_(topics) {
    words_.reserve(vocab);
    for (std::size_t i = 0; i < vocab; ++i) {
      words_.push_back(pseudo_word(i + 3600));  // three-syllable words only
      by_topic_[mix64(fnv1a(words_.back())) % k_].push_back(i);
    }
    for (const auto& b : by_topic_)
      if (b.empty()) throw ValidationError("vocabulary too small for the topic count");
  }

  /// `n` words, roughly half drawn from `topic`'s keyword bucket.
  std::string words(std::mt19937_64& rng, std::size_t n, std::size_t topic, double bias = 0.5) const {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> any(0, words_.size() - 1);
    const auto& bucket = by_topic_[topic % k_];
    std::uniform_int_distribution<std::size_t> in_bucket(0, bucket.size() - 1);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += ' ';
      out += words_[coin(rng) < bias ? bucket[in_bucket(rng)] : any(rng)];
    }
    return out;
  }

  std::size_t topics() const noexcept { return k_; }

 private:
  std::size_t k_;
  std::vector<std::string> words_;
  std::vector<std::vector<std::size_t>> by_topic_;
};

}  // namespace detail

/// Builds the corpus, mock embeddings and ground truth for `spec`.
///
/// Throws ValidationError when a planted story cannot be realized: its slots
/// exceed an outlet's daily volume, it leaves the corpus range, or its
/// schedule does not classify as its declared kind/reason.
inline SyntheticCorpus generate(const GeneratorSpec& spec, std::uint64_t seed,
                                const StormCriteria& criteria = {}) {
  if (spec.days <= 0) throw ValidationError("generator needs a positive day count");
  if (3 * spec.daily_volume < criteria.min_window_articles)
    throw ValidationError("high-volume outlets cannot reach the storm-mode window floor");
  const Day start = Day::parse(spec.start_date);
  const OutletPlan plan = plan_outlets(spec);
  const std::size_t n_outlets = plan.profiles.size();
  const auto days = static_cast<std::size_t>(spec.days);
  std::mt19937_64 rng(mix64(seed));

  // story index occupying each (outlet, day) slot; -1 = background
  std::vector<std::vector<std::vector<std::int32_t>>> slots(
      n_outlets, std::vector<std::vector<std::int32_t>>(days));
  std::vector<StorySpec> stories = spec.stories;

  auto place = [&](std::size_t story, const std::vector<Placement>& placements) {
    const auto& s = stories[story];
    for (const auto& p : placements) {
      const auto day = s.start_day + p.day;
      if (day < 0 || day >= spec.days)
        throw ValidationError("story '" + s.label + "' runs outside the corpus range");
      auto& cell = slots[static_cast<std::size_t>(p.outlet)][static_cast<std::size_t>(day)];
      if (static_cast<std::int32_t>(cell.size()) >= plan.daily_volume[static_cast<std::size_t>(p.outlet)])
        throw ValidationError("story '" + s.label + "' overfills outlet " + plan.profiles[static_cast<std::size_t>(p.outlet)].name);
      cell.push_back(static_cast<std::int32_t>(story));
    }
  };

  for (std::size_t i = 0; i < stories.size(); ++i) {
    const auto& s = stories[i];
    if (s.kind == StoryKind::minor) throw ValidationError("minor stories are generated, not declared");
    const auto placements = schedule_story(s, plan, i * 7);
    const auto verdict = classify_schedule(placements, s.start_day, spec.days, plan.daily_volume, criteria);
    const std::string expected = s.kind == StoryKind::storm ? "storm" : s.reason;
    if (verdict != expected)
      throw ValidationError("story '" + s.label + "' classifies as '" + verdict + "', declared '" + expected + "'");
    place(i, placements);
  }

  // Minor stories: 2-6 articles over 1-4 days from 1-3 outlets; never storms.
  {
    std::uniform_int_distribution<std::int32_t> n_articles(2, 6), span(1, 4), n_src(1, 3);
    std::uniform_int_distribution<std::size_t> outlet(0, plan.high_interleaved.size() - 1);
    for (std::int32_t m = 0; m < spec.minor_stories; ++m) {
      StorySpec s;
      s.label = "minor-" + std::to_string(m);
      s.kind = StoryKind::minor;
      s.duration = std::min(span(rng), spec.days);
      std::uniform_int_distribution<std::int32_t> start_pick(0, spec.days - s.duration);
      s.start_day = start_pick(rng);
      const auto count = n_articles(rng);
      std::vector<std::int32_t> src;
      for (std::int32_t k = n_src(rng); k > 0; --k) src.push_back(plan.high_interleaved[outlet(rng)]);
      std::vector<Placement> placements;
      for (std::int32_t k = 0; k < count; ++k)
        placements.push_back({src[static_cast<std::size_t>(k) % src.size()],
                              k == 0 ? 0 : (k == count - 1 ? s.duration - 1 : std::uniform_int_distribution<std::int32_t>(0, s.duration - 1)(rng))});
      // skip rather than fail when random placement collides with a full slot
      bool fits = true;
      std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> extra;
      for (const auto& p : placements) {
        const auto day = s.start_day + p.day;
        const auto used = static_cast<std::int32_t>(slots[static_cast<std::size_t>(p.outlet)][static_cast<std::size_t>(day)].size()) +
                          ++extra[{p.outlet, day}];
        fits = fits && used <= plan.daily_volume[static_cast<std::size_t>(p.outlet)];
      }
      if (!fits) continue;
      stories.push_back(s);
      place(stories.size() - 1, placements);
    }
  }

  const detail::TextSampler sampler(spec.vocabulary, spec.topics);
  struct StoryText {
    std::string headline, body;
    std::vector<Entity> entities;
  };
  std::vector<StoryText> story_text;
  story_text.reserve(stories.size());
  for (std::size_t i = 0; i < stories.size(); ++i) {
    const std::size_t topic = mix64(seed ^ (i * 0x9e37ULL)) % spec.topics;
    StoryText t;
    t.headline = sampler.words(rng, 5, topic, 0.6);
    t.body = sampler.words(rng, 150, topic, 0.6);
    const std::string who = detail::capitalized(detail::pseudo_word(500000 + 2 * i)) + " " +
                            detail::capitalized(detail::pseudo_word(500001 + 2 * i));
    t.entities = {{who, "PERSON"}, {"Operation " + detail::capitalized(detail::pseudo_word(700000 + i)), "EVENT"}};
    story_text.push_back(std::move(t));
  }
  std::vector<std::string> pool;
  pool.reserve(spec.entity_pool);
  for (std::size_t e = 0; e < spec.entity_pool; ++e)
    pool.push_back(detail::capitalized(detail::pseudo_word(100000 + e)) + " " + (e % 2 ? "Group" : "Institute"));
  static const char* places[] = {"Ohio", "Texas", "Florida", "Georgia", "Oregon", "Maine", "Utah", "Iowa"};

  std::vector<Article> articles;
  articles.reserve(static_cast<std::size_t>(spec.expected_articles()));
  std::vector<std::vector<ArticleId>> members(stories.size());
  std::uniform_int_distribution<std::size_t> pool_pick(0, std::max<std::size_t>(spec.entity_pool, 1) - 1);
  std::uniform_int_distribution<std::size_t> topic_pick(0, spec.topics - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  ArticleId next_id = 0;
  for (std::size_t d = 0; d < days; ++d) {
    for (std::size_t o = 0; o < n_outlets; ++o) {
      const auto& cell = slots[o][d];
      for (std::int32_t k = 0; k < plan.daily_volume[o]; ++k) {
        Article a;
        a.id = next_id++;
        a.outlet = plan.profiles[o].name;
        a.date = start + static_cast<std::int32_t>(d);
        std::vector<Entity> ents;
        if (k < static_cast<std::int32_t>(cell.size())) {
          const auto story = static_cast<std::size_t>(cell[static_cast<std::size_t>(k)]);
          const auto& t = story_text[story];
          a.title = t.headline + " " + detail::base36(a.id);
          a.text = t.body;
          ents = t.entities;
          if (spec.entity_pool) ents.push_back({pool[pool_pick(rng)], "ORG"});
          members[story].push_back(a.id);
        } else {
          const std::size_t topic = topic_pick(rng);
          a.title = sampler.words(rng, 6, topic) + " " + detail::base36(a.id);
          a.text = sampler.words(rng, 40, topic);
          if (spec.entity_pool) {
            ents.push_back({pool[pool_pick(rng)], "ORG"});
            ents.push_back({pool[pool_pick(rng)], "PERSON"});
          }
          if (coin(rng) < spec.common_entity_rate) ents.push_back({"White House", "ORG"});
        }
        ents.push_back({places[a.id % 8], "GPE"});
        a.entities = std::move(ents);
        a.topics = keyword_bucket_topics(a.title + " " + a.text, spec.topics);
        articles.push_back(std::move(a));
      }
    }
  }
  if (spec.duplicates > 0) {
    std::uniform_int_distribution<std::size_t> any(0, articles.size() - 1);
    const std::size_t base = articles.size();
    for (std::int32_t k = 0; k < spec.duplicates; ++k) {
      Article copy = articles[any(rng) % base];
      copy.id = next_id++;
      if (copy.date < start + (spec.days - 1)) copy.date += 1;
      articles.push_back(std::move(copy));
    }
  }

  std::map<std::string, OutletProfile> outlets;
  for (const auto& p : plan.profiles) outlets.emplace(p.name, p);
  SyntheticCorpus out;
  out.corpus = Corpus(std::move(articles), std::move(outlets), DateRange{start, start + (spec.days - 1)});
  out.embeddings = mock_embed_corpus(out.corpus, spec.embed_dim, spec.embed_seed);
  for (std::size_t i = 0; i < stories.size(); ++i) {
    PlantedStory ps;
    ps.spec = stories[i];
    ps.articles = std::move(members[i]);
    std::sort(ps.articles.begin(), ps.articles.end());
    ps.first_day = start + stories[i].start_day;
    ps.last_day = start + (stories[i].start_day + stories[i].duration - 1);
    out.truth.stories.push_back(std::move(ps));
  }
  return out;
}

/// The 100,000-article benchmark: 10 planted storms and 20 near-misses
/// (5 per reason) over 100 days.
inline GeneratorSpec benchmark_spec() {
  GeneratorSpec spec;
  const std::int32_t durations[] = {7, 9, 12, 15, 21, 8, 30, 11, 18, 25};
  const std::int32_t modes[] = {5, 6, 8, 5, 12, 7, 9, 5, 10, 6};
  const std::int32_t trickles[] = {0, 4, 2, 6, 3, 0, 5, 8, 1, 2};
  for (int i = 0; i < 10; ++i) {
    StorySpec s;
    s.label = "storm-" + std::to_string(i);
    s.kind = StoryKind::storm;
    s.start_day = 4 + 9 * i;
    s.duration = std::min(durations[i], 95 - s.start_day);
    s.mode_outlets = modes[i];
    s.trickle_outlets = trickles[i];
    spec.stories.push_back(s);
  }
  const char* reasons[] = {"duration", "outlets", "share", "volume"};
  for (int r = 0; r < 4; ++r)
    for (int i = 0; i < 5; ++i) {
      StorySpec s;
      s.kind = StoryKind::near_miss;
      s.reason = reasons[r];
      s.label = std::string("near-") + reasons[r] + "-" + std::to_string(i);
      s.start_day = 6 + 17 * i + 4 * r;
      s.duration = r == 0 ? 6 : 8 + i;
      s.mode_outlets = r == 0 ? 6 : r == 1 ? 4 : r == 2 ? 0 : 2;
      s.trickle_outlets = r == 2 ? 6 + i : 0;
      s.volume_outlets = r == 3 ? 4 : 0;
      spec.stories.push_back(s);
    }
  return spec;
}

/// One storm shaped after a long trial story: 54 days, 1378 articles, half
/// national, starting 2021-03-04.
inline GeneratorSpec long_trial_spec() {
  GeneratorSpec spec;
  spec.start_date = "2021-02-01";
  spec.days = 90;
  spec.national_outlets = 15;
  spec.local_outlets = 15;
  spec.low_volume_outlets = 4;
  spec.minor_stories = 50;
  StorySpec s;
  s.label = "long-trial";
  s.kind = StoryKind::storm;
  s.start_day = 31;
  s.duration = 54;
  s.articles = 1378;
  s.national_pct = 50.0;
  spec.stories.push_back(s);
  return spec;
}

// ---------------------------------------------------------------------------
// JSON

inline StorySpec story_from_json(const nlohmann::json& j) {
  StorySpec s;
  s.label = j.at("label").get<std::string>();
  const auto kind = j.value("kind", std::string("storm"));
  if (kind == "storm") s.kind = StoryKind::storm;
  else if (kind == "near_miss") s.kind = StoryKind::near_miss;
  else throw ValidationError("story kind must be storm or near_miss");
  s.reason = j.value("reason", std::string());
  s.start_day = j.value("start_day", 0);
  s.duration = j.value("duration", 7);
  s.mode_outlets = j.value("mode_outlets", 5);
  s.trickle_outlets = j.value("trickle_outlets", 0);
  s.volume_outlets = j.value("volume_outlets", 0);
  if (j.contains("articles")) s.articles = j.at("articles").get<std::int64_t>();
  s.national_pct = j.value("national_pct", 50.0);
  return s;
}

inline GeneratorSpec spec_from_json(const nlohmann::json& j) {
  GeneratorSpec s;
  s.start_date = j.value("start_date", s.start_date);
  s.days = j.value("days", s.days);
  s.national_outlets = j.value("national_outlets", s.national_outlets);
  s.local_outlets = j.value("local_outlets", s.local_outlets);
  s.daily_volume = j.value("daily_volume", s.daily_volume);
  s.low_volume_outlets = j.value("low_volume_outlets", s.low_volume_outlets);
  s.low_daily_volume = j.value("low_daily_volume", s.low_daily_volume);
  s.entity_pool = j.value("entity_pool", s.entity_pool);
  s.common_entity_rate = j.value("common_entity_rate", s.common_entity_rate);
  s.vocabulary = j.value("vocabulary", s.vocabulary);
  s.topics = j.value("topics", s.topics);
  s.embed_dim = j.value("embed_dim", s.embed_dim);
  s.embed_seed = j.value("embed_seed", s.embed_seed);
  s.minor_stories = j.value("minor_stories", s.minor_stories);
  s.duplicates = j.value("duplicates", s.duplicates);
  if (j.contains("stories"))
    for (const auto& st : j.at("stories")) s.stories.push_back(story_from_json(st));
  return s;
}

inline nlohmann::ordered_json to_json(const GroundTruth& truth, std::int64_t total_articles) {
  nlohmann::ordered_json j;
  j["articles"] = total_articles;
  auto stories = nlohmann::ordered_json::array();
  auto storms = nlohmann::ordered_json::array();
  auto near = nlohmann::ordered_json::array();
  for (const auto& s : truth.stories) {
    nlohmann::ordered_json st;
    st["label"] = s.spec.label;
    st["kind"] = to_string(s.spec.kind);
    if (!s.spec.reason.empty()) st["reason"] = s.spec.reason;
    st["first_day"] = s.first_day.str();
    st["last_day"] = s.last_day.str();
    st["articles"] = s.articles;
    stories.push_back(std::move(st));
    if (s.spec.kind == StoryKind::storm) storms.push_back(s.spec.label);
    if (s.spec.kind == StoryKind::near_miss) near.push_back({{"label", s.spec.label}, {"reason", s.spec.reason}});
  }
  j["storms"] = std::move(storms);
  j["near_misses"] = std::move(near);
  j["stories"] = std::move(stories);
  return j;
}

struct WrittenFiles {
  std::string articles, outlets, embeddings, ids, truth;
};

/// Writes articles.jsonl, outlets.jsonl, embeddings.emb/.ids and ground_truth.json into `dir`.
inline WrittenFiles write(const SyntheticCorpus& sc, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WrittenFiles f{(dir / "articles.jsonl").string(), (dir / "outlets.jsonl").string(),
                 (dir / "embeddings.emb").string(), (dir / "embeddings.ids").string(),
                 (dir / "ground_truth.json").string()};
  {
    std::ofstream out(f.articles);
    write_articles_jsonl(sc.corpus, out);
  }
  {
    std::ofstream out(f.outlets);
    write_outlets_jsonl(sc.corpus.outlets(), out);
  }
  save_embeddings(sc.embeddings, f.embeddings, f.ids);
  {
    std::ofstream out(f.truth);
    out << to_json(sc.truth, static_cast<std::int64_t>(sc.corpus.size())).dump(1) << '\n';
  }
  return f;
}

}  // namespace stormpipe::synthetic
