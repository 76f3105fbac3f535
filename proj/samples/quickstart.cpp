// Library-level walk through the pipeline on a small synthetic corpus:
// generate, block by shared entities, score, cluster, and flag storms.

#include <iostream>

#include "stormpipe/stormpipe.hpp"

int main() {
  using namespace stormpipe;

  synthetic::GeneratorSpec spec;
  spec.days = 40;
  spec.minor_stories = 20;
  spec.common_entity_rate = 0.02;
  synthetic::StorySpec storm;
  storm.label = "planted";
  storm.kind = synthetic::StoryKind::storm;
  storm.start_day = 5;
  storm.duration = 12;
  storm.mode_outlets = 6;
  spec.stories.push_back(storm);
  const auto sc = synthetic::generate(spec, 7);

  const auto index = build_index(sc.corpus, default_entity_types());
  const auto pairs = generate_candidates(index, sc.corpus);
  const auto scored = score_candidates(pairs, sc.embeddings);

  std::vector<ArticleId> ids;
  for (const auto& a : sc.corpus.articles()) ids.push_back(a.id);
  const auto clusters = build_story_clusters(connected_components(scored.edges, ids), sc.corpus);
  const auto storms = identify_storms(clusters, sc.corpus);

  std::cout << sc.corpus.size() << " articles, " << pairs.size() << " candidate pairs, " << scored.edges.size()
            << " edges, " << clusters.size() << " clusters, " << storms.size() << " storm(s)\n";
  write_storms_csv(std::cout, storms);
}
