#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flock/kg.hpp"
#include "flock/rational.hpp"
#include "flock/rng.hpp"

namespace flock {

struct WalkStep {
  int rel = 0;
  Direction dir = Direction::kForward;
  int node = 0;
  friend bool operator==(const WalkStep&, const WalkStep&) = default;
  friend auto operator<=>(const WalkStep&, const WalkStep&) = default;
};

// A sampled relational path v0 -r1-> v1 -r2-> ... of fixed length.
struct Walk {
  int start = 0;
  std::vector<WalkStep> steps;

  int length() const { return static_cast<int>(steps.size()); }
  int node_at(int s) const { return s == 0 ? start : steps[s - 1].node; }
  friend bool operator==(const Walk&, const Walk&) = default;
  friend auto operator<=>(const Walk&, const Walk&) = default;
};

Walk apply_isomorphism(const Walk& w, const Isomorphism& iso);

enum class StartScenario : uint8_t {
  kQueryHead = 0,
  kQueryRelation = 1,
  kRandom = 2,
  kQueryTail = 3,  // relation-prediction queries only
};

// Scenario block layout for a batch with base count n: entity queries
// get [head x n][relation x n][random x n], relation queries additionally
// [tail x n].
std::vector<StartScenario> batch_scenarios(const Query& q, int n);

struct WalkBatch {
  std::vector<Walk> walks;
  std::vector<StartScenario> scenario_tags;
};

// One transition of the non-backtracking uniform walk: the next node is
// uniform over N(cur) \ {prev} (forced back to prev when that is the only
// neighbor), then the connecting edge is uniform over all parallel edges
// in either orientation. prev < 0 means no previous node (first step).
WalkStep sample_step(const GraphView& g, int prev, int cur, Rng& rng);

// Start node + first step under a scenario. Falls back to a random start
// (with a warning) when the scenario is impossible: query head or tail
// isolated, or the query relation has no edges.
struct WalkStart {
  int start = 0;
  WalkStep first;
};
WalkStart sample_start(const GraphView& g, const Query& q, StartScenario scenario, Rng& rng);

Walk sample_walk(const GraphView& g, const Query& q, StartScenario scenario, int length,
                 Rng& rng);

// 3n walks (entity query) or 4n walks (relation query) of the given
// length; walk j uses rng.substream(j), so the batch is reproducible and
// walks may be sampled concurrently.
WalkBatch sample_walk_batch(const GraphView& g, const Query& q, int n, int length,
                            const Rng& rng);

// Test-time walk-count adaptation: scale the pretraining base count by the
// harmonic mean of node/edge size ratios, snap to the nearest power of two
// (ties round up), then clamp.
struct WalkCountPolicy {
  int n_train = 128;
  double mean_train_entities = 1.0;
  double mean_train_edges = 1.0;
  int clamp_min = 16;
  int clamp_max = 512;
};
int adapt_walk_count(const WalkCountPolicy& policy, long num_entities, long num_edges);

// Exhaustive walk distribution per scenario with exact probabilities.
// Only for tiny instances; the per-scenario probabilities sum to 1.
struct WalkDistribution {
  StartScenario scenario;
  std::vector<std::pair<Walk, Rational>> outcomes;
};
std::vector<WalkDistribution> enumerate_walk_distribution(const GraphView& g, const Query& q,
                                                          int length,
                                                          long max_outcomes = 200000);

// Edge-cover statistics for the walk-bench command: fraction of sampled
// walks (random scenario mix irrelevant here: uniform random starts) that
// traverse every edge of g at least once within the given length, plus the
// mean step count at which covering walks completed.
struct CoverStats {
  int length = 0;
  double cover_fraction = 0.0;
  double mean_steps_to_cover = 0.0;  // over covering walks; 0 if none
};
CoverStats measure_edge_cover(const KnowledgeGraph& g, int length, int samples, const Rng& rng);

}  // namespace flock
