#pragma once

#include <string>
#include <vector>

#include "flock/model.hpp"
#include "flock/record.hpp"
#include "flock/walk.hpp"

namespace flock {

// Uniformly random entity/relation permutations for g.
Isomorphism random_isomorphism(const KnowledgeGraph& g, Rng& rng);

// Small connected multi-relational graph for enumeration-sized checks.
KnowledgeGraph random_small_graph(Rng& rng, int num_entities, int num_relations,
                                  int extra_edges);

struct InvarianceCase {
  KnowledgeGraph graph;
  Query query;
  Isomorphism iso;
  int walk_len = 3;
};

// Randomized case within the enumeration budget (<= 8 nodes, length <= 4).
InvarianceCase random_invariance_case(Rng& rng);

struct InvarianceReport {
  bool passed = true;
  std::string failure;  // witness description when failed
  long walks_checked = 0;
};

// Exact checks behind the deterministic half of the invariance story:
// every enumerable walk must (a) record identically to an independent
// reference implementation and (b) record identically after relabeling;
// and consensus pooling of fixed proposals must commute with relabeling
// bit for bit. `mutation` injects a recording defect to prove the check
// can fail.
InvarianceReport check_deterministic_invariance(const InvarianceCase& c,
                                                const RecordOptions& mutation = {});

struct DistributionalReport {
  bool feasible = true;      // enumeration fit the budget
  bool distributions_equal = true;  // exact walk-law comparison under the relabeling
  double max_discrepancy = 0.0;     // expected-score gap, exact enumeration
  long tuples = 0;
};

// Exact expected final scores on a 1-update-step, single-walk-per-scenario
// configuration, computed by enumerating every walk tuple with its exact
// probability through the deterministic network, on both the case graph
// and its relabeled twin. model must have update_steps == 1.
DistributionalReport check_distributional_invariance(const InvarianceCase& c, FlockModel& model,
                                                     long budget = 200000);

struct ScalingPoint {
  std::string axis;  // "walks", "length", or "passes"
  int value = 0;
  double seconds = 0.0;  // median forward time over repetitions
};

// Median-of-`reps` wall-clock of one ensembled prediction while doubling
// each axis independently from the base configuration.
std::vector<ScalingPoint> scaling_probe(int base_walks, int base_length, int base_passes,
                                        int doublings, int reps, uint64_t seed);

}  // namespace flock
