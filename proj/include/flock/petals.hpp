#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flock/kg.hpp"
#include "flock/rng.hpp"

namespace flock {

// A relation-assignment scheme for flower graphs: an ordered pair of
// colors per petal plus the color-permutation group that realizes petal
// automorphisms. Schemes are constructed so that

//   - every group element induces a permutation of the petal pair list,
//   - the induced action is transitive on petals, and
//   - each petal's two colors lie in one color orbit,
// which together force any relation-invariant scorer to tie the two
// candidate targets. These properties are machine-verified on first use.
struct PetalsScheme {
  std::string name;
  int petals = 0;  // c
  int colors = 0;  // petal relations, excluding the stem relation
  std::vector<std::pair<int, int>> pairs;        // per petal (entry color, off color)
  std::vector<std::vector<int>> color_perms;     // automorphism group on colors
  std::vector<int> color_orbit;                  // color -> orbit id under the group
};

// The 11 shipped schemes (ids 1..11).
const std::vector<PetalsScheme>& petals_schemes();

struct PetalsParams {
  int scheme_id = 1;  // 1..11
  int petal_len = 1;  // l in [1,5]
  int stem_len = 1;   // t in [1,4]
};

struct PetalsInstance {
  KnowledgeGraph graph;
  Query query;           // (b_s, r0, ?)
  int true_target = -1;  // odd-rail node at the sampled depth
  int false_target = -1; // even-rail node at the same depth
  PetalsParams params;
  int stem_index = 0;    // s with b_s the query head
  int target_petal = 1;  // 1-based
  int target_depth = 1;  // j: targets are a_{2j-1} and a_{2j}

  int stem_node(int k) const { return k; }
  int petal_node(int petal, int j) const {
    return params.stem_len + 1 + (petal - 1) * (2 * params.petal_len + 1) + (j - 1);
  }
  int expected_entities() const {
    const PetalsScheme& s = petals_schemes()[params.scheme_id - 1];
    return params.stem_len + 1 + s.petals * (2 * params.petal_len + 1);
  }
  int expected_edges() const {
    const PetalsScheme& s = petals_schemes()[params.scheme_id - 1];
    return params.stem_len + 2 * s.petals * (params.petal_len + 1);
  }
};

// Builds the flower graph for params and samples (stem node, petal,
// depth) for the query and target pair.
PetalsInstance generate_instance(const PetalsParams& params, Rng& rng);

// All 11 schemes x t in {1..4} x l in {1..5} = 220 instances,
// deterministic in the seed.
std::vector<PetalsInstance> generate_benchmark(uint64_t seed);

// An automorphism of the instance graph carrying petal `from` onto petal
// `to` (1-based), taken from the scheme's color group. Verified to map
// the triple multiset onto itself before being returned.
Isomorphism petal_automorphism(const PetalsInstance& inst, int from, int to);

// Certificate that relation-invariant scorers cannot do better than
// chance on this instance:
//   - relation_swapping: a verified graph automorphism whose relation map
//     sends the target petal's entry color to its off color, forcing the
//     two colors to share a representation under relation invariance;
//   - collapsed_swap: a node permutation exchanging the two rails of the
//     target petal, an automorphism of the graph once relations are
//     collapsed to their color orbits; it fixes the query head and swaps
//     the two targets.
struct CeilingCertificate {
  Isomorphism relation_swapping;
  std::vector<int> collapsed_swap;
  std::vector<int> relation_class;  // relation id -> orbit class
};
CeilingCertificate ceiling_certificate(const PetalsInstance& inst);
// Exact re-verification of both certificate components; throws on failure.
void verify_certificate(const PetalsInstance& inst, const CeilingCertificate& cert);

// Deterministic relation-invariant baseline: co-refinement of node and
// relation colors (a WL-style fixpoint) with query labels, hashed to a
// score. By construction it assigns exactly equal scores to the two
// targets of every instance.
std::pair<double, double> invariant_baseline_scores(const PetalsInstance& inst);

// Fraction of instances with score(t1) > score(t2); ties count as
// failures.
double petals_accuracy(const std::vector<std::pair<double, double>>& target_scores);
// Random-guess accounting: exact ties credit 1/2.
double petals_expected_accuracy(const std::vector<std::pair<double, double>>& target_scores);

// True iff some automorphism of g fixes `fixed_node` and maps `from` to
// `to`. Exhaustive (relation permutations times pruned node backtracking);
// intended for graphs up to ~30 nodes.
bool automorphism_maps_pair(const KnowledgeGraph& g, int fixed_node, int from, int to);

// Dataset directory layout: one subdirectory per instance holding
// train.txt (triples) and metadata.json (scheme, sizes, query and target
// names).
void save_petals_benchmark(const std::string& dir, const std::vector<PetalsInstance>& instances);
std::vector<PetalsInstance> load_petals_benchmark(const std::string& dir);

}  // namespace flock
