#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flock {

// Traversal direction of a relational edge. Walks may cross any stored
// triple either from head to tail (forward) or tail to head (inverse);
// kNone marks the empty relation slot at step 0 of a record.
enum class Direction : uint8_t { kForward = 0, kInverse = 1, kNone = 2 };

struct Triple {
  int head = 0;
  int rel = 0;
  int tail = 0;
  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// One traversable edge incident to some entity.
struct AdjEntry {
  int neighbor = 0;
  int rel = 0;
  Direction dir = Direction::kForward;
  friend bool operator==(const AdjEntry&, const AdjEntry&) = default;
};

// A relational edge between an ordered pair of entities, as seen from the
// first one (forward if stored as (v,r,w), inverse if stored as (w,r,v)).
struct EdgeRef {
  int rel = 0;
  Direction dir = Direction::kForward;
  friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
};

// Dense-id multi-relational graph. Immutable once built: construction
// populates the triple list and finalize() derives the traversal indexes,
// after which any number of threads may read concurrently.
class KnowledgeGraph {
 public:
  int num_entities() const { return static_cast<int>(entity_names_.size()); }
  int num_relations() const { return static_cast<int>(relation_names_.size()); }
  const std::vector<Triple>& triples() const { return triples_; }
  const std::vector<std::string>& entity_names() const { return entity_names_; }
  const std::vector<std::string>& relation_names() const { return relation_names_; }

  int add_entity(const std::string& name);
  int add_relation(const std::string& name);
  int entity_id(const std::string& name) const;    // -1 if unknown
  int relation_id(const std::string& name) const;  // -1 if unknown
  void add_triple(int head, int rel, int tail);

  // Builds adjacency (two entries per triple, sorted by neighbor/rel/dir)
  // and the unique-neighbor index. Must be called before traversal.
  void finalize();
  bool finalized() const { return finalized_; }

  // All edges incident to v, both orientations.
  std::span<const AdjEntry> adjacency(int v) const;
  // Distinct neighbors N(v), sorted ascending.
  std::span<const int> neighbors(int v) const;
  int degree(int v) const { return static_cast<int>(neighbors(v).size()); }

  // Every way to go from v to w: (r, forward) per stored (v,r,w) and
  // (r, inverse) per stored (w,r,v), sorted by relation then direction.
  // Multi-edges appear once per stored triple.
  std::vector<EdgeRef> edges_between(int v, int w) const;
  int count_edges_between(int v, int w) const;

  // Same graph with every triple reversed; used for head-side ranking.
  KnowledgeGraph reversed() const;

 private:
  void check_entity(int v) const;

  std::vector<Triple> triples_;
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::vector<int> adj_offsets_;
  std::vector<AdjEntry> adj_;
  std::vector<int> nbr_offsets_;
  std::vector<int> nbrs_;
  bool finalized_ = false;
};

// A pair of permutations (entities, relations) acting on a graph.
struct Isomorphism {
  std::vector<int> node_map;
  std::vector<int> rel_map;

  // Throws unless both maps are total bijections of the right size.
  void validate(int num_entities, int num_relations) const;
  Isomorphism inverse() const;
};

KnowledgeGraph apply_isomorphism(const KnowledgeGraph& g, const Isomorphism& iso);

enum class QueryKind : uint8_t { kEntityPrediction, kRelationPrediction };

// Entity prediction (h, r, ?) carries head+rel; relation prediction
// (h, ?, t) carries head+tail.
struct Query {
  QueryKind kind = QueryKind::kEntityPrediction;
  int head = -1;
  int rel = -1;
  int tail = -1;

  static Query entity(int head, int rel) { return {QueryKind::kEntityPrediction, head, rel, -1}; }
  static Query relation(int head, int tail) {
    return {QueryKind::kRelationPrediction, head, -1, tail};
  }
  friend bool operator==(const Query&, const Query&) = default;
};

Query apply_isomorphism(const Query& q, const Isomorphism& iso);

// Read-only view of a graph that can hide every edge between one pair of
// entities (query-edge removal during training). Unmasked views are free.
class GraphView {
 public:
  GraphView(const KnowledgeGraph& g) : g_(&g) {}  // NOLINT: implicit by design
  GraphView(const KnowledgeGraph& g, int a, int b) : g_(&g), mask_a_(a), mask_b_(b) {}

  const KnowledgeGraph& graph() const { return *g_; }
  bool masked() const { return mask_a_ >= 0; }
  bool masks_pair(int v, int w) const {
    return (v == mask_a_ && w == mask_b_) || (v == mask_b_ && w == mask_a_);
  }

  int num_entities() const { return g_->num_entities(); }
  int num_relations() const { return g_->num_relations(); }

  int degree(int v) const;
  // Neighbors of v under the mask, ascending. Small-vector copy.
  std::vector<int> neighbors(int v) const;
  // k-th (0-based) neighbor of v under the mask, skipping `exclude` (-1 for none).
  int nth_neighbor(int v, int exclude, int k) const;
  std::vector<EdgeRef> edges_between(int v, int w) const;
  int count_edges_between(int v, int w) const;

 private:
  const KnowledgeGraph* g_;
  int mask_a_ = -1;
  int mask_b_ = -1;
};

// Triple TSV loading: head<TAB>relation<TAB>tail per line, UTF-8,
// '#'-prefixed comment lines and blank lines skipped. Names are interned
// in first-appearance order. With dedup (default) repeated lines are
// stored once; otherwise they become distinct multi-edges.
KnowledgeGraph load_triples(const std::string& path, bool dedup = true);
// Loads triples in an existing id space (shared vocabulary across
// train/valid/test splits), interning unseen names. The triples are
// returned and only added to g's edge set when add_to_graph is set, so
// evaluation splits can share ids without entering the context graph.
std::vector<Triple> load_triples_into(KnowledgeGraph& g, const std::string& path,
                                      bool dedup = true, bool add_to_graph = false);
void save_triples(const KnowledgeGraph& g, const std::string& path);

}  // namespace flock
