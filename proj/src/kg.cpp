#include "flock/kg.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace flock {

namespace {

// Shared name->id interning. The graph keeps names in vectors; lookup maps
// are rebuilt on demand (loading is the only hot path that needs them and
// it maintains its own maps).
int find_name(const std::vector<std::string>& names, const std::string& name) {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

}  // namespace

int KnowledgeGraph::add_entity(const std::string& name) {
  entity_names_.push_back(name);
  finalized_ = false;
  return static_cast<int>(entity_names_.size()) - 1;
}

int KnowledgeGraph::add_relation(const std::string& name) {
  relation_names_.push_back(name);
  finalized_ = false;
  return static_cast<int>(relation_names_.size()) - 1;
}

int KnowledgeGraph::entity_id(const std::string& name) const {
  return find_name(entity_names_, name);
}

int KnowledgeGraph::relation_id(const std::string& name) const {
  return find_name(relation_names_, name);
}

void KnowledgeGraph::check_entity(int v) const {
  if (v < 0 || v >= num_entities())
    throw std::out_of_range("KnowledgeGraph: entity id " + std::to_string(v) +
                            " out of range [0, " + std::to_string(num_entities()) + ")");
}

void KnowledgeGraph::add_triple(int head, int rel, int tail) {
  check_entity(head);
  check_entity(tail);
  if (rel < 0 || rel >= num_relations())
    throw std::out_of_range("KnowledgeGraph: relation id " + std::to_string(rel) +
                            " out of range [0, " + std::to_string(num_relations()) + ")");
  triples_.push_back({head, rel, tail});
  finalized_ = false;
}

void KnowledgeGraph::finalize() {
  int v_count = num_entities();
  std::vector<int> counts(v_count + 1, 0);
  for (const Triple& t : triples_) {
    counts[t.head + 1]++;
    counts[t.tail + 1]++;
  }
  adj_offsets_.assign(v_count + 1, 0);
  for (int v = 0; v < v_count; ++v) adj_offsets_[v + 1] = adj_offsets_[v] + counts[v + 1];
  adj_.assign(adj_offsets_[v_count], AdjEntry{});
  std::vector<int> cursor(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (const Triple& t : triples_) {
    adj_[cursor[t.head]++] = {t.tail, t.rel, Direction::kForward};
    adj_[cursor[t.tail]++] = {t.head, t.rel, Direction::kInverse};
  }
  for (int v = 0; v < v_count; ++v) {
    std::sort(adj_.begin() + adj_offsets_[v], adj_.begin() + adj_offsets_[v + 1],
              [](const AdjEntry& a, const AdjEntry& b) {
                if (a.neighbor != b.neighbor) return a.neighbor < b.neighbor;
                if (a.rel != b.rel) return a.rel < b.rel;
                return a.dir < b.dir;
              });
  }
  nbr_offsets_.assign(v_count + 1, 0);
  nbrs_.clear();
  nbrs_.reserve(adj_.size());
  for (int v = 0; v < v_count; ++v) {
    int prev = -1;
    for (int i = adj_offsets_[v]; i < adj_offsets_[v + 1]; ++i) {
      if (adj_[i].neighbor != prev) {
        nbrs_.push_back(adj_[i].neighbor);
        prev = adj_[i].neighbor;
      }
    }
    nbr_offsets_[v + 1] = static_cast<int>(nbrs_.size());
  }
  finalized_ = true;
}

std::span<const AdjEntry> KnowledgeGraph::adjacency(int v) const {
  check_entity(v);
  if (!finalized_) throw std::logic_error("KnowledgeGraph: finalize() before traversal");
  return {adj_.data() + adj_offsets_[v],
          static_cast<size_t>(adj_offsets_[v + 1] - adj_offsets_[v])};
}

std::span<const int> KnowledgeGraph::neighbors(int v) const {
  check_entity(v);
  if (!finalized_) throw std::logic_error("KnowledgeGraph: finalize() before traversal");
  return {nbrs_.data() + nbr_offsets_[v],
          static_cast<size_t>(nbr_offsets_[v + 1] - nbr_offsets_[v])};
}

std::vector<EdgeRef> KnowledgeGraph::edges_between(int v, int w) const {
  std::vector<EdgeRef> out;
  auto adj = adjacency(v);
  check_entity(w);
  auto lo = std::lower_bound(adj.begin(), adj.end(), w,
                             [](const AdjEntry& e, int x) { return e.neighbor < x; });
  for (auto it = lo; it != adj.end() && it->neighbor == w; ++it)
    out.push_back({it->rel, it->dir});
  return out;
}

int KnowledgeGraph::count_edges_between(int v, int w) const {
  auto adj = adjacency(v);
  check_entity(w);
  auto lo = std::lower_bound(adj.begin(), adj.end(), w,
                             [](const AdjEntry& e, int x) { return e.neighbor < x; });
  int n = 0;
  for (auto it = lo; it != adj.end() && it->neighbor == w; ++it) ++n;
  return n;
}

KnowledgeGraph KnowledgeGraph::reversed() const {
  KnowledgeGraph rev;
  rev.entity_names_ = entity_names_;
  rev.relation_names_ = relation_names_;
  rev.triples_.reserve(triples_.size());
  for (const Triple& t : triples_) rev.triples_.push_back({t.tail, t.rel, t.head});
  rev.finalize();
  return rev;
}

void Isomorphism::validate(int num_entities, int num_relations) const {
  auto check = [](const std::vector<int>& map, int n, const char* what) {
    if (static_cast<int>(map.size()) != n)
      throw std::invalid_argument(std::string("Isomorphism: ") + what + " map has size " +
                                  std::to_string(map.size()) + ", expected " + std::to_string(n));
    std::vector<bool> seen(n, false);
    for (int x : map) {
      if (x < 0 || x >= n || seen[x])
        throw std::invalid_argument(std::string("Isomorphism: ") + what +
                                    " map is not a bijection");
      seen[x] = true;
    }
  };
  check(node_map, num_entities, "node");
  check(rel_map, num_relations, "relation");
}

Isomorphism Isomorphism::inverse() const {
  Isomorphism inv;
  inv.node_map.resize(node_map.size());
  inv.rel_map.resize(rel_map.size());
  for (size_t i = 0; i < node_map.size(); ++i) inv.node_map[node_map[i]] = static_cast<int>(i);
  for (size_t i = 0; i < rel_map.size(); ++i) inv.rel_map[rel_map[i]] = static_cast<int>(i);
  return inv;
}

KnowledgeGraph apply_isomorphism(const KnowledgeGraph& g, const Isomorphism& iso) {
  iso.validate(g.num_entities(), g.num_relations());
  KnowledgeGraph out;
  std::vector<std::string> enames(g.num_entities()), rnames(g.num_relations());
  for (int v = 0; v < g.num_entities(); ++v) enames[iso.node_map[v]] = g.entity_names()[v];
  for (int r = 0; r < g.num_relations(); ++r) rnames[iso.rel_map[r]] = g.relation_names()[r];
  for (const auto& name : enames) out.add_entity(name);
  for (const auto& name : rnames) out.add_relation(name);
  for (const Triple& t : g.triples())
    out.add_triple(iso.node_map[t.head], iso.rel_map[t.rel], iso.node_map[t.tail]);
  out.finalize();
  return out;
}

Query apply_isomorphism(const Query& q, const Isomorphism& iso) {
  Query out = q;
  if (q.head >= 0) out.head = iso.node_map[q.head];
  if (q.tail >= 0) out.tail = iso.node_map[q.tail];
  if (q.rel >= 0) out.rel = iso.rel_map[q.rel];
  return out;
}

int GraphView::degree(int v) const {
  int d = g_->degree(v);
  if (masked()) {
    int partner = (v == mask_a_) ? mask_b_ : (v == mask_b_ ? mask_a_ : -1);
    if (partner >= 0) {
      auto nbrs = g_->neighbors(v);
      if (std::binary_search(nbrs.begin(), nbrs.end(), partner)) --d;
    }
  }
  return d;
}

std::vector<int> GraphView::neighbors(int v) const {
  auto nbrs = g_->neighbors(v);
  std::vector<int> out;
  out.reserve(nbrs.size());
  for (int w : nbrs)
    if (!masks_pair(v, w)) out.push_back(w);
  return out;
}

int GraphView::nth_neighbor(int v, int exclude, int k) const {
  auto nbrs = g_->neighbors(v);
  int i = 0;
  for (int w : nbrs) {
    if (w == exclude || masks_pair(v, w)) continue;
    if (i == k) return w;
    ++i;
  }
  throw std::out_of_range("GraphView::nth_neighbor: index " + std::to_string(k) +
                          " out of range for entity " + std::to_string(v));
}

std::vector<EdgeRef> GraphView::edges_between(int v, int w) const {
  if (masks_pair(v, w)) return {};
  return g_->edges_between(v, w);
}

int GraphView::count_edges_between(int v, int w) const {
  if (masks_pair(v, w)) return 0;
  return g_->count_edges_between(v, w);
}

namespace {

struct TripleLoader {
  KnowledgeGraph& g;
  std::unordered_map<std::string, int> entities, relations;
  std::set<Triple> seen;

  explicit TripleLoader(KnowledgeGraph& graph) : g(graph) {
    for (int v = 0; v < g.num_entities(); ++v) entities[g.entity_names()[v]] = v;
    for (int r = 0; r < g.num_relations(); ++r) relations[g.relation_names()[r]] = r;
    for (const Triple& t : g.triples()) seen.insert(t);
  }

  int entity(const std::string& name) {
    auto [it, inserted] = entities.try_emplace(name, static_cast<int>(entities.size()));
    if (inserted) g.add_entity(name);
    return it->second;
  }
  int relation(const std::string& name) {
    auto [it, inserted] = relations.try_emplace(name, static_cast<int>(relations.size()));
    if (inserted) g.add_relation(name);
    return it->second;
  }

  std::vector<Triple> load(const std::string& path, bool dedup, bool add_to_graph) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open triple file: " + path);
    std::vector<Triple> loaded;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      size_t tab1 = line.find('\t');
      size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
      size_t tab3 = tab2 == std::string::npos ? std::string::npos : line.find('\t', tab2 + 1);
      if (tab1 == std::string::npos || tab2 == std::string::npos || tab3 != std::string::npos)
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected head<TAB>relation<TAB>tail");
      Triple t;
      t.head = entity(line.substr(0, tab1));
      t.rel = relation(line.substr(tab1 + 1, tab2 - tab1 - 1));
      t.tail = entity(line.substr(tab2 + 1));
      if (dedup && !seen.insert(t).second) continue;
      if (add_to_graph) g.add_triple(t.head, t.rel, t.tail);
      loaded.push_back(t);
    }
    return loaded;
  }
};

}  // namespace

KnowledgeGraph load_triples(const std::string& path, bool dedup) {
  KnowledgeGraph g;
  TripleLoader loader(g);
  loader.load(path, dedup, /*add_to_graph=*/true);
  if (g.triples().empty()) throw std::runtime_error("empty graph: no triples in " + path);
  g.finalize();
  return g;
}

std::vector<Triple> load_triples_into(KnowledgeGraph& g, const std::string& path, bool dedup,
                                      bool add_to_graph) {
  TripleLoader loader(g);
  auto loaded = loader.load(path, dedup, add_to_graph);
  g.finalize();
  return loaded;
}

void save_triples(const KnowledgeGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write triple file: " + path);
  for (const Triple& t : g.triples())
    out << g.entity_names()[t.head] << '\t' << g.relation_names()[t.rel] << '\t'
        << g.entity_names()[t.tail] << '\n';
  if (!out) throw std::runtime_error("write failure: " + path);
}

}  // namespace flock
