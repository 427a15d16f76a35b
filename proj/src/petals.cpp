#include "flock/petals.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace flock {

namespace {

using nlohmann::json;

std::vector<int> identity_perm(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

PetalsScheme cyclic_scheme(const std::string& name, int colors, int stride) {
  PetalsScheme s;
  s.name = name;
  s.colors = colors;
  s.petals = colors;
  for (int i = 0; i < colors; ++i) s.pairs.push_back({i, (i + stride) % colors});
  for (int k = 0; k < colors; ++k) {
    std::vector<int> perm(colors);
    for (int j = 0; j < colors; ++j) perm[j] = (j + k) % colors;
    s.color_perms.push_back(perm);
  }
  return s;
}

PetalsScheme dihedral_scheme(const std::string& name, int colors) {
  PetalsScheme s;
  s.name = name;
  s.colors = colors;
  s.petals = 2 * colors;
  for (int i = 0; i < colors; ++i) s.pairs.push_back({i, (i + 1) % colors});
  for (int i = 0; i < colors; ++i) s.pairs.push_back({(i + 1) % colors, i});
  for (int k = 0; k < colors; ++k) {
    std::vector<int> rot(colors), refl(colors);
    for (int j = 0; j < colors; ++j) {
      rot[j] = (j + k) % colors;
      refl[j] = ((k - j) % colors + colors) % colors;
    }
    s.color_perms.push_back(rot);
    s.color_perms.push_back(refl);
  }
  return s;
}

PetalsScheme complete_scheme(const std::string& name, int colors) {
  PetalsScheme s;
  s.name = name;
  s.colors = colors;
  for (int a = 0; a < colors; ++a)
    for (int b = 0; b < colors; ++b)
      if (a != b) s.pairs.push_back({a, b});
  s.petals = static_cast<int>(s.pairs.size());
  std::vector<int> perm = identity_perm(colors);
  do {
    s.color_perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return s;
}

// Index of a pair under a color permutation; -1 if the image is not a petal.
int mapped_pair_index(const PetalsScheme& s, const std::vector<int>& perm, int petal) {
  std::pair<int, int> image{perm[s.pairs[petal].first], perm[s.pairs[petal].second]};
  for (size_t p = 0; p < s.pairs.size(); ++p)
    if (s.pairs[p] == image) return static_cast<int>(p);
  return -1;
}

void verify_scheme(PetalsScheme& s) {
  std::set<std::pair<int, int>> seen;
  for (auto& [a, b] : s.pairs) {
    if (a == b) throw std::logic_error("petals scheme " + s.name + ": pair with equal colors");
    if (!seen.insert({a, b}).second)
      throw std::logic_error("petals scheme " + s.name + ": duplicate pair");
  }
  // closure: every group element permutes the pair list
  for (const auto& perm : s.color_perms)
    for (int p = 0; p < s.petals; ++p)
      if (mapped_pair_index(s, perm, p) < 0)
        throw std::logic_error("petals scheme " + s.name + ": group does not preserve pairs");
  // transitivity on petals
  for (int from = 0; from < s.petals; ++from) {
    for (int to = 0; to < s.petals; ++to) {
      bool reachable = false;
      for (const auto& perm : s.color_perms)
        if (mapped_pair_index(s, perm, from) == to) {
          reachable = true;
          break;
        }
      if (!reachable)
        throw std::logic_error("petals scheme " + s.name + ": petals not in one orbit");
    }
  }
  // color orbits (union-find over all perms)
  std::vector<int> parent = identity_perm(s.colors);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& perm : s.color_perms)
    for (int c = 0; c < s.colors; ++c) parent[find(c)] = find(perm[c]);
  s.color_orbit.resize(s.colors);
  for (int c = 0; c < s.colors; ++c) s.color_orbit[c] = find(c);
  // each petal's colors must share an orbit (the 50% ceiling needs it)
  for (auto& [a, b] : s.pairs)
    if (find(a) != find(b))
      throw std::logic_error("petals scheme " + s.name + ": petal colors in distinct orbits");
}

std::vector<PetalsScheme> build_schemes() {
  std::vector<PetalsScheme> all;
  all.push_back(cyclic_scheme("cyc2", 2, 1));
  all.push_back(cyclic_scheme("cyc3", 3, 1));
  all.push_back(cyclic_scheme("cyc4", 4, 1));
  all.push_back(cyclic_scheme("cyc5", 5, 1));
  all.push_back(cyclic_scheme("cyc6", 6, 1));
  all.push_back(cyclic_scheme("cyc4s2", 4, 2));
  all.push_back(cyclic_scheme("cyc5s2", 5, 2));
  all.push_back(cyclic_scheme("cyc6r", 6, 5));
  all.push_back(dihedral_scheme("dih4", 4));
  all.push_back(dihedral_scheme("dih5", 5));
  all.push_back(complete_scheme("full4", 4));
  for (auto& s : all) verify_scheme(s);
  return all;
}

}  // namespace

const std::vector<PetalsScheme>& petals_schemes() {
  static const std::vector<PetalsScheme> schemes = build_schemes();
  return schemes;
}

PetalsInstance generate_instance(const PetalsParams& params, Rng& rng) {
  if (params.scheme_id < 1 || params.scheme_id > static_cast<int>(petals_schemes().size()))
    throw std::invalid_argument("generate_instance: scheme id out of range");
  if (params.petal_len < 1 || params.petal_len > 5 || params.stem_len < 1 ||
      params.stem_len > 4)
    throw std::invalid_argument("generate_instance: petal_len in [1,5], stem_len in [1,4]");
  const PetalsScheme& scheme = petals_schemes()[params.scheme_id - 1];

  PetalsInstance inst;
  inst.params = params;
  int t = params.stem_len, l = params.petal_len;
  KnowledgeGraph& g = inst.graph;
  for (int k = 0; k <= t; ++k) g.add_entity("b" + std::to_string(k));
  for (int i = 1; i <= scheme.petals; ++i)
    for (int j = 1; j <= 2 * l + 1; ++j)
      g.add_entity("a" + std::to_string(i) + "_" + std::to_string(j));
  g.add_relation("r0");
  for (int c = 1; c <= scheme.colors; ++c) g.add_relation("s" + std::to_string(c));

  for (int k = 1; k <= t; ++k) g.add_triple(inst.stem_node(k - 1), 0, inst.stem_node(k));
  for (int i = 1; i <= scheme.petals; ++i) {
    int entry = scheme.pairs[i - 1].first + 1;  // relation ids shift past r0
    int off = scheme.pairs[i - 1].second + 1;
    g.add_triple(inst.stem_node(0), entry, inst.petal_node(i, 1));
    g.add_triple(inst.stem_node(0), off, inst.petal_node(i, 2));
    for (int j = 1; j <= l - 1; ++j) {
      g.add_triple(inst.petal_node(i, 2 * j - 1), entry, inst.petal_node(i, 2 * j + 1));
      g.add_triple(inst.petal_node(i, 2 * j), entry, inst.petal_node(i, 2 * j + 2));
    }
    g.add_triple(inst.petal_node(i, 2 * l - 1), entry, inst.petal_node(i, 2 * l + 1));
    g.add_triple(inst.petal_node(i, 2 * l), entry, inst.petal_node(i, 2 * l + 1));
  }
  g.finalize();

  inst.stem_index = rng.uniform_int(t + 1);
  inst.target_petal = 1 + rng.uniform_int(scheme.petals);
  inst.target_depth = 1 + rng.uniform_int(l);
  inst.query = Query::entity(inst.stem_node(inst.stem_index), 0);
  inst.true_target = inst.petal_node(inst.target_petal, 2 * inst.target_depth - 1);
  inst.false_target = inst.petal_node(inst.target_petal, 2 * inst.target_depth);
  return inst;
}

std::vector<PetalsInstance> generate_benchmark(uint64_t seed) {
  Rng root(seed);
  std::vector<PetalsInstance> out;
  out.reserve(220);
  int index = 0;
  for (int scheme_id = 1; scheme_id <= static_cast<int>(petals_schemes().size()); ++scheme_id) {
    for (int t = 1; t <= 4; ++t) {
      for (int l = 1; l <= 5; ++l) {
        Rng sub = root.substream(index++);
        out.push_back(generate_instance({scheme_id, l, t}, sub));
      }
    }
  }
  return out;
}

namespace {

// Node/relation maps induced by a color permutation of the scheme.
Isomorphism induced_isomorphism(const PetalsInstance& inst, const std::vector<int>& perm) {
  const PetalsScheme& scheme = petals_schemes()[inst.params.scheme_id - 1];
  Isomorphism iso;
  iso.node_map.resize(inst.graph.num_entities());
  iso.rel_map.resize(inst.graph.num_relations());
  for (int k = 0; k <= inst.params.stem_len; ++k) iso.node_map[inst.stem_node(k)] = inst.stem_node(k);
  for (int p = 0; p < scheme.petals; ++p) {
    int image = mapped_pair_index(scheme, perm, p);
    for (int j = 1; j <= 2 * inst.params.petal_len + 1; ++j)
      iso.node_map[inst.petal_node(p + 1, j)] = inst.petal_node(image + 1, j);
  }
  iso.rel_map[0] = 0;
  for (int c = 0; c < scheme.colors; ++c) iso.rel_map[c + 1] = perm[c] + 1;
  return iso;
}

void check_automorphism(const KnowledgeGraph& g, const Isomorphism& iso, const std::string& what) {
  KnowledgeGraph mapped = apply_isomorphism(g, iso);
  std::multiset<Triple> a(g.triples().begin(), g.triples().end());
  std::multiset<Triple> b(mapped.triples().begin(), mapped.triples().end());
  if (a != b) throw std::logic_error(what + ": not an automorphism");
}

}  // namespace

Isomorphism petal_automorphism(const PetalsInstance& inst, int from, int to) {
  const PetalsScheme& scheme = petals_schemes()[inst.params.scheme_id - 1];
  if (from < 1 || from > scheme.petals || to < 1 || to > scheme.petals)
    throw std::invalid_argument("petal_automorphism: petal index out of range");
  for (const auto& perm : scheme.color_perms) {
    if (mapped_pair_index(scheme, perm, from - 1) == to - 1) {
      Isomorphism iso = induced_isomorphism(inst, perm);
      check_automorphism(inst.graph, iso, "petal_automorphism");
      return iso;
    }
  }
  throw std::logic_error("petal_automorphism: scheme violates the petal orbit property");
}

CeilingCertificate ceiling_certificate(const PetalsInstance& inst) {
  const PetalsScheme& scheme = petals_schemes()[inst.params.scheme_id - 1];
  auto [entry, off] = scheme.pairs[inst.target_petal - 1];

  CeilingCertificate cert;
  bool found = false;
  for (const auto& perm : scheme.color_perms) {
    if (perm[entry] == off) {
      cert.relation_swapping = induced_isomorphism(inst, perm);
      found = true;
      break;
    }
  }
  if (!found)
    throw std::logic_error("ceiling_certificate: no group element links the petal colors");

  cert.relation_class.resize(inst.graph.num_relations());
  cert.relation_class[0] = -1;  // the stem relation keeps its own class
  for (int c = 0; c < scheme.colors; ++c) cert.relation_class[c + 1] = scheme.color_orbit[c];

  cert.collapsed_swap.resize(inst.graph.num_entities());
  std::iota(cert.collapsed_swap.begin(), cert.collapsed_swap.end(), 0);
  int l = inst.params.petal_len;
  for (int j = 1; j <= l; ++j) {
    int odd = inst.petal_node(inst.target_petal, 2 * j - 1);
    int even = inst.petal_node(inst.target_petal, 2 * j);
    std::swap(cert.collapsed_swap[odd], cert.collapsed_swap[even]);
  }
  verify_certificate(inst, cert);
  return cert;
}

void verify_certificate(const PetalsInstance& inst, const CeilingCertificate& cert) {
  check_automorphism(inst.graph, cert.relation_swapping, "ceiling certificate (relation swap)");
  if (cert.relation_swapping.rel_map[0] != 0)
    throw std::logic_error("ceiling certificate: stem relation not fixed");
  auto [entry, off] = petals_schemes()[inst.params.scheme_id - 1].pairs[inst.target_petal - 1];
  if (cert.relation_swapping.rel_map[entry + 1] != off + 1)
    throw std::logic_error("ceiling certificate: entry color does not map to the off color");

  // the rail swap must exchange the targets, fix the query head, and be an
  // automorphism of the orbit-collapsed graph
  const std::vector<int>& pi = cert.collapsed_swap;
  if (pi[inst.true_target] != inst.false_target || pi[inst.false_target] != inst.true_target)
    throw std::logic_error("ceiling certificate: rail swap does not exchange the targets");
  if (pi[inst.query.head] != inst.query.head)
    throw std::logic_error("ceiling certificate: rail swap moves the query head");
  auto collapse = [&](const Triple& t) {
    int cls = t.rel == 0 ? -1 : cert.relation_class[t.rel];
    return std::tuple<int, int, int>(t.head, cls, t.tail);
  };
  std::multiset<std::tuple<int, int, int>> original, swapped;
  for (const Triple& t : inst.graph.triples()) {
    original.insert(collapse(t));
    auto [h, cls, tl] = collapse(t);
    swapped.insert({pi[h], cls, pi[tl]});
  }
  if (original != swapped)
    throw std::logic_error(
        "ceiling certificate: rail swap is not an automorphism of the collapsed graph");
}

std::pair<double, double> invariant_baseline_scores(const PetalsInstance& inst) {
  const KnowledgeGraph& g = inst.graph;
  int v_count = g.num_entities(), r_count = g.num_relations();
  // co-refinement: node colors see (direction, relation color, neighbor
  // color) multisets; relation colors see endpoint color multisets.
  std::vector<uint64_t> node_color(v_count, 1), rel_color(r_count, 1);
  node_color[inst.query.head] = Rng::mix(0xabcd);  // labeling trick: mark the query
  rel_color[inst.query.rel] = Rng::mix(0xef01);
  for (int round = 0; round < v_count + r_count; ++round) {
    std::vector<uint64_t> next_node(v_count), next_rel(r_count, 0x9e3779b9);
    for (int v = 0; v < v_count; ++v) {
      std::vector<uint64_t> sig;
      for (const AdjEntry& e : g.adjacency(v))
        sig.push_back(Rng::mix((static_cast<uint64_t>(e.dir) << 62) ^ rel_color[e.rel] * 3 ^
                               node_color[e.neighbor] * 7));
      std::sort(sig.begin(), sig.end());
      uint64_t h = node_color[v];
      for (uint64_t x : sig) h = Rng::mix(h ^ x);
      next_node[v] = h;
    }
    std::vector<std::vector<uint64_t>> rel_sig(r_count);
    for (const Triple& t : g.triples())
      rel_sig[t.rel].push_back(Rng::mix(node_color[t.head] * 5 + node_color[t.tail] * 11));
    for (int r = 0; r < r_count; ++r) {
      std::sort(rel_sig[r].begin(), rel_sig[r].end());
      uint64_t h = rel_color[r];
      for (uint64_t x : rel_sig[r]) h = Rng::mix(h ^ x);
      next_rel[r] = h;
    }
    node_color = std::move(next_node);
    rel_color = std::move(next_rel);
  }
  auto score_of = [&](int target) {
    uint64_t h = Rng::mix(node_color[target] ^ Rng::mix(rel_color[inst.query.rel]) ^
                          Rng::mix(node_color[inst.query.head] * 13));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  };
  return {score_of(inst.true_target), score_of(inst.false_target)};
}

double petals_accuracy(const std::vector<std::pair<double, double>>& target_scores) {
  if (target_scores.empty()) throw std::invalid_argument("petals_accuracy: no scores");
  double hits = 0.0;
  for (auto& [t1, t2] : target_scores) hits += t1 > t2 ? 1.0 : 0.0;
  return hits / static_cast<double>(target_scores.size());
}

double petals_expected_accuracy(const std::vector<std::pair<double, double>>& target_scores) {
  if (target_scores.empty()) throw std::invalid_argument("petals_expected_accuracy: no scores");
  double hits = 0.0;
  for (auto& [t1, t2] : target_scores) hits += t1 > t2 ? 1.0 : (t1 == t2 ? 0.5 : 0.0);
  return hits / static_cast<double>(target_scores.size());
}

namespace {

// Edge labels between an ordered node pair, pushed through a relation
// permutation and sorted; exact multiset comparison keeps multi-edges honest.
std::vector<EdgeRef> mapped_edge_labels(const KnowledgeGraph& g, int v, int w,
                                        const std::vector<int>& rel_perm) {
  std::vector<EdgeRef> labels = g.edges_between(v, w);
  for (EdgeRef& e : labels) e.rel = rel_perm[e.rel];
  std::sort(labels.begin(), labels.end(), [](const EdgeRef& a, const EdgeRef& b) {
    return a.rel != b.rel ? a.rel < b.rel : a.dir < b.dir;
  });
  return labels;
}

std::vector<EdgeRef> sorted_edge_labels(const KnowledgeGraph& g, int v, int w) {
  std::vector<EdgeRef> labels = g.edges_between(v, w);
  std::sort(labels.begin(), labels.end(), [](const EdgeRef& a, const EdgeRef& b) {
    return a.rel != b.rel ? a.rel < b.rel : a.dir < b.dir;
  });
  return labels;
}

// Depth-first completion of a partial node map under a fixed relation
// permutation. Every edge between the next node and its already-assigned
// neighbors must map onto an identical label multiset.
bool extend_node_map(const KnowledgeGraph& g, const std::vector<int>& rel_perm,
                     std::vector<int>& node_map, std::vector<bool>& used, int v) {
  int n = g.num_entities();
  while (v < n && node_map[v] >= 0) ++v;
  if (v == n) return true;
  for (int candidate = 0; candidate < n; ++candidate) {
    if (used[candidate] || g.degree(v) != g.degree(candidate)) continue;
    bool consistent = true;
    for (int nbr : g.neighbors(v)) {
      if (node_map[nbr] < 0 && nbr != v) continue;
      int image_nbr = nbr == v ? candidate : node_map[nbr];
      if (mapped_edge_labels(g, v, nbr, rel_perm) !=
          sorted_edge_labels(g, candidate, image_nbr)) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    node_map[v] = candidate;
    used[candidate] = true;
    if (extend_node_map(g, rel_perm, node_map, used, v + 1)) return true;
    node_map[v] = -1;
    used[candidate] = false;
  }
  return false;
}

}  // namespace

bool automorphism_maps_pair(const KnowledgeGraph& g, int fixed_node, int from, int to) {
  int r_count = g.num_relations();
  if (r_count > 8)
    throw std::invalid_argument("automorphism_maps_pair: too many relations for brute force");
  std::vector<int> rel_perm = identity_perm(r_count);
  do {
    std::vector<int> node_map(g.num_entities(), -1);
    std::vector<bool> used(g.num_entities(), false);
    auto assign = [&](int a, int b) {
      if (node_map[a] >= 0) return node_map[a] == b;
      if (used[b]) return false;
      node_map[a] = b;
      used[b] = true;
      return true;
    };
    if (!assign(fixed_node, fixed_node) || !assign(from, to)) continue;
    if (extend_node_map(g, rel_perm, node_map, used, 0)) return true;
  } while (std::next_permutation(rel_perm.begin(), rel_perm.end()));
  return false;
}

void save_petals_benchmark(const std::string& dir, const std::vector<PetalsInstance>& instances) {
  std::filesystem::create_directories(dir);
  for (size_t i = 0; i < instances.size(); ++i) {
    const PetalsInstance& inst = instances[i];
    char name[32];
    std::snprintf(name, sizeof(name), "instance_%03zu", i);
    std::string sub = dir + "/" + name;
    std::filesystem::create_directories(sub);
    save_triples(inst.graph, sub + "/train.txt");
    json meta;
    meta["scheme"] = petals_schemes()[inst.params.scheme_id - 1].name;
    meta["scheme_id"] = inst.params.scheme_id;
    meta["petal_len"] = inst.params.petal_len;
    meta["stem_len"] = inst.params.stem_len;
    meta["stem_index"] = inst.stem_index;
    meta["target_petal"] = inst.target_petal;
    meta["target_depth"] = inst.target_depth;
    meta["query_head"] = inst.graph.entity_names()[inst.query.head];
    meta["query_rel"] = inst.graph.relation_names()[inst.query.rel];
    meta["true_target"] = inst.graph.entity_names()[inst.true_target];
    meta["false_target"] = inst.graph.entity_names()[inst.false_target];
    std::ofstream out(sub + "/metadata.json");
    out << meta.dump(2) << "\n";
    if (!out) throw std::runtime_error("save_petals_benchmark: write failure in " + sub);
  }
}

std::vector<PetalsInstance> load_petals_benchmark(const std::string& dir) {
  std::vector<std::filesystem::path> subdirs;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_directory() &&
        std::filesystem::exists(entry.path() / "metadata.json"))
      subdirs.push_back(entry.path());
  std::sort(subdirs.begin(), subdirs.end());
  if (subdirs.empty())
    throw std::runtime_error("load_petals_benchmark: no instance directories in " + dir);
  std::vector<PetalsInstance> out;
  out.reserve(subdirs.size());
  for (const auto& sub : subdirs) {
    PetalsInstance inst;
    inst.graph = load_triples((sub / "train.txt").string(), /*dedup=*/false);
    std::ifstream in(sub / "metadata.json");
    if (!in) throw std::runtime_error("load_petals_benchmark: missing metadata in " + sub.string());
    json meta = json::parse(in);
    inst.params.scheme_id = meta.at("scheme_id").get<int>();
    inst.params.petal_len = meta.at("petal_len").get<int>();
    inst.params.stem_len = meta.at("stem_len").get<int>();
    inst.stem_index = meta.at("stem_index").get<int>();
    inst.target_petal = meta.at("target_petal").get<int>();
    inst.target_depth = meta.at("target_depth").get<int>();
    int head = inst.graph.entity_id(meta.at("query_head").get<std::string>());
    int rel = inst.graph.relation_id(meta.at("query_rel").get<std::string>());
    inst.true_target = inst.graph.entity_id(meta.at("true_target").get<std::string>());
    inst.false_target = inst.graph.entity_id(meta.at("false_target").get<std::string>());
    if (head < 0 || rel < 0 || inst.true_target < 0 || inst.false_target < 0)
      throw std::runtime_error("load_petals_benchmark: metadata names not in graph: " +
                               sub.string());
    inst.query = Query::entity(head, rel);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace flock
