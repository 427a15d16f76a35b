#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include "flock/kg.hpp"
#include "flock/rng.hpp"

using namespace flock;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = "/tmp/flock_test_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

KnowledgeGraph random_graph(Rng& rng, int entities, int relations, int edges) {
  KnowledgeGraph g;
  for (int v = 0; v < entities; ++v) g.add_entity("e" + std::to_string(v));
  for (int r = 0; r < relations; ++r) g.add_relation("r" + std::to_string(r));
  for (int e = 0; e < edges; ++e)
    g.add_triple(rng.uniform_int(entities), rng.uniform_int(relations), rng.uniform_int(entities));
  g.finalize();
  return g;
}

Isomorphism random_iso(Rng& rng, int entities, int relations) {
  Isomorphism iso;
  iso.node_map.resize(entities);
  iso.rel_map.resize(relations);
  for (int i = 0; i < entities; ++i) iso.node_map[i] = i;
  for (int i = 0; i < relations; ++i) iso.rel_map[i] = i;
  for (int i = entities - 1; i > 0; --i) std::swap(iso.node_map[i], iso.node_map[rng.uniform_int(i + 1)]);
  for (int i = relations - 1; i > 0; --i) std::swap(iso.rel_map[i], iso.rel_map[rng.uniform_int(i + 1)]);
  return iso;
}

}  // namespace

TEST_CASE("single fact file") {
  auto path = write_temp("single.tsv", "a\tr\tb\n");
  KnowledgeGraph g = load_triples(path);
  CHECK(g.num_entities() == 2);
  CHECK(g.num_relations() == 1);
  CHECK(g.triples().size() == 1);
  CHECK(g.entity_names()[0] == "a");  // first-appearance order
  CHECK(g.entity_names()[1] == "b");
}

TEST_CASE("duplicate lines: dedup by default, multi-edges on request") {
  auto path = write_temp("dup.tsv", "a\tr\tb\na\tr\tb\n");
  CHECK(load_triples(path).triples().size() == 1);
  CHECK(load_triples(path, /*dedup=*/false).triples().size() == 2);
}

TEST_CASE("comments and blank lines are skipped, CRLF tolerated") {
  auto path = write_temp("comments.tsv", "# header\na\tr\tb\r\n\nb\ts\tc\n");
  KnowledgeGraph g = load_triples(path);
  CHECK(g.triples().size() == 2);
  CHECK(g.num_relations() == 2);
}

TEST_CASE("star wars figure graph") {
  auto path = write_temp("starwars.tsv",
                         "Luke\tfriendWith\tYoda\n"
                         "Luke\tlike\tHanSolo\n"
                         "Luke\tdislike\tEmperor\n"
                         "HanSolo\tdislike\tJabba\n"
                         "Emperor\tdislike\tJabba\n"
                         "Luke\tdislike\tDarthVader\n"
                         "Luke\tlike\tChewbacca\n"
                         "DarthVader\tlike\tLeia\n"
                         "Chewbacca\tlike\tLeia\n");
  KnowledgeGraph g = load_triples(path);
  CHECK(g.num_entities() == 8);
  CHECK(g.num_relations() == 3);
  CHECK(g.triples().size() == 9);
}

TEST_CASE("malformed and empty files") {
  auto bad = write_temp("bad.tsv", "a\tr\tb\nwrong columns here\n");
  CHECK_THROWS_WITH_AS(load_triples(bad), doctest::Contains(":2"), std::runtime_error);
  auto empty = write_temp("empty.tsv", "");
  CHECK_THROWS_AS(load_triples(empty), std::runtime_error);
}

TEST_CASE("edges_between directions and determinism") {
  KnowledgeGraph g;
  g.add_entity("a");
  g.add_entity("b");
  g.add_relation("r");
  g.add_relation("s");
  g.add_triple(0, 0, 1);  // a -r-> b

  SUBCASE("single triple, both query orders") {
    g.finalize();
    auto fwd = g.edges_between(0, 1);
    REQUIRE(fwd.size() == 1);
    CHECK(fwd[0] == EdgeRef{0, Direction::kForward});
    auto inv = g.edges_between(1, 0);
    REQUIRE(inv.size() == 1);
    CHECK(inv[0] == EdgeRef{0, Direction::kInverse});
  }

  SUBCASE("opposing pair") {
    g.add_triple(1, 1, 0);  // b -s-> a
    g.finalize();
    auto edges = g.edges_between(0, 1);
    REQUIRE(edges.size() == 2);
    CHECK(edges[0] == EdgeRef{0, Direction::kForward});
    CHECK(edges[1] == EdgeRef{1, Direction::kInverse});
    CHECK(g.edges_between(0, 0).empty());
  }
}

TEST_CASE("edges_between mirror property on random graphs") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    KnowledgeGraph g = random_graph(rng, 6, 3, 15);
    for (int v = 0; v < 6; ++v) {
      for (int w = 0; w < 6; ++w) {
        auto vw = g.edges_between(v, w);
        auto wv = g.edges_between(w, v);
        REQUIRE(vw.size() == wv.size());
        int fwd_vw = 0, inv_wv = 0;
        for (auto& e : vw) fwd_vw += e.dir == Direction::kForward;
        for (auto& e : wv) inv_wv += e.dir == Direction::kInverse;
        if (v != w) CHECK(fwd_vw == inv_wv);
      }
    }
  }
}

TEST_CASE("apply_isomorphism") {
  KnowledgeGraph g;
  g.add_entity("x");
  g.add_entity("y");
  g.add_relation("r");
  g.add_triple(0, 0, 1);
  g.finalize();

  SUBCASE("identity") {
    Isomorphism id{{0, 1}, {0}};
    KnowledgeGraph h = apply_isomorphism(g, id);
    CHECK(h.triples() == g.triples());
  }
  SUBCASE("swap") {
    Isomorphism swap{{1, 0}, {0}};
    KnowledgeGraph h = apply_isomorphism(g, swap);
    REQUIRE(h.triples().size() == 1);
    CHECK(h.triples()[0] == Triple{1, 0, 0});
  }
  SUBCASE("size mismatch is a contract violation") {
    Isomorphism bad{{0}, {0}};
    CHECK_THROWS_AS(apply_isomorphism(g, bad), std::invalid_argument);
    Isomorphism nonbij{{0, 0}, {0}};
    CHECK_THROWS_AS(apply_isomorphism(g, nonbij), std::invalid_argument);
  }
}

TEST_CASE("isomorphism round trip and preserved statistics") {
  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    KnowledgeGraph g = random_graph(rng, 7, 4, 18);
    Isomorphism iso = random_iso(rng, 7, 4);
    KnowledgeGraph h = apply_isomorphism(g, iso);
    CHECK(h.triples().size() == g.triples().size());

    // degree multiset preserved
    std::multiset<int> dg, dh;
    for (int v = 0; v < 7; ++v) {
      dg.insert(g.degree(v));
      dh.insert(h.degree(v));
    }
    CHECK(dg == dh);

    // per-relation edge counts preserved through the map
    std::map<int, int> cg, ch;
    for (auto& t : g.triples()) cg[iso.rel_map[t.rel]]++;
    for (auto& t : h.triples()) ch[t.rel]++;
    CHECK(cg == ch);

    // round trip
    KnowledgeGraph back = apply_isomorphism(h, iso.inverse());
    std::multiset<Triple> mg(g.triples().begin(), g.triples().end());
    std::multiset<Triple> mb(back.triples().begin(), back.triples().end());
    CHECK(mg == mb);
  }
}

TEST_CASE("query relabeling") {
  Isomorphism iso{{3, 0, 1, 2}, {1, 2, 0}};
  Query q = Query::entity(0, 2);
  Query mapped = apply_isomorphism(q, iso);
  CHECK(mapped.head == 3);
  CHECK(mapped.rel == 0);

  Query rq = Query::relation(1, 2);
  Query rmapped = apply_isomorphism(rq, iso);
  CHECK(rmapped.head == 0);
  CHECK(rmapped.tail == 1);
  CHECK(rmapped.kind == QueryKind::kRelationPrediction);

  Isomorphism id{{0, 1, 2, 3}, {0, 1, 2}};
  CHECK(apply_isomorphism(q, id) == q);
}

TEST_CASE("load / serialize / load round trip") {
  Rng rng(77);
  KnowledgeGraph source = random_graph(rng, 6, 3, 12);
  auto original = write_temp("roundtrip_src.tsv", "");
  save_triples(source, original);

  KnowledgeGraph g = load_triples(original, /*dedup=*/false);
  auto copy = write_temp("roundtrip_copy.tsv", "");
  save_triples(g, copy);
  KnowledgeGraph g2 = load_triples(copy, /*dedup=*/false);
  CHECK(g2.triples() == g.triples());
  CHECK(g2.entity_names() == g.entity_names());
  CHECK(g2.relation_names() == g.relation_names());
}

TEST_CASE("graph view masking") {
  KnowledgeGraph g;
  for (int i = 0; i < 4; ++i) g.add_entity("e" + std::to_string(i));
  g.add_relation("r");
  g.add_relation("s");
  g.add_triple(0, 0, 1);
  g.add_triple(1, 1, 0);  // second edge between the pair, other direction
  g.add_triple(1, 0, 2);
  g.add_triple(2, 0, 3);
  g.finalize();

  GraphView masked(g, 0, 1);
  CHECK(masked.edges_between(0, 1).empty());
  CHECK(masked.edges_between(1, 0).empty());
  CHECK(masked.degree(0) == 0);
  CHECK(masked.degree(1) == 1);
  CHECK(masked.neighbors(1) == std::vector<int>{2});
  CHECK(masked.edges_between(1, 2).size() == 1);

  // unrelated edges untouched; the underlying graph is unchanged
  GraphView plain(g);
  CHECK(plain.degree(0) == 1);
  CHECK(plain.edges_between(0, 1).size() == 2);
  CHECK(g.edges_between(0, 1).size() == 2);
}
