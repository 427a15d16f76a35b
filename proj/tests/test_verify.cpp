#include "doctest.h"

#include <cmath>
#include <map>

#include "flock/stats.hpp"
#include "flock/verify.hpp"

using namespace flock;

TEST_CASE("random isomorphisms are uniform permutations") {
  Rng grng(3);
  KnowledgeGraph g = random_small_graph(grng, 4, 2, 2);
  Rng rng(4);
  std::map<std::vector<int>, long> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) counts[random_isomorphism(g, rng).node_map]++;
  CHECK(counts.size() == 24);
  for (auto& [perm, count] : counts)
    CHECK(std::fabs(static_cast<double>(count) / draws - 1.0 / 24) < 0.01);

  Isomorphism iso = random_isomorphism(g, rng);
  Isomorphism inv = iso.inverse();
  for (int v = 0; v < 4; ++v) CHECK(inv.node_map[iso.node_map[v]] == v);
}

TEST_CASE("deterministic invariance holds on randomized cases") {
  Rng rng(7);
  for (int i = 0; i < 25; ++i) {
    Rng sub = rng.substream(i);
    InvarianceCase c = random_invariance_case(sub);
    InvarianceReport report = check_deterministic_invariance(c);
    INFO(report.failure);
    CHECK(report.passed);
    CHECK(report.walks_checked > 0);
  }
}

TEST_CASE("mutations are detected with a witness") {
  Rng rng(9);
  // pick a case that certainly contains an inverse traversal and a
  // non-identity relabeling
  InvarianceCase c;
  for (int i = 0; i < 100; ++i) {
    Rng sub = rng.substream(i);
    c = random_invariance_case(sub);
    bool nontrivial = false;
    for (size_t v = 0; v < c.iso.node_map.size(); ++v)
      nontrivial |= c.iso.node_map[v] != static_cast<int>(v);
    if (nontrivial) break;
  }

  RecordOptions drop;
  drop.drop_direction = true;
  InvarianceReport dropped = check_deterministic_invariance(c, drop);
  CHECK_FALSE(dropped.passed);
  CHECK(dropped.failure.find("walk") != std::string::npos);

  RecordOptions raw;
  raw.raw_ids = true;
  InvarianceReport leaky = check_deterministic_invariance(c, raw);
  CHECK_FALSE(leaky.passed);
}

namespace {

ModelConfig one_step_config(int walk_len) {
  ModelConfig cfg;
  cfg.hidden_dim = 8;
  cfg.heads = 2;
  cfg.head_dim = 4;
  cfg.update_steps = 1;
  cfg.walk_len = walk_len;
  cfg.base_walks = 1;
  return cfg;
}

}  // namespace

TEST_CASE("distributional invariance on small cases") {
  Rng rng(11);
  int done = 0;
  for (int i = 0; done < 3 && i < 40; ++i) {
    Rng sub = rng.substream(i);
    InvarianceCase c = random_invariance_case(sub);
    c.walk_len = 2;
    if (c.graph.num_entities() > 5) continue;
    FlockModel model(one_step_config(c.walk_len), 1000 + i);
    DistributionalReport report = check_distributional_invariance(c, model);
    if (!report.feasible) continue;
    CHECK(report.distributions_equal);
    CHECK(report.max_discrepancy < 1e-9);
    ++done;
  }
  CHECK(done == 3);
}

TEST_CASE("raw-id mutant breaks distributional invariance") {
  // hand-picked asymmetric graph: a path with a pendant, relabeled
  KnowledgeGraph g;
  for (int i = 0; i < 4; ++i) g.add_entity("e" + std::to_string(i));
  g.add_relation("r");
  g.add_relation("s");
  g.add_triple(0, 0, 1);
  g.add_triple(1, 1, 2);
  g.add_triple(1, 0, 3);
  g.finalize();

  InvarianceCase c;
  c.graph = g;
  c.query = Query::entity(0, 0);
  c.walk_len = 2;
  c.iso.node_map = {2, 3, 0, 1};
  c.iso.rel_map = {1, 0};

  // raw ids need embedding tables wide enough for every entity id
  FlockModel model(one_step_config(6), 77);
  RecordOptions raw;
  raw.raw_ids = true;
  model.set_record_options(raw);
  DistributionalReport report = check_distributional_invariance(c, model);
  REQUIRE(report.feasible);
  CHECK(report.distributions_equal);  // the walk law itself is untouched
  CHECK(report.max_discrepancy > 0.01);

  model.set_record_options({});
  DistributionalReport clean = check_distributional_invariance(c, model);
  CHECK(clean.max_discrepancy < 1e-9);
}

TEST_CASE("scaling probe returns timings for every axis") {
  auto points = scaling_probe(2, 4, 1, 1, 2, 5);
  REQUIRE(points.size() == 6);
  for (const auto& p : points) {
    CHECK(p.seconds > 0.0);
    CHECK((p.axis == "walks" || p.axis == "length" || p.axis == "passes"));
  }
}
