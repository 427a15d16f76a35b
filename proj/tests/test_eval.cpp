#include "doctest.h"

#include <cmath>

#include "flock/eval.hpp"

using namespace flock;

TEST_CASE("filtered_rank spec cases") {
  std::vector<double> scores = {0.9, 0.5, 0.7, 0.2};
  CHECK(filtered_rank(scores, 2, {0}) == 1.0);
  CHECK(filtered_rank(scores, 2, {}) == 2.0);

  std::vector<double> flat(5, 0.42);
  CHECK(filtered_rank(flat, 3, {}) == 3.0);  // (m+1)/2 with m = 5

  CHECK_THROWS_AS(filtered_rank(scores, 2, {2}), std::invalid_argument);
}

TEST_CASE("filtering never increases the rank") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    int m = 4 + rng.uniform_int(20);
    std::vector<double> scores(m);
    for (double& s : scores) s = rng.uniform01();
    int truth = rng.uniform_int(m);
    std::vector<int> filter;
    for (int c = 0; c < m; ++c)
      if (c != truth && rng.uniform_int(3) == 0) filter.push_back(c);
    CHECK(filtered_rank(scores, truth, filter) <= filtered_rank(scores, truth, {}));
  }
}

TEST_CASE("mrr is the mean reciprocal rank and a perfect scorer gets 1.0") {
  Rng rng(7);
  double sum = 0.0;
  const int queries = 50;
  for (int i = 0; i < queries; ++i) {
    std::vector<double> scores(10);
    for (double& s : scores) s = rng.uniform01() * 0.9;
    int truth = rng.uniform_int(10);
    double rank = filtered_rank(scores, truth, {});
    sum += 1.0 / rank;
  }
  CHECK(sum / queries <= 1.0);

  // oracle scorer: the true candidate always on top
  double mrr = 0.0;
  for (int i = 0; i < queries; ++i) {
    std::vector<double> scores(10, 0.1);
    int truth = rng.uniform_int(10);
    scores[truth] = 0.99;
    mrr += 1.0 / filtered_rank(scores, truth, {});
  }
  CHECK(mrr / queries == 1.0);
}

TEST_CASE("uniform random scorer matches the analytic expectation") {
  Rng rng(8);
  const int m = 12;
  double expected = expected_random_mrr({m});
  double analytic = 0.0;
  for (int i = 1; i <= m; ++i) analytic += 1.0 / i;
  CHECK(expected == doctest::Approx(analytic / m));

  double mc = 0.0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    std::vector<double> scores(m);
    for (double& s : scores) s = rng.uniform01();
    mc += 1.0 / filtered_rank(scores, rng.uniform_int(m), {});
  }
  CHECK(std::fabs(mc / trials - expected) < 0.02);
}

TEST_CASE("filter index") {
  std::vector<Triple> triples = {{0, 0, 1}, {0, 0, 2}, {3, 1, 1}, {0, 1, 1}};
  FilterIndex index;
  index.add(triples);
  CHECK(index.tails(0, 0) == std::vector<int>{1, 2});
  CHECK(index.heads(1, 1) == std::vector<int>{3, 0});
  CHECK(index.relations(0, 1) == std::vector<int>{0, 1});
  CHECK(index.tails(9, 9).empty());
}

TEST_CASE("evaluate mechanics on a tiny model") {
  KnowledgeGraph g;
  for (int i = 0; i < 5; ++i) g.add_entity("e" + std::to_string(i));
  g.add_relation("r");
  g.add_relation("s");
  g.add_triple(0, 0, 1);
  g.add_triple(1, 1, 2);
  g.add_triple(2, 0, 3);
  g.add_triple(3, 1, 4);
  g.add_triple(4, 0, 0);
  g.finalize();

  ModelConfig mc;
  mc.hidden_dim = 8;
  mc.heads = 2;
  mc.head_dim = 4;
  mc.update_steps = 1;
  mc.walk_len = 4;
  mc.base_walks = 1;
  FlockModel model(mc, 51);

  std::vector<Triple> eval_triples = {{0, 0, 1}, {1, 1, 2}};
  FilterIndex filter;
  filter.add(g.triples());

  EvalOptions options;
  options.passes = 2;
  options.walks = 1;
  options.seed = 3;
  options.hits_ks = {1, 3};

  std::vector<PerQueryRank> per_query;
  MetricReport both = evaluate_entity(model, g, eval_triples, filter, options, &per_query);
  CHECK(both.count == 4);  // two triples, both directions
  CHECK(per_query.size() == 4);
  CHECK(both.mrr > 0.0);
  CHECK(both.mrr <= 1.0);
  CHECK(both.hits_at.at(1) <= both.hits_at.at(3));  // hits monotone in k

  options.tail_only = true;
  MetricReport tails = evaluate_entity(model, g, eval_triples, filter, options);
  CHECK(tails.count == 2);  // the flag halves the query count

  // deterministic under threads
  options.tail_only = false;
  options.threads = 2;
  std::vector<PerQueryRank> per_query_mt;
  MetricReport threaded = evaluate_entity(model, g, eval_triples, filter, options, &per_query_mt);
  CHECK(threaded.mrr == both.mrr);
  for (size_t i = 0; i < per_query.size(); ++i) CHECK(per_query[i].rank == per_query_mt[i].rank);

  MetricReport rel = evaluate_relation(model, g, eval_triples, filter, options);
  CHECK(rel.count == 2);
  CHECK(rel.mrr > 0.0);
}
