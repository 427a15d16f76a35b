#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "flock/log.hpp"
#include "flock/stats.hpp"
#include "flock/train.hpp"

using namespace flock;
using nn::Tape;
using nn::Tensor;

namespace {

KnowledgeGraph toy_graph() {
  KnowledgeGraph g;
  for (int i = 0; i < 6; ++i) g.add_entity("e" + std::to_string(i));
  g.add_relation("r");
  g.add_relation("s");
  g.add_relation("t");
  g.add_triple(0, 0, 1);
  g.add_triple(1, 1, 2);
  g.add_triple(2, 0, 3);
  g.add_triple(3, 1, 4);
  g.add_triple(4, 2, 5);
  g.add_triple(5, 0, 0);
  g.add_triple(0, 2, 3);
  g.add_triple(1, 0, 4);
  g.finalize();
  return g;
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.hidden_dim = 8;
  c.heads = 2;
  c.head_dim = 4;
  c.update_steps = 2;
  c.walk_len = 4;
  c.base_walks = 1;
  return c;
}

}  // namespace

TEST_CASE("negative sampling") {
  SUBCASE("two-entity graph leaves a single candidate") {
    KnowledgeGraph g;
    g.add_entity("a");
    g.add_entity("b");
    g.add_relation("r");
    g.add_triple(0, 0, 1);
    g.finalize();
    Rng rng(1);
    set_log_level(LogLevel::kError);
    auto negs = sample_negatives(g, Query::entity(0, 0), /*truth=*/1, 3, true, rng);
    set_log_level(LogLevel::kInfo);
    REQUIRE(negs.size() == 3);
    for (int n : negs) CHECK(n == 0);  // replacement kicks in
  }
  SUBCASE("relation task draws from the other relations") {
    KnowledgeGraph g = toy_graph();
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
      auto negs = sample_negatives(g, Query::relation(0, 1), /*truth=*/0, 2, true, rng);
      REQUIRE(negs.size() == 2);
      CHECK(negs[0] != negs[1]);
      for (int n : negs) CHECK(n != 0);
    }
  }
  SUBCASE("filtering rejects known true tails") {
    KnowledgeGraph g = toy_graph();  // (0,0,1) is true, so 1 never appears
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
      auto negs = sample_negatives(g, Query::entity(0, 0), 1, 4, true, rng);
      for (int n : negs) CHECK(n != 1);
    }
  }
  SUBCASE("corrupted tails are uniform") {
    KnowledgeGraph g = toy_graph();
    Rng rng(4);
    std::vector<long> counts(6, 0);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
      counts[sample_negatives(g, Query::entity(0, 1), 2, 1, false, rng)[0]]++;
    // truth (entity 2) excluded, others uniform
    CHECK(counts[2] == 0);
    std::vector<long> observed = {counts[0], counts[1], counts[3], counts[4], counts[5]};
    CHECK(chi_squared_test(observed, std::vector<double>(5, 0.2)) > 0.01);
  }
}

TEST_CASE("query edge removal hides the endpoints pair only") {
  KnowledgeGraph g = toy_graph();
  GraphView view = remove_query_edges(g, {0, 0, 1});
  CHECK(view.edges_between(0, 1).empty());
  CHECK(view.edges_between(1, 0).empty());
  CHECK(!view.edges_between(1, 2).empty());
  CHECK(!g.edges_between(0, 1).empty());  // original untouched
}

TEST_CASE("adversarial loss") {
  auto loss_value = [](double p_pos, std::vector<double> p_negs, double temp,
                       bool grad_weights = false) {
    Tape tape;
    Tensor pos = tape.constant(nn::Array(1, 1, p_pos));
    nn::Array negs(static_cast<int>(p_negs.size()), 1);
    negs.data.assign(p_negs.begin(), p_negs.end());
    Tensor neg = tape.constant(negs);
    return adversarial_loss(tape, pos, neg, temp, 1e-7, grad_weights).value().data[0];
  };

  SUBCASE("perfect scores drive the loss to zero") {
    CHECK(loss_value(1.0 - 1e-9, {1e-9, 1e-9}, 1.0) == doctest::Approx(0.0).epsilon(1e-5));
  }
  SUBCASE("single negative has weight exactly one") {
    double expected = -std::log(0.7) - std::log(1.0 - 0.4);
    CHECK(loss_value(0.7, {0.4}, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("equal negatives reduce to a plain average") {
    double expected = -std::log(0.6) - std::log(1.0 - 0.3);
    CHECK(loss_value(0.6, {0.3, 0.3, 0.3}, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("high temperature approaches uniform weights") {
    std::vector<double> negs = {0.1, 0.5, 0.9};
    double uniform = -std::log(0.6);
    for (double p : negs) uniform += -std::log(1.0 - p) / 3.0;
    CHECK(loss_value(0.6, negs, 1e9) == doctest::Approx(uniform).epsilon(1e-6));
  }
  SUBCASE("empty negatives leave the positive term") {
    Tape tape;
    Tensor pos = tape.constant(nn::Array(1, 1, 0.25));
    Tensor loss = adversarial_loss(tape, pos, Tensor{}, 1.0, 1e-7);
    CHECK(loss.value().data[0] == doctest::Approx(-std::log(0.25)));
  }
  SUBCASE("weights-grad ablation computes the same value") {
    CHECK(loss_value(0.6, {0.2, 0.7}, 1.0, true) ==
          doctest::Approx(loss_value(0.6, {0.2, 0.7}, 1.0, false)).epsilon(1e-12));
  }
  SUBCASE("loss is non-negative") {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
      double p = rng.uniform01() * 0.98 + 0.01;
      std::vector<double> negs;
      for (int k = 0; k < 4; ++k) negs.push_back(rng.uniform01() * 0.98 + 0.01);
      CHECK(loss_value(p, negs, 1.0) >= 0.0);
    }
  }
}

TEST_CASE("training loss gradient matches finite differences") {
  KnowledgeGraph g = toy_graph();
  ModelConfig cfg = tiny_config();
  FlockModel model(cfg, 31);
  Query q = Query::entity(0, 0);
  GraphView view = remove_query_edges(g, {0, 0, 1});
  std::vector<WalkBatch> batches;
  for (int i = 0; i < cfg.update_steps; ++i)
    batches.push_back(sample_walk_batch(view, q, 1, 4, Rng(500 + i)));

  // one negative keeps the adversarial weight at exactly 1, so the
  // detached-weights gradient is the true gradient
  auto loss_fn = [&](bool with_grad) {
    Tape tape;
    Tensor scores = model.forward_on_tape(tape, view, q, 1, Rng(0), &batches);
    Tensor p_pos = tape.gather_rows(scores, {1});
    Tensor p_neg = tape.gather_rows(scores, {4});
    Tensor loss = adversarial_loss(tape, p_pos, p_neg, 1.0, 1e-7);
    if (with_grad) tape.backward(loss);
    return loss.value().data[0];
  };
  std::vector<nn::Parameter*> probe = {
      model.find_parameter("init.rel"), model.find_parameter("step1.gru_bwd.uh"),
      model.find_parameter("step0.state_node_proj"), model.find_parameter("head.entity.w1")};
  for (auto* p : probe) REQUIRE(p != nullptr);
  CHECK(nn::gradient_check_params(loss_fn, probe) < 1e-3);
}

TEST_CASE("training loop") {
  KnowledgeGraph g = toy_graph();
  KgTripleDataset data(g, g.triples(), "entity");
  std::string out_dir = "/tmp/flock_test_train";
  std::filesystem::remove_all(out_dir);

  ModelConfig mc = tiny_config();
  TrainConfig tc;
  tc.negatives = 3;
  tc.batch_size = 2;
  tc.steps = 4;
  tc.seed = 9;
  tc.val_every = 0;

  SUBCASE("zero learning rate leaves parameters untouched") {
    FlockModel model(mc, 41);
    std::vector<nn::Array> before;
    for (auto* p : model.parameters()) before.push_back(p->value);
    TrainConfig frozen = tc;
    frozen.lr = 0.0;
    frozen.weight_decay = 0.0;
    train(model, data, frozen, {}, out_dir);
    auto params = model.parameters();
    for (size_t i = 0; i < params.size(); ++i) CHECK(params[i]->value.data == before[i].data);
  }

  SUBCASE("training is bit-reproducible under a fixed seed") {
    FlockModel m1(mc, 42), m2(mc, 42);
    train(m1, data, tc, {}, out_dir + "/a");
    train(m2, data, tc, {}, out_dir + "/b");
    auto p1 = m1.parameters(), p2 = m2.parameters();
    for (size_t i = 0; i < p1.size(); ++i) CHECK(p1[i]->value.data == p2[i]->value.data);
  }

  SUBCASE("loss decreases over a short run") {
    FlockModel model(mc, 43);
    TrainConfig longer = tc;
    longer.steps = 50;
    longer.batch_size = 1;
    TrainResult result = train(model, data, longer, {}, out_dir + "/c");
    // compare mean loss of the first and last 10 steps from the CSV
    std::ifstream csv(out_dir + "/c/train_log.csv");
    std::string line;
    std::getline(csv, line);  // header
    std::vector<double> losses;
    while (std::getline(csv, line)) {
      size_t c1 = line.find(',');
      size_t c2 = line.find(',', c1 + 1);
      losses.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    }
    REQUIRE(losses.size() == 50);
    double head = 0, tail = 0;
    for (int i = 0; i < 10; ++i) {
      head += losses[i] / 10.0;
      tail += losses[40 + i] / 10.0;
    }
    CHECK(tail < head);
    CHECK(std::filesystem::exists(result.checkpoint_path));
  }
}
