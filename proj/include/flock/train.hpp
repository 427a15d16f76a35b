#pragma once

#include <functional>
#include <string>
#include <vector>

#include "flock/model.hpp"
#include "flock/optim.hpp"

namespace flock {

struct TrainConfig {
  std::string task = "entity";  // "entity" | "relation"
  int negatives = 512;
  int batch_size = 8;
  double lr = 5e-4;
  double adv_temp = 1.0;
  double weight_decay = 0.01;
  long steps = 1000;
  uint64_t seed = 0;
  long val_every = 500;      // also validates at the final step
  bool mask_query_edges = true;
  bool filter_negatives = true;
  bool adv_weights_grad = false;  // ablation: backprop through adversarial weights
  double clamp_eps = 1e-7;
};

// One training example: a context graph, the query put to the model, and
// the index (entity or relation id) the model should score as true.
struct TrainExample {
  const KnowledgeGraph* graph = nullptr;
  Query query;
  int truth = -1;
};

// A source of positives. Implementations decide query orientation (e.g.
// alternating head/tail corruption via the reversed graph).
class TrainDataset {
 public:
  virtual ~TrainDataset() = default;
  virtual long size() const = 0;
  virtual TrainExample example(long index, Rng& rng) const = 0;
};

// Positives drawn from a triple list over one context graph. Entity-task
// examples corrupt the tail, or with both_directions flip a coin per draw
// and corrupt the head by querying the direction-reversed graph.
class KgTripleDataset : public TrainDataset {
 public:
  KgTripleDataset(const KnowledgeGraph& context, std::vector<Triple> positives,
                  const std::string& task, bool both_directions = true);
  long size() const override { return static_cast<long>(positives_.size()); }
  TrainExample example(long index, Rng& rng) const override;
  const KnowledgeGraph& reversed_context() const { return reversed_; }

 private:
  const KnowledgeGraph* context_;
  KnowledgeGraph reversed_;
  std::vector<Triple> positives_;
  bool entity_task_;
  bool both_directions_;
};

// Fixed example list (used for benchmark instances that carry their own
// graph and query).
class ExampleListDataset : public TrainDataset {
 public:
  explicit ExampleListDataset(std::vector<TrainExample> examples)
      : examples_(std::move(examples)) {}
  long size() const override { return static_cast<long>(examples_.size()); }
  TrainExample example(long index, Rng&) const override { return examples_[index]; }

 private:
  std::vector<TrainExample> examples_;
};

// Uniform corruption of one slot. For the entity task the tail of
// (h, r, truth) is corrupted against the query (h, r, ?); for the relation
// task the relation of (h, ?, t). Candidates exclude the true value and,
// when filtering, every value making a known-true triple. Draws are
// distinct when the pool allows it, otherwise sampled with replacement
// (logged once per call).
std::vector<int> sample_negatives(const KnowledgeGraph& g, const Query& q, int truth, int k,
                                  bool filter, Rng& rng);

// Walker view with every edge between the queried endpoints hidden.
GraphView remove_query_edges(const KnowledgeGraph& g, const Triple& positive);

// Self-adversarial negative log-likelihood. p_pos is [1,1], p_negs [k,1]
// (k may be 0). Scores are clamped to [eps, 1-eps] before the logs. The
// softmax weights over log(1-p_neg)/temperature are treated as constants
// unless weights_grad is set.
nn::Tensor adversarial_loss(nn::Tape& tape, nn::Tensor p_pos, nn::Tensor p_negs,
                            double temperature, double clamp_eps, bool weights_grad = false);

struct TrainResult {
  double best_metric = 0.0;
  long best_step = -1;
  double final_loss = 0.0;
  std::string checkpoint_path;
};

// SGD loop: per positive, mask query edges, run a stochastic forward,
// score, apply the adversarial loss, and take an AdamW step per batch.
// Everything derives from cfg.seed: positive order, walk sampling, and
// negative draws, so single-threaded runs are bit-reproducible. The best
// checkpoint by validation metric (higher is better) is written to
// out_dir/model.ckpt; pass an empty validate to skip validation and keep
// the final model instead. Training logs go to out_dir/train_log.csv.
TrainResult train(FlockModel& model, const TrainDataset& data, const TrainConfig& cfg,
                  const std::function<double(FlockModel&)>& validate,
                  const std::string& out_dir);

}  // namespace flock
