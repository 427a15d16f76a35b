#include "flock/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "flock/checkpoint.hpp"
#include "flock/log.hpp"

namespace flock {

std::vector<int> sample_negatives(const KnowledgeGraph& g, const Query& q, int truth, int k,
                                  bool filter, Rng& rng) {
  if (k < 1) throw std::invalid_argument("sample_negatives: k must be >= 1");
  bool entity_task = q.kind == QueryKind::kEntityPrediction;
  int domain = entity_task ? g.num_entities() : g.num_relations();
  if (domain < 2)
    throw std::invalid_argument("sample_negatives: need at least two candidates to corrupt");

  std::set<int> banned{truth};
  if (filter) {
    for (const Triple& t : g.triples()) {
      if (entity_task) {
        if (t.head == q.head && t.rel == q.rel) banned.insert(t.tail);
      } else {
        if (t.head == q.head && t.tail == q.tail) banned.insert(t.rel);
      }
    }
  }
  std::vector<int> pool;
  pool.reserve(domain);
  for (int c = 0; c < domain; ++c)
    if (!banned.count(c)) pool.push_back(c);
  if (pool.empty())
    throw std::runtime_error("sample_negatives: every candidate is a known true value");

  std::vector<int> out;
  out.reserve(k);
  if (static_cast<int>(pool.size()) >= k) {
    // distinct draws via partial Fisher-Yates
    for (int i = 0; i < k; ++i) {
      int j = i + rng.uniform_int(static_cast<int>(pool.size()) - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
  } else {
    log_warn("sample_negatives: only " + std::to_string(pool.size()) +
             " candidates for k=" + std::to_string(k) + ", sampling with replacement");
    for (int i = 0; i < k; ++i)
      out.push_back(pool[rng.uniform_int(static_cast<int>(pool.size()))]);
  }
  return out;
}

GraphView remove_query_edges(const KnowledgeGraph& g, const Triple& positive) {
  return GraphView(g, positive.head, positive.tail);
}

KgTripleDataset::KgTripleDataset(const KnowledgeGraph& context, std::vector<Triple> positives,
                                 const std::string& task, bool both_directions)
    : context_(&context),
      positives_(std::move(positives)),
      entity_task_(task == "entity"),
      both_directions_(both_directions) {
  if (task != "entity" && task != "relation")
    throw std::invalid_argument("KgTripleDataset: task must be 'entity' or 'relation'");
  if (positives_.empty()) throw std::invalid_argument("KgTripleDataset: no positives");
  if (entity_task_ && both_directions_) reversed_ = context.reversed();
}

TrainExample KgTripleDataset::example(long index, Rng& rng) const {
  const Triple& t = positives_[index];
  TrainExample ex;
  if (!entity_task_) {
    ex.graph = context_;
    ex.query = Query::relation(t.head, t.tail);
    ex.truth = t.rel;
    return ex;
  }
  bool head_side = both_directions_ && rng.uniform_int(2) == 1;
  if (head_side) {
    ex.graph = &reversed_;
    ex.query = Query::entity(t.tail, t.rel);
    ex.truth = t.head;
  } else {
    ex.graph = context_;
    ex.query = Query::entity(t.head, t.rel);
    ex.truth = t.tail;
  }
  return ex;
}

nn::Tensor adversarial_loss(nn::Tape& tape, nn::Tensor p_pos, nn::Tensor p_negs,
                            double temperature, double clamp_eps, bool weights_grad) {
  if (temperature <= 0.0)
    throw std::invalid_argument("adversarial_loss: temperature must be positive");
  nn::Tensor pos_term =
      tape.scale(tape.log(tape.clamp(p_pos, clamp_eps, 1.0 - clamp_eps)), -1.0);
  int k = p_negs.valid() ? p_negs.rows() : 0;
  if (k == 0) return pos_term;

  nn::Tensor log1m = tape.log(tape.clamp(tape.one_minus(p_negs), clamp_eps, 1.0 - clamp_eps));
  nn::Tensor neg_term;
  if (weights_grad) {
    nn::Tensor logits = tape.transpose(tape.scale(log1m, 1.0 / temperature));  // [1,k]
    nn::Tensor weights = tape.softmax_rows(logits);
    neg_term = tape.scale(tape.sum(tape.mul(weights, tape.transpose(log1m))), -1.0);
  } else {
    const nn::Array& vals = log1m.value();
    std::vector<double> weights(vals.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : vals.data) mx = std::max(mx, v / temperature);
    double z = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
      weights[i] = std::exp(vals.data[i] / temperature - mx);
      z += weights[i];
    }
    for (double& w : weights) w /= z;
    neg_term = tape.scale(tape.dot_const(log1m, weights), -1.0);
  }
  return tape.add(pos_term, neg_term);
}

TrainResult train(FlockModel& model, const TrainDataset& data, const TrainConfig& cfg,
                  const std::function<double(FlockModel&)>& validate,
                  const std::string& out_dir) {
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (cfg.task != "entity" && cfg.task != "relation")
    throw std::invalid_argument("train: task must be 'entity' or 'relation'");
  std::filesystem::create_directories(out_dir);
  std::string ckpt_path = out_dir + "/model.ckpt";
  std::ofstream log_csv(out_dir + "/train_log.csv");
  log_csv << "step,loss,val_metric\n";

  nn::AdamWConfig opt_cfg;
  opt_cfg.lr = cfg.lr;
  opt_cfg.weight_decay = cfg.weight_decay;
  nn::AdamW optimizer(model.parameters(), opt_cfg);

  Rng root(cfg.seed);
  Rng order_rng = root.substream(2);
  std::vector<long> order(data.size());
  for (long i = 0; i < data.size(); ++i) order[i] = i;
  long cursor = 0;
  auto next_index = [&]() {
    if (cursor == 0) {  // reshuffle at each epoch boundary
      for (long i = data.size() - 1; i > 0; --i)
        std::swap(order[i], order[order_rng.uniform_int(static_cast<int>(i + 1))]);
    }
    long idx = order[cursor];
    cursor = (cursor + 1) % data.size();
    return idx;
  };

  TrainResult result;
  result.best_metric = -std::numeric_limits<double>::infinity();
  bool saved_any = false;

  for (long step = 0; step < cfg.steps; ++step) {
    optimizer.zero_grad();
    double batch_loss = 0.0;
    for (int slot = 0; slot < cfg.batch_size; ++slot) {
      // all randomness of this positive flows from (seed, step, slot)
      Rng pos_rng = root.substream(1).substream(step).substream(slot);
      long idx = next_index();
      Rng example_rng = pos_rng.substream(0);
      TrainExample ex = data.example(idx, example_rng);

      Triple positive = ex.query.kind == QueryKind::kEntityPrediction
                            ? Triple{ex.query.head, ex.query.rel, ex.truth}
                            : Triple{ex.query.head, ex.truth, ex.query.tail};
      GraphView view = cfg.mask_query_edges ? remove_query_edges(*ex.graph, positive)
                                            : GraphView(*ex.graph);

      Rng neg_rng = pos_rng.substream(1);
      std::vector<int> negatives = sample_negatives(*ex.graph, ex.query, ex.truth,
                                                    cfg.negatives, cfg.filter_negatives,
                                                    neg_rng);

      nn::Tape tape;
      nn::Tensor scores = model.forward_on_tape(tape, view, ex.query,
                                                model.config().base_walks,
                                                pos_rng.substream(2));
      nn::Tensor p_pos = tape.gather_rows(scores, {ex.truth});
      nn::Tensor p_negs = tape.gather_rows(scores, negatives);
      nn::Tensor loss = adversarial_loss(tape, p_pos, p_negs, cfg.adv_temp, cfg.clamp_eps,
                                         cfg.adv_weights_grad);
      nn::Tensor scaled = tape.scale(loss, 1.0 / cfg.batch_size);
      double loss_val = loss.value().data[0];
      if (!std::isfinite(loss_val))
        throw std::runtime_error("train: non-finite loss at step " + std::to_string(step));
      batch_loss += loss_val / cfg.batch_size;
      tape.backward(scaled);
    }
    optimizer.step();
    result.final_loss = batch_loss;

    bool last = step + 1 == cfg.steps;
    bool validate_now =
        validate && (last || (cfg.val_every > 0 && (step + 1) % cfg.val_every == 0));
    double metric = std::numeric_limits<double>::quiet_NaN();
    if (validate_now) {
      metric = validate(model);
      if (metric > result.best_metric) {
        result.best_metric = metric;
        result.best_step = step + 1;
        save_checkpoint(ckpt_path, model);
        saved_any = true;
      }
      log_info("step " + std::to_string(step + 1) + " loss " + std::to_string(batch_loss) +
               " val " + std::to_string(metric));
    }
    log_csv << (step + 1) << "," << batch_loss << ","
            << (std::isnan(metric) ? "" : std::to_string(metric)) << "\n";
  }
  if (!saved_any) save_checkpoint(ckpt_path, model);
  result.checkpoint_path = ckpt_path;
  log_csv.flush();
  if (!log_csv) throw std::runtime_error("train: failed writing " + out_dir + "/train_log.csv");
  return result;
}

}  // namespace flock
