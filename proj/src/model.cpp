#include "flock/model.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace flock {

using nn::Tape;
using nn::Tensor;

void ModelConfig::validate() const {
  if (hidden_dim <= 0 || heads <= 0 || head_dim <= 0 || update_steps <= 0 || walk_len <= 0 ||
      base_walks <= 0 || max_passes <= 0)
    throw std::invalid_argument("ModelConfig: all dimensions must be positive");
  if (hidden_dim != heads * head_dim)
    throw std::invalid_argument("ModelConfig: hidden_dim (" + std::to_string(hidden_dim) +
                                ") must equal heads*head_dim (" +
                                std::to_string(heads * head_dim) + ")");
}

FlockModel::FlockModel(ModelConfig config, uint64_t param_seed) : config_(config) {
  config_.validate();
  Rng rng(param_seed);
  int d = config_.hidden_dim;
  node_init_ = add_param("init.node", 1, d, config_.init_std, rng);
  rel_init_ = add_param("init.rel", 1, d, config_.init_std, rng);
  null_rel_init_ = add_param("init.null_rel", 1, d, config_.init_std, rng);
  int step_nets = config_.tie_update_weights ? 1 : config_.update_steps;
  for (int i = 0; i < step_nets; ++i)
    updates_.push_back(build_update_net("step" + std::to_string(i) + ".", rng));
  double head_std = 1.0 / std::sqrt(static_cast<double>(d));
  ent_w1_ = add_param("head.entity.w1", d, d, head_std, rng);
  ent_b1_ = add_param("head.entity.b1", 1, d, 0.0, rng);
  ent_w2_ = add_param("head.entity.w2", d, 1, head_std, rng);
  ent_b2_ = add_param("head.entity.b2", 1, 1, 0.0, rng);
  rel_w1_ = add_param("head.relation.w1", 3 * d, d, 1.0 / std::sqrt(3.0 * d), rng);
  rel_b1_ = add_param("head.relation.b1", 1, d, 0.0, rng);
  rel_w2_ = add_param("head.relation.w2", d, 1, head_std, rng);
  rel_b2_ = add_param("head.relation.b2", 1, 1, 0.0, rng);
}

nn::Parameter* FlockModel::add_param(const std::string& name, int rows, int cols, double stddev,
                                     Rng& rng) {
  nn::Array value = stddev > 0.0 ? nn::Array::randn(rows, cols, stddev, rng)
                                 : nn::Array(rows, cols);
  params_.push_back(std::make_unique<nn::Parameter>(name, std::move(value)));
  return params_.back().get();
}

UpdateNet FlockModel::build_update_net(const std::string& prefix, Rng& rng) {
  int d = config_.hidden_dim;
  int l = config_.walk_len;
  double emb_std = config_.init_std;
  double mat_std = 1.0 / std::sqrt(static_cast<double>(d));
  UpdateNet net;
  net.anon_node_table = add_param(prefix + "anon_node", l + 1, d, emb_std, rng);
  net.anon_rel_table = add_param(prefix + "anon_rel", l + 1, d, emb_std, rng);
  net.dir_table = add_param(prefix + "dir", 3, d, emb_std, rng);
  net.flag_head_table = add_param(prefix + "flag_head", 2, d, emb_std, rng);
  net.flag_rel_table = add_param(prefix + "flag_rel", 2, d, emb_std, rng);
  net.state_node_proj = add_param(prefix + "state_node_proj", d, d, mat_std, rng);
  net.state_rel_proj = add_param(prefix + "state_rel_proj", d, d, mat_std, rng);
  net.norm_gain = add_param(prefix + "norm_gain", 1, d, 0.0, rng);
  for (double& x : net.norm_gain->value.data) x = 1.0;
  auto gru = [&](const std::string& gp) {
    GruParams g;
    g.w = add_param(gp + "w", d, 3 * d, mat_std, rng);
    g.u = add_param(gp + "u", d, 2 * d, mat_std, rng);
    g.uh = add_param(gp + "uh", d, d, mat_std, rng);
    g.b = add_param(gp + "b", 1, 3 * d, 0.0, rng);
    return g;
  };
  net.gru_fwd = gru(prefix + "gru_fwd.");
  net.gru_bwd = gru(prefix + "gru_bwd.");
  net.combine_w = add_param(prefix + "combine_w", 2 * d, d, 1.0 / std::sqrt(2.0 * d), rng);
  net.combine_b = add_param(prefix + "combine_b", 1, d, 0.0, rng);
  net.ffn_w1 = add_param(prefix + "ffn_w1", d, 2 * d, mat_std, rng);
  net.ffn_w2 = add_param(prefix + "ffn_w2", d, 2 * d, mat_std, rng);
  net.ffn_w3 = add_param(prefix + "ffn_w3", 2 * d, d, 1.0 / std::sqrt(2.0 * d), rng);
  net.prop_node_w = add_param(prefix + "prop_node_w", d, d, mat_std, rng);
  net.prop_node_b = add_param(prefix + "prop_node_b", 1, d, 0.0, rng);
  net.prop_rel_w = add_param(prefix + "prop_rel_w", d, d, mat_std, rng);
  net.prop_rel_b = add_param(prefix + "prop_rel_b", 1, d, 0.0, rng);
  net.conf_node_w = add_param(prefix + "conf_node_w", d, config_.heads, mat_std, rng);
  net.conf_node_b = add_param(prefix + "conf_node_b", 1, config_.heads, 0.0, rng);
  net.conf_rel_w = add_param(prefix + "conf_rel_w", d, config_.heads, mat_std, rng);
  net.conf_rel_b = add_param(prefix + "conf_rel_b", 1, config_.heads, 0.0, rng);
  return net;
}

std::vector<nn::Parameter*> FlockModel::parameters() {
  std::vector<nn::Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

nn::Parameter* FlockModel::find_parameter(const std::string& name) {
  for (auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

const UpdateNet& FlockModel::net_for_step(int step_index) const {
  return updates_[config_.tie_update_weights ? 0 : step_index];
}

FlockModel::States FlockModel::initial_states(Tape& tape, int num_entities, int num_relations) {
  Tensor node_row = tape.leaf(*node_init_);
  Tensor rel_row = tape.leaf(*rel_init_);
  Tensor null_row = tape.leaf(*null_rel_init_);
  States st;
  st.nodes = tape.repeat_row(node_row, num_entities);
  st.rels = tape.concat_rows({tape.repeat_row(rel_row, num_relations), null_row});
  return st;
}

FlockModel::States FlockModel::update_step(Tape& tape, const States& states, const Query& q,
                                           const WalkBatch& batch, int step_index) {
  const UpdateNet& net = net_for_step(step_index);
  int n_walks = static_cast<int>(batch.walks.size());
  if (n_walks == 0) throw std::invalid_argument("update_step: empty walk batch");
  int l = batch.walks[0].length();
  if (l > config_.walk_len)
    throw std::invalid_argument("update_step: walk length " + std::to_string(l) +
                                " exceeds configured maximum " +
                                std::to_string(config_.walk_len));
  int positions = l + 1;
  int rows = positions * n_walks;  // row = position * n_walks + walk
  int num_entities = states.nodes.rows();
  int null_row_index = states.rels.rows() - 1;

  std::vector<int> anon_node_idx(rows), anon_rel_idx(rows), dir_idx(rows), qh_idx(rows),
      qr_idx(rows), node_row(rows), rel_row(rows);
  std::vector<Record> records(n_walks);
  for (int w = 0; w < n_walks; ++w) {
    const Walk& walk = batch.walks[w];
    if (walk.length() != l)
      throw std::invalid_argument("update_step: walks in a batch must share one length");
    records[w] = make_record(walk, q, record_options_);
    for (int s = 0; s < positions; ++s) {
      int row = s * n_walks + w;
      anon_node_idx[row] = records[w].node_anon[s];
      anon_rel_idx[row] = records[w].rel_anon[s];
      dir_idx[row] = static_cast<int>(records[w].direction[s]);
      qh_idx[row] = records[w].is_query_head[s];
      qr_idx[row] = records[w].is_query_rel[s];
      node_row[row] = walk.node_at(s);
      rel_row[row] = s == 0 ? null_row_index : walk.steps[s - 1].rel;
    }
  }

  Tensor enc = tape.gather_rows(tape.leaf(*net.anon_node_table), anon_node_idx);
  enc = tape.add(enc, tape.gather_rows(tape.leaf(*net.anon_rel_table), anon_rel_idx));
  enc = tape.add(enc, tape.gather_rows(tape.leaf(*net.dir_table), dir_idx));
  enc = tape.add(enc, tape.gather_rows(tape.leaf(*net.flag_head_table), qh_idx));
  enc = tape.add(enc, tape.gather_rows(tape.leaf(*net.flag_rel_table), qr_idx));
  Tensor node_states = tape.gather_rows(states.nodes, node_row);
  Tensor rel_states = tape.gather_rows(states.rels, rel_row);
  enc = tape.add(enc, tape.matmul(node_states, tape.leaf(*net.state_node_proj)));
  enc = tape.add(enc, tape.matmul(rel_states, tape.leaf(*net.state_rel_proj)));

  Tensor normed = tape.rmsnorm(enc, tape.leaf(*net.norm_gain), 1e-6);

  int d = config_.hidden_dim;
  // The input-side gate projection is position-independent, so it runs as
  // one batched matmul over all (walk, position) rows per direction; the
  // recurrence then only multiplies against the hidden state.
  auto run_direction = [&](const GruParams& g, bool reverse) {
    Tensor gates_x = tape.add(tape.matmul(normed, tape.leaf(*g.w)), tape.leaf(*g.b));
    Tensor u = tape.leaf(*g.u);
    Tensor uh = tape.leaf(*g.uh);
    std::vector<Tensor> states(positions);
    Tensor h = tape.zeros(n_walks, d);
    for (int step = 0; step < positions; ++step) {
      int s = reverse ? positions - 1 - step : step;
      Tensor xs = tape.slice_rows(gates_x, s * n_walks, (s + 1) * n_walks);
      Tensor hu = tape.matmul(h, u);
      Tensor z = tape.sigmoid(tape.add(tape.slice_cols(xs, 0, d), tape.slice_cols(hu, 0, d)));
      Tensor r =
          tape.sigmoid(tape.add(tape.slice_cols(xs, d, 2 * d), tape.slice_cols(hu, d, 2 * d)));
      Tensor cand = tape.tanh(
          tape.add(tape.slice_cols(xs, 2 * d, 3 * d), tape.matmul(tape.mul(r, h), uh)));
      h = tape.add(tape.mul(z, h), tape.mul(tape.one_minus(z), cand));
      states[s] = h;
    }
    return states;
  };
  std::vector<Tensor> h_fwd = run_direction(net.gru_fwd, false);
  std::vector<Tensor> h_bwd = run_direction(net.gru_bwd, true);
  Tensor both = tape.concat_cols({tape.concat_rows(h_fwd), tape.concat_rows(h_bwd)});
  Tensor y = tape.add(tape.matmul(both, tape.leaf(*net.combine_w)), tape.leaf(*net.combine_b));
  Tensor gated = tape.matmul(
      tape.mul(tape.matmul(y, tape.leaf(*net.ffn_w1)),
               tape.swish(tape.matmul(y, tape.leaf(*net.ffn_w2)))),
      tape.leaf(*net.ffn_w3));
  Tensor feat = tape.add(y, gated);

  Tensor props_node =
      tape.add(tape.matmul(feat, tape.leaf(*net.prop_node_w)), tape.leaf(*net.prop_node_b));
  Tensor props_rel =
      tape.add(tape.matmul(feat, tape.leaf(*net.prop_rel_w)), tape.leaf(*net.prop_rel_b));
  Tensor conf_node =
      tape.add(tape.matmul(feat, tape.leaf(*net.conf_node_w)), tape.leaf(*net.conf_node_b));
  Tensor conf_rel =
      tape.add(tape.matmul(feat, tape.leaf(*net.conf_rel_w)), tape.leaf(*net.conf_rel_b));

  // Consensus pooling. Contributions enter segment member lists in (walk,
  // position) order so summation is canonical and relabeling-exact.
  std::vector<std::vector<int>> node_segments, rel_segments;
  std::vector<int> node_of_segment, rel_of_segment;
  std::unordered_map<int, int> node_seg, rel_seg;
  for (int w = 0; w < n_walks; ++w) {
    for (int s = 0; s < positions; ++s) {
      int row = s * n_walks + w;
      auto [it, fresh] = node_seg.try_emplace(node_row[row],
                                              static_cast<int>(node_segments.size()));
      if (fresh) {
        node_segments.emplace_back();
        node_of_segment.push_back(node_row[row]);
      }
      node_segments[it->second].push_back(row);
      if (s == 0) continue;  // the no-relation slot takes no part in pooling
      auto [rit, rfresh] =
          rel_seg.try_emplace(rel_row[row], static_cast<int>(rel_segments.size()));
      if (rfresh) {
        rel_segments.emplace_back();
        rel_of_segment.push_back(rel_row[row]);
      }
      rel_segments[rit->second].push_back(row);
    }
  }

  Tensor pooled_nodes =
      tape.segment_softmax_pool(props_node, conf_node, node_segments, config_.heads);
  Tensor pooled_rels =
      tape.segment_softmax_pool(props_rel, conf_rel, rel_segments, config_.heads);

  States next;
  next.nodes = tape.add(states.nodes,
                        tape.scatter_add_rows(pooled_nodes, node_of_segment, num_entities));
  next.rels = tape.add(states.rels,
                       tape.scatter_add_rows(pooled_rels, rel_of_segment, null_row_index + 1));
  return next;
}

Tensor FlockModel::score_entities(Tape& tape, const States& states, const Query& q) {
  if (q.kind != QueryKind::kEntityPrediction)
    throw std::invalid_argument("score_entities: entity query required");
  Tensor rel_state = tape.gather_rows(states.rels, {q.rel});
  Tensor feats = tape.add(states.nodes, rel_state);  // row broadcast over candidates
  Tensor h1 = tape.swish(tape.add(tape.matmul(feats, tape.leaf(*ent_w1_)), tape.leaf(*ent_b1_)));
  return tape.sigmoid(tape.add(tape.matmul(h1, tape.leaf(*ent_w2_)), tape.leaf(*ent_b2_)));
}

Tensor FlockModel::score_relations(Tape& tape, const States& states, const Query& q) {
  if (q.kind != QueryKind::kRelationPrediction)
    throw std::invalid_argument("score_relations: relation query required");
  int num_relations = states.rels.rows() - 1;
  Tensor vh = tape.gather_rows(states.nodes, {q.head});
  Tensor vt = tape.gather_rows(states.nodes, {q.tail});
  Tensor feats = tape.concat_cols({tape.repeat_row(vh, num_relations),
                                   tape.repeat_row(vt, num_relations),
                                   tape.slice_rows(states.rels, 0, num_relations)});
  Tensor h1 = tape.swish(tape.add(tape.matmul(feats, tape.leaf(*rel_w1_)), tape.leaf(*rel_b1_)));
  return tape.sigmoid(tape.add(tape.matmul(h1, tape.leaf(*rel_w2_)), tape.leaf(*rel_b2_)));
}

Tensor FlockModel::forward_on_tape(Tape& tape, const GraphView& g, const Query& q, int n,
                                   const Rng& pass_rng,
                                   const std::vector<WalkBatch>* fixed_batches) {
  if (fixed_batches && static_cast<int>(fixed_batches->size()) != config_.update_steps)
    throw std::invalid_argument("forward_on_tape: need one fixed batch per update step");
  States st = initial_states(tape, g.num_entities(), g.num_relations());
  WalkBatch reused;
  for (int i = 0; i < config_.update_steps; ++i) {
    const WalkBatch* batch;
    if (fixed_batches) {
      batch = &(*fixed_batches)[i];
    } else if (config_.resample_walks) {
      reused = sample_walk_batch(g, q, n, config_.walk_len, pass_rng.substream(i));
      batch = &reused;
    } else {
      if (i == 0) reused = sample_walk_batch(g, q, n, config_.walk_len, pass_rng.substream(0));
      batch = &reused;
    }
    st = update_step(tape, st, q, *batch, i);
  }
  return q.kind == QueryKind::kEntityPrediction ? score_entities(tape, st, q)
                                                : score_relations(tape, st, q);
}

nn::Array FlockModel::forward(const GraphView& g, const Query& q, int n, const Rng& pass_rng) {
  Tape tape;
  return forward_on_tape(tape, g, q, n, pass_rng).value();
}

nn::Array FlockModel::ensemble(const GraphView& g, const Query& q, int passes, int n,
                               const Rng& rng) {
  if (passes < 1 || passes > config_.max_passes)
    throw std::invalid_argument("ensemble: passes must be in [1, " +
                                std::to_string(config_.max_passes) + "]");
  nn::Array acc;
  for (int p = 0; p < passes; ++p) {
    nn::Array scores = forward(g, q, n, rng.substream(p));
    if (p == 0) {
      acc = std::move(scores);
    } else {
      for (size_t i = 0; i < acc.size(); ++i) acc.data[i] += scores.data[i];
    }
  }
  for (double& x : acc.data) x /= passes;
  return acc;
}

}  // namespace flock
