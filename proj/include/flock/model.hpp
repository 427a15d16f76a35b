#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flock/kg.hpp"
#include "flock/record.hpp"
#include "flock/tensor.hpp"
#include "flock/walk.hpp"

namespace flock {

struct ModelConfig {
  int hidden_dim = 64;   // d, must equal heads * head_dim
  int heads = 4;         // consensus heads
  int head_dim = 16;     // per-head width
  int update_steps = 6;  // residual refinement iterations I
  int walk_len = 128;    // steps per walk l
  int base_walks = 128;  // walks per start scenario n
  int max_passes = 16;   // ensemble cap
  bool tie_update_weights = false;  // share one update network across steps
  bool resample_walks = true;       // fresh walk batch per update step
  double init_std = 0.08;

  void validate() const;
};

// Per-step update network: record encoder, bidirectional GRU sequence
// processor, and the proposal/confidence decoding heads. Gate weights are
// stored fused: w packs the input projections of (update, reset,
// candidate) side by side, u the hidden projections of (update, reset);
// the candidate's hidden projection uh stays separate because it applies
// after the reset gate.
struct GruParams {
  nn::Parameter* w;   // [d, 3d]
  nn::Parameter* u;   // [d, 2d]
  nn::Parameter* uh;  // [d, d]
  nn::Parameter* b;   // [1, 3d]
};

struct UpdateNet {
  nn::Parameter* anon_node_table;  // [l+1, d]
  nn::Parameter* anon_rel_table;   // [l+1, d]
  nn::Parameter* dir_table;        // [3, d] forward / inverse / none
  nn::Parameter* flag_head_table;  // [2, d]
  nn::Parameter* flag_rel_table;   // [2, d]
  nn::Parameter* state_node_proj;  // [d, d]
  nn::Parameter* state_rel_proj;   // [d, d]
  nn::Parameter* norm_gain;        // [1, d]
  GruParams gru_fwd, gru_bwd;
  nn::Parameter* combine_w;  // [2d, d]
  nn::Parameter* combine_b;  // [1, d]
  nn::Parameter* ffn_w1;     // [d, 2d]
  nn::Parameter* ffn_w2;     // [d, 2d]
  nn::Parameter* ffn_w3;     // [2d, d]
  nn::Parameter* prop_node_w;  // [d, d]
  nn::Parameter* prop_node_b;
  nn::Parameter* prop_rel_w;  // [d, d]
  nn::Parameter* prop_rel_b;
  nn::Parameter* conf_node_w;  // [d, heads]
  nn::Parameter* conf_node_b;
  nn::Parameter* conf_rel_w;  // [d, heads]
  nn::Parameter* conf_rel_b;
};

class FlockModel {
 public:
  FlockModel(ModelConfig config, uint64_t param_seed);

  const ModelConfig& config() const { return config_; }
  // Stable order; used by the optimizer and the checkpoint format.
  std::vector<nn::Parameter*> parameters();
  nn::Parameter* find_parameter(const std::string& name);

  // Entity and relation state tables on a tape. Relations get one extra
  // row at index num_relations for the no-relation marker; it is encoded
  // into records but never receives consensus updates.
  struct States {
    nn::Tensor nodes;  // [V, d]
    nn::Tensor rels;   // [R+1, d]
  };

  States initial_states(nn::Tape& tape, int num_entities, int num_relations);
  States update_step(nn::Tape& tape, const States& states, const Query& q,
                     const WalkBatch& batch, int step_index);

  nn::Tensor score_entities(nn::Tape& tape, const States& states, const Query& q);   // [V,1]
  nn::Tensor score_relations(nn::Tape& tape, const States& states, const Query& q);  // [R,1]

  // One stochastic pass: I update steps then candidate scoring. Walks are
  // resampled per step from pass_rng substreams unless fixed_batches
  // supplies them (must then hold one batch per update step).
  nn::Tensor forward_on_tape(nn::Tape& tape, const GraphView& g, const Query& q, int n,
                             const Rng& pass_rng,
                             const std::vector<WalkBatch>* fixed_batches = nullptr);

  // Convenience wrappers that keep no gradient state.
  nn::Array forward(const GraphView& g, const Query& q, int n, const Rng& pass_rng);
  // Mean of `passes` independent passes (pass p uses rng.substream(p)).
  nn::Array ensemble(const GraphView& g, const Query& q, int passes, int n, const Rng& rng);

  // Verification-harness hook: runs the recording protocol with an injected
  // defect so the invariance checks can demonstrate they catch it. Never
  // set in normal operation.
  void set_record_options(const RecordOptions& options) { record_options_ = options; }

 private:
  nn::Parameter* add_param(const std::string& name, int rows, int cols, double stddev,
                           Rng& rng);
  UpdateNet build_update_net(const std::string& prefix, Rng& rng);
  const UpdateNet& net_for_step(int step_index) const;

  ModelConfig config_;
  RecordOptions record_options_;
  std::vector<std::unique_ptr<nn::Parameter>> params_;
  nn::Parameter* node_init_;      // [1, d]
  nn::Parameter* rel_init_;       // [1, d]
  nn::Parameter* null_rel_init_;  // [1, d]
  std::vector<UpdateNet> updates_;
  nn::Parameter *ent_w1_, *ent_b1_, *ent_w2_, *ent_b2_;
  nn::Parameter *rel_w1_, *rel_b1_, *rel_w2_, *rel_b2_;
};

}  // namespace flock
