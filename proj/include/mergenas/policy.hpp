#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "mergenas/graph.hpp"
#include "mergenas/rng.hpp"
#include "mergenas/search_space.hpp"
#include "mergenas/trajectory.hpp"

namespace mergenas {

struct PolicyConfig {
  int emb_dim = 8;       // state, action and task embeddings
  int d_model = 24;      // 3 * emb_dim after concatenation
  int n_layers = 2;      // encoder depth, single-head
  int ff_dim = 96;       // 4 * d_model
  int max_len = 64;      // positional table rows
  double emb_init = 0.1; // embeddings ~ U[-emb_init, emb_init]
  // Positional rows start as the sinusoidal pattern (still learned); strong
  // position signatures at the first layer are what lets its attention key on
  // absolute positions from the start.
  bool pos_sinusoid_init = true;
  double pos_sinusoid_base = 20.0;  // wavelength base; small, since chains are short
  double pos_init = 0.1;       // uniform half-width when not sinusoidal
  double qk_init_scale = 1.0;  // damping of the first layer's score projections
  double qk_init_scale_deep = 1.0;  // same for layers past the first
  bool wo_init_zero = false;   // start attention outputs silent (residual only)

  void check() const {
    if (d_model != 3 * emb_dim)
      throw contract_error("PolicyConfig: d_model must equal 3*emb_dim");
  }

  // Concatenated embeddings are multiplied by sqrt(d_model) before the
  // positional encoding is added, as in the original encoder stack; without
  // it the first layer's attention scores start four orders of magnitude
  // below usable and the layer never differentiates.
  double input_scale() const { return std::sqrt(static_cast<double>(d_model)); }
};

// All learnable parameters of the agent, keyed by stable names so they can be
// matched across spaces when transferring.
struct PolicyParams {
  PolicyConfig cfg;
  ParamStore store;

  struct LayerIds {
    int wq, wk, wv, wo;
    int ff_w1, ff_b1, ff_w2, ff_b2;
    int ln1_g, ln1_b, ln2_g, ln2_b;
  };
  int pos = -1;  // [max_len, d_model]
  std::vector<LayerIds> layers;
  std::unordered_map<std::string, int> state_emb;
  std::unordered_map<std::string, int> task_emb;
  std::unordered_map<std::string, int> action_emb;  // key: state + '\x1f' + action
  std::unordered_map<std::string, int> head_w;      // per state, [d_model, 1]
  std::unordered_map<std::string, int> head_b;      // per state, [1, 1]

  static std::string action_key(const std::string& state, const std::string& action) {
    return state + '\x1f' + action;
  }

  int state_emb_id(const std::string& state) const;
  int task_emb_id(const std::string& task) const;
  int action_emb_id(const std::string& state, const std::string& action) const;
  int head_w_id(const std::string& state) const;
  int head_b_id(const std::string& state) const;

  // Fresh parameters covering every name the merged space can reach.
  // Creation order is canonical, so equal seeds give equal draws.
  static PolicyParams init(const MergedSpace& m, const PolicyConfig& cfg, Rng& rng);

  // Rebuilds the id caches after store surgery (checkpoint load).
  void reindex();
};

// Incremental per-trajectory forward pass: feeds one concatenated input per
// chosen action and evaluates every candidate of the next step through the
// encoder, retaining the last output embedding for the state head.
class PolicyForward {
 public:
  PolicyForward(Graph& g, const PolicyParams& p, const MergedSpace& m, const PairKey& pair,
                bool record_attention = false);

  struct StepOut {
    StepDistribution dist;       // softmax over candidate logits (no mixing)
    int logits_node = -1;        // [1, k]
    int probs_node = -1;         // [1, k]
    std::vector<int> input_nodes;                 // candidate StepInput per candidate
    std::vector<std::vector<Tensor>> attention;   // [candidate][layer], when recording
  };

  // Forced selector step: appends the pair's space action at the start state.
  void push_start();
  StepOut next_distribution(const std::string& state,
                            const std::vector<std::string>& candidates);
  void push_chosen(const StepOut& step, int candidate_index);
  int position() const { return n_inputs_; }

 private:
  int step_input(const std::string& state, const std::string& action, int position);
  int encoder(int x, std::vector<Tensor>* attn_out);

  Graph& g_;
  const PolicyParams& p_;
  const MergedSpace& m_;
  PairKey pair_;
  bool record_attention_;
  int task_node_ = -1;
  int past_matrix_ = -1;
  int n_inputs_ = 0;
};

// pi' = (1-gamma) * pi + gamma / k, logits replaced by log pi'.
StepDistribution mix_with_uniform(const StepDistribution& d, double gamma);

// One policy evaluation after the given action history (the start selector
// included as history[0]); state and candidates come from the space.
struct EncodeResult {
  std::string state;
  StepDistribution dist;
  std::vector<std::vector<Tensor>> attention;  // [candidate][layer]
};
EncodeResult encode_step(Graph& g, const PolicyParams& p, const MergedSpace& m,
                         const PairKey& pair, const std::vector<std::string>& history,
                         bool record_attention = false);

struct SampleOptions {
  double gamma = 0.0;
  bool record_attention = false;
};

Trajectory sample_trajectory(Graph& g, const PolicyParams& p, const MergedSpace& m,
                             const PairKey& pair, const SampleOptions& opt, Rng& rng);

// Rejection-samples until the decoded genotype validates. Spaces without an
// architecture encoding accept every trajectory. Rejected draws are discarded
// unevaluated.
Trajectory sample_valid_genotype(Graph& g, const PolicyParams& p, const MergedSpace& m,
                                 const PairKey& pair, const SampleOptions& opt, Rng& rng,
                                 long long max_rejects, long long* rejects_out = nullptr);

// Teacher-forced loss over a fixed action sequence:
//   loss = -( advantage * sum_m log pi(a_m) + lambda_pqt * sum log pi(replay)
//             + lambda_ent * mean_m H_m )
// built in one graph so a single backward yields the combined gradient.
struct LossSpec {
  std::vector<std::string> actions;
  double advantage = 0.0;
  std::vector<std::string> replay;  // empty -> no replay term
  double lambda_pqt = 0.0;
  double lambda_ent = 0.0;
};

struct LossNodes {
  int loss = -1;          // scalar to minimize
  int logp_sum = -1;      // sum of log-probs of `actions`
  int j_term = -1;        // advantage * logp_sum
  int entropy_mean = -1;  // mean per-step entropy of `actions` pass
  int pqt_logp_sum = -1;  // -1 when no replay
};

LossNodes build_trajectory_loss(Graph& g, const PolicyParams& p, const MergedSpace& m,
                                const PairKey& pair, const LossSpec& spec);

// Numeric value of the loss above under the given store contents; used by
// finite-difference checks.
double trajectory_loss_value(const PolicyParams& p, const ParamStore& store,
                             const MergedSpace& m, const PairKey& pair,
                             const LossSpec& spec);

// Plain-text matrix dump, one row per line. Consumed by the harness.
void write_matrix(const Tensor& t, const std::string& path);

}  // namespace mergenas
