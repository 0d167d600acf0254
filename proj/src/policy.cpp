#include "mergenas/policy.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace mergenas {

namespace {

Tensor uniform_tensor(int r, int c, double lim, Rng& rng) {
  Tensor t(r, c, 0.0);
  for (double& v : t.data) v = rng.uniform(-lim, lim);
  return t;
}

Tensor glorot_tensor(int r, int c, Rng& rng) {
  const double lim = std::sqrt(6.0 / (r + c));
  return uniform_tensor(r, c, lim, rng);
}

Tensor sinusoid_tensor(int rows, int cols, double base) {
  Tensor t(rows, cols, 0.0);
  for (int p = 0; p < rows; ++p)
    for (int i = 0; i < cols; ++i) {
      const double angle = p / std::pow(base, 2.0 * (i / 2) / static_cast<double>(cols));
      t.at(p, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return t;
}

double entropy_of(const std::vector<double>& p) {
  double h = 0.0;
  for (double q : p)
    if (q > 0.0) h -= q * std::log(q);
  return h;
}

}  // namespace

double StepRecord::entropy() const { return entropy_of(probs); }

std::vector<std::string> Trajectory::actions() const {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const StepRecord& s : steps) out.push_back(s.action());
  return out;
}

double Trajectory::total_logp_mixed() const {
  double s = 0.0;
  for (const StepRecord& st : steps) s += st.logp_mixed;
  return s;
}

double Trajectory::mean_entropy() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const StepRecord& st : steps) s += st.entropy();
  return s / static_cast<double>(steps.size());
}

std::string Trajectory::key() const {
  if (genotype) return canonical_key(*genotype);
  std::string s;
  for (const StepRecord& st : steps) s += st.action();
  return s;
}

int PolicyParams::state_emb_id(const std::string& state) const {
  auto it = state_emb.find(state);
  if (it == state_emb.end()) throw missing_key_error("no embedding for state '" + state + "'");
  return it->second;
}

int PolicyParams::task_emb_id(const std::string& task) const {
  auto it = task_emb.find(task);
  if (it == task_emb.end()) throw missing_key_error("no embedding for task '" + task + "'");
  return it->second;
}

int PolicyParams::action_emb_id(const std::string& state, const std::string& action) const {
  auto it = action_emb.find(action_key(state, action));
  if (it == action_emb.end())
    throw missing_key_error("no embedding for action '" + action + "' of state '" + state +
                            "'");
  return it->second;
}

int PolicyParams::head_w_id(const std::string& state) const {
  auto it = head_w.find(state);
  if (it == head_w.end()) throw missing_key_error("no head for state '" + state + "'");
  return it->second;
}

int PolicyParams::head_b_id(const std::string& state) const {
  auto it = head_b.find(state);
  if (it == head_b.end()) throw missing_key_error("no head for state '" + state + "'");
  return it->second;
}

PolicyParams PolicyParams::init(const MergedSpace& m, const PolicyConfig& cfg, Rng& rng) {
  cfg.check();
  PolicyParams p;
  p.cfg = cfg;

  p.pos = p.store.add("pos", cfg.pos_sinusoid_init
                                 ? sinusoid_tensor(cfg.max_len, cfg.d_model, cfg.pos_sinusoid_base)
                                 : uniform_tensor(cfg.max_len, cfg.d_model, cfg.pos_init, rng));
  for (int l = 0; l < cfg.n_layers; ++l) {
    const std::string pre = "enc" + std::to_string(l) + "/";
    LayerIds ids;
    ids.wq = p.store.add(pre + "wq", glorot_tensor(cfg.d_model, cfg.d_model, rng));
    ids.wk = p.store.add(pre + "wk", glorot_tensor(cfg.d_model, cfg.d_model, rng));
    const double qk_scale = l == 0 ? cfg.qk_init_scale : cfg.qk_init_scale_deep;
    if (qk_scale != 1.0) {
      for (double& v : p.store.values[ids.wq].data) v *= qk_scale;
      for (double& v : p.store.values[ids.wk].data) v *= qk_scale;
    }
    ids.wv = p.store.add(pre + "wv", glorot_tensor(cfg.d_model, cfg.d_model, rng));
    ids.wo = p.store.add(pre + "wo", glorot_tensor(cfg.d_model, cfg.d_model, rng));
    if (cfg.wo_init_zero)
      for (double& v : p.store.values[ids.wo].data) v = 0.0;
    ids.ff_w1 = p.store.add(pre + "ff_w1", glorot_tensor(cfg.d_model, cfg.ff_dim, rng));
    ids.ff_b1 = p.store.add(pre + "ff_b1", Tensor(1, cfg.ff_dim, 0.0));
    ids.ff_w2 = p.store.add(pre + "ff_w2", glorot_tensor(cfg.ff_dim, cfg.d_model, rng));
    ids.ff_b2 = p.store.add(pre + "ff_b2", Tensor(1, cfg.d_model, 0.0));
    ids.ln1_g = p.store.add(pre + "ln1_g", Tensor(1, cfg.d_model, 1.0));
    ids.ln1_b = p.store.add(pre + "ln1_b", Tensor(1, cfg.d_model, 0.0));
    ids.ln2_g = p.store.add(pre + "ln2_g", Tensor(1, cfg.d_model, 1.0));
    ids.ln2_b = p.store.add(pre + "ln2_b", Tensor(1, cfg.d_model, 0.0));
    p.layers.push_back(ids);
  }

  for (const std::string& task : m.task_ids())
    p.task_emb[task] =
        p.store.add("emb/task/" + task, uniform_tensor(1, cfg.emb_dim, cfg.emb_init, rng));

  for (const std::string& st : m.ordered_states()) {
    p.state_emb[st] =
        p.store.add("emb/state/" + st, uniform_tensor(1, cfg.emb_dim, cfg.emb_init, rng));
    const std::vector<std::string> actions =
        st == kStartState ? m.space_ids() : m.state(st).actions;
    for (const std::string& a : actions)
      p.action_emb[action_key(st, a)] = p.store.add(
          "emb/action/" + st + "/" + a, uniform_tensor(1, cfg.emb_dim, cfg.emb_init, rng));
    p.head_w[st] = p.store.add("head/" + st + "/w", glorot_tensor(cfg.d_model, 1, rng));
    p.head_b[st] = p.store.add("head/" + st + "/b", Tensor(1, 1, 0.0));
  }
  return p;
}

void PolicyParams::reindex() {
  pos = store.find("pos");
  layers.clear();
  for (int l = 0;; ++l) {
    const std::string pre = "enc" + std::to_string(l) + "/";
    if (!store.contains(pre + "wq")) break;
    LayerIds ids;
    ids.wq = store.find(pre + "wq");
    ids.wk = store.find(pre + "wk");
    ids.wv = store.find(pre + "wv");
    ids.wo = store.find(pre + "wo");
    ids.ff_w1 = store.find(pre + "ff_w1");
    ids.ff_b1 = store.find(pre + "ff_b1");
    ids.ff_w2 = store.find(pre + "ff_w2");
    ids.ff_b2 = store.find(pre + "ff_b2");
    ids.ln1_g = store.find(pre + "ln1_g");
    ids.ln1_b = store.find(pre + "ln1_b");
    ids.ln2_g = store.find(pre + "ln2_g");
    ids.ln2_b = store.find(pre + "ln2_b");
    layers.push_back(ids);
  }
  state_emb.clear();
  task_emb.clear();
  action_emb.clear();
  head_w.clear();
  head_b.clear();
  for (int i = 0; i < store.size(); ++i) {
    const std::string& n = store.names[i];
    if (n.rfind("emb/state/", 0) == 0) {
      state_emb[n.substr(10)] = i;
    } else if (n.rfind("emb/task/", 0) == 0) {
      task_emb[n.substr(9)] = i;
    } else if (n.rfind("emb/action/", 0) == 0) {
      const std::string rest = n.substr(11);
      const size_t slash = rest.rfind('/');
      action_emb[action_key(rest.substr(0, slash), rest.substr(slash + 1))] = i;
    } else if (n.rfind("head/", 0) == 0 && n.size() > 7) {
      const std::string rest = n.substr(5);
      const size_t slash = rest.rfind('/');
      if (rest.substr(slash + 1) == "w") head_w[rest.substr(0, slash)] = i;
      if (rest.substr(slash + 1) == "b") head_b[rest.substr(0, slash)] = i;
    }
  }
}

PolicyForward::PolicyForward(Graph& g, const PolicyParams& p, const MergedSpace& m,
                             const PairKey& pair, bool record_attention)
    : g_(g), p_(p), m_(m), pair_(pair), record_attention_(record_attention) {
  task_node_ = g_.leaf(p_.task_emb_id(pair.task));
}

int PolicyForward::step_input(const std::string& state, const std::string& action,
                              int position) {
  if (position >= p_.cfg.max_len)
    throw contract_error("trajectory longer than positional table (max_len " +
                         std::to_string(p_.cfg.max_len) + ")");
  const int parts[] = {g_.leaf(p_.action_emb_id(state, action)), task_node_,
                       g_.leaf(p_.state_emb_id(state))};
  const int x = g_.scale(g_.concat(parts, 1), p_.cfg.input_scale());
  return g_.add(x, g_.gather(g_.leaf(p_.pos), position));
}

int PolicyForward::encoder(int x, std::vector<Tensor>* attn_out) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(p_.cfg.d_model));
  for (const PolicyParams::LayerIds& l : p_.layers) {
    const int q = g_.matmul(x, g_.leaf(l.wq));
    const int k = g_.matmul(x, g_.leaf(l.wk));
    const int v = g_.matmul(x, g_.leaf(l.wv));
    const int scores = g_.scale(g_.matmul(q, g_.transpose(k)), inv_sqrt_d);
    const int attn = g_.softmax(scores);
    if (attn_out) attn_out->push_back(g_.val(attn));
    const int ctx = g_.matmul(g_.matmul(attn, v), g_.leaf(l.wo));
    const int x1 = g_.layer_norm(g_.add(x, ctx), g_.leaf(l.ln1_g), g_.leaf(l.ln1_b));
    const int h = g_.relu(g_.add(g_.matmul(x1, g_.leaf(l.ff_w1)), g_.leaf(l.ff_b1)));
    const int f = g_.add(g_.matmul(h, g_.leaf(l.ff_w2)), g_.leaf(l.ff_b2));
    x = g_.layer_norm(g_.add(x1, f), g_.leaf(l.ln2_g), g_.leaf(l.ln2_b));
  }
  return x;
}

void PolicyForward::push_start() {
  const int row = step_input(kStartState, pair_.space, n_inputs_);
  past_matrix_ = past_matrix_ < 0 ? row : g_.concat(std::array{past_matrix_, row}, 0);
  ++n_inputs_;
}

PolicyForward::StepOut PolicyForward::next_distribution(
    const std::string& state, const std::vector<std::string>& candidates) {
  if (candidates.empty()) throw contract_error("next_distribution: no candidates");
  StepOut out;
  out.input_nodes.reserve(candidates.size());
  std::vector<int> logit_nodes;
  logit_nodes.reserve(candidates.size());
  const int hw = g_.leaf(p_.head_w_id(state));
  const int hb = g_.leaf(p_.head_b_id(state));
  for (const std::string& cand : candidates) {
    const int row = step_input(state, cand, n_inputs_);
    out.input_nodes.push_back(row);
    const int x = past_matrix_ < 0 ? row : g_.concat(std::array{past_matrix_, row}, 0);
    std::vector<Tensor> attn;
    const int y = encoder(x, record_attention_ ? &attn : nullptr);
    if (record_attention_) out.attention.push_back(std::move(attn));
    const int last = g_.gather(y, g_.val(y).rows() - 1);
    logit_nodes.push_back(g_.add(g_.matmul(last, hw), hb));
  }
  out.logits_node = logit_nodes.size() == 1 ? logit_nodes[0] : g_.concat(logit_nodes, 1);
  out.probs_node = g_.softmax(out.logits_node);
  out.dist.actions = candidates;
  out.dist.logits = g_.val(out.logits_node).data;
  out.dist.probs = g_.val(out.probs_node).data;
  return out;
}

void PolicyForward::push_chosen(const StepOut& step, int candidate_index) {
  const int row = step.input_nodes.at(candidate_index);
  past_matrix_ = past_matrix_ < 0 ? row : g_.concat(std::array{past_matrix_, row}, 0);
  ++n_inputs_;
}

StepDistribution mix_with_uniform(const StepDistribution& d, double gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw contract_error("mix_with_uniform: gamma must be in [0,1]");
  StepDistribution out;
  out.actions = d.actions;
  const double k = static_cast<double>(d.probs.size());
  out.probs.reserve(d.probs.size());
  out.logits.reserve(d.probs.size());
  for (double p : d.probs) {
    const double q = (1.0 - gamma) * p + gamma / k;
    out.probs.push_back(q);
    out.logits.push_back(std::log(std::max(q, 1e-300)));
  }
  return out;
}

EncodeResult encode_step(Graph& g, const PolicyParams& p, const MergedSpace& m,
                         const PairKey& pair, const std::vector<std::string>& history,
                         bool record_attention) {
  const MergedSpace::Position pos = m.available_actions(pair, history);
  if (pos.state == kTerminalState)
    throw contract_error("encode_step: history is already terminal");
  g.reset();
  PolicyForward fwd(g, p, m, pair, record_attention);
  if (!history.empty()) {
    fwd.push_start();
    const std::vector<std::string>& chain = m.chain_for(pair);
    for (size_t i = 1; i < history.size(); ++i) {
      auto so = fwd.next_distribution(chain[i - 1], m.actions_at(pair, chain[i - 1]));
      int idx = -1;
      for (size_t c = 0; c < so.dist.actions.size(); ++c)
        if (so.dist.actions[c] == history[i]) idx = static_cast<int>(c);
      fwd.push_chosen(so, idx);
    }
  }
  auto so = fwd.next_distribution(pos.state, pos.actions);
  EncodeResult res;
  res.state = pos.state;
  res.dist = std::move(so.dist);
  res.attention = std::move(so.attention);
  return res;
}

Trajectory sample_trajectory(Graph& g, const PolicyParams& p, const MergedSpace& m,
                             const PairKey& pair, const SampleOptions& opt, Rng& rng) {
  g.reset();
  PolicyForward fwd(g, p, m, pair, opt.record_attention);
  fwd.push_start();
  Trajectory traj;
  traj.pair = pair;
  const std::vector<std::string>& chain = m.chain_for(pair);
  traj.steps.reserve(chain.size());
  for (const std::string& state : chain) {
    auto so = fwd.next_distribution(state, m.actions_at(pair, state));
    StepDistribution mixed = mix_with_uniform(so.dist, opt.gamma);
    const int idx = rng.categorical(mixed.probs);
    StepRecord rec;
    rec.state = state;
    rec.candidates = so.dist.actions;
    rec.probs = so.dist.probs;
    rec.probs_mixed = mixed.probs;
    rec.chosen = idx;
    rec.logp_mixed = mixed.logits[idx];
    if (opt.record_attention) rec.attention = std::move(so.attention[idx]);
    traj.steps.push_back(std::move(rec));
    fwd.push_chosen(so, idx);
  }
  if (m.nas_naming()) traj.genotype = decode(m, pair, traj.actions());
  return traj;
}

Trajectory sample_valid_genotype(Graph& g, const PolicyParams& p, const MergedSpace& m,
                                 const PairKey& pair, const SampleOptions& opt, Rng& rng,
                                 long long max_rejects, long long* rejects_out) {
  if (max_rejects < 1) throw contract_error("sample_valid_genotype: max_rejects must be >= 1");
  long long rejects = 0;
  for (;;) {
    Trajectory t = sample_trajectory(g, p, m, pair, opt, rng);
    if (!t.genotype || validate(*t.genotype)) {
      if (rejects_out) *rejects_out = rejects;
      return t;
    }
    if (++rejects >= max_rejects)
      throw exhaustion_error("sample_valid_genotype: no valid genotype", rejects);
  }
}

LossNodes build_trajectory_loss(Graph& g, const PolicyParams& p, const MergedSpace& m,
                                const PairKey& pair, const LossSpec& spec) {
  LossNodes nodes;

  auto forced_pass = [&](const std::vector<std::string>& actions, bool want_entropy,
                         int& logp_sum, int& ent_sum) {
    PolicyForward fwd(g, p, m, pair, false);
    fwd.push_start();
    const std::vector<std::string>& chain = m.chain_for(pair);
    if (actions.size() != chain.size())
      throw contract_error("trajectory loss: " + std::to_string(actions.size()) +
                           " actions for chain of " + std::to_string(chain.size()));
    logp_sum = -1;
    ent_sum = -1;
    for (size_t i = 0; i < chain.size(); ++i) {
      auto so = fwd.next_distribution(chain[i], m.actions_at(pair, chain[i]));
      const int k = static_cast<int>(so.dist.actions.size());
      int idx = -1;
      for (int c = 0; c < k; ++c)
        if (so.dist.actions[c] == actions[i]) idx = c;
      if (idx < 0)
        throw contract_error("trajectory loss: action '" + actions[i] +
                             "' not available at state '" + chain[i] + "'");
      const int logp_row = g.log(so.probs_node);
      const int lp = g.gather(g.reshape(logp_row, k, 1), idx);
      logp_sum = logp_sum < 0 ? lp : g.add(logp_sum, lp);
      if (want_entropy) {
        const int plogp = g.reduce_sum(g.mul(so.probs_node, logp_row));
        ent_sum = ent_sum < 0 ? plogp : g.add(ent_sum, plogp);
      }
      fwd.push_chosen(so, idx);
    }
  };

  int ent_sum = -1;
  forced_pass(spec.actions, true, nodes.logp_sum, ent_sum);
  const double m_steps = static_cast<double>(spec.actions.size());
  nodes.entropy_mean = g.scale(ent_sum, -1.0 / m_steps);
  nodes.j_term = g.scale(nodes.logp_sum, spec.advantage);

  int objective = g.add(nodes.j_term, g.scale(nodes.entropy_mean, spec.lambda_ent));
  if (!spec.replay.empty()) {
    int unused = -1;
    forced_pass(spec.replay, false, nodes.pqt_logp_sum, unused);
    objective = g.add(objective, g.scale(nodes.pqt_logp_sum, spec.lambda_pqt));
  }
  nodes.loss = g.scale(objective, -1.0);
  return nodes;
}

double trajectory_loss_value(const PolicyParams& p, const ParamStore& store,
                             const MergedSpace& m, const PairKey& pair,
                             const LossSpec& spec) {
  // `store` must share p.store's layout; ids in p stay valid and the graph
  // reads values from the store it is bound to.
  Graph g(&store);
  const LossNodes nodes = build_trajectory_loss(g, p, m, pair, spec);
  return g.val(nodes.loss).data[0];
}

void write_matrix(const Tensor& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  char buf[64];
  for (int r = 0; r < t.rows(); ++r) {
    for (int c = 0; c < t.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", t.at(r, c));
      out << (c ? " " : "") << buf;
    }
    out << "\n";
  }
}

}  // namespace mergenas
