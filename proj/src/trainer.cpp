#include "mergenas/trainer.hpp"

#include <algorithm>

namespace mergenas {

void TopKQueue::insert(const std::vector<std::string>& actions, double reward) {
  for (const Entry& e : entries_)
    if (e.actions == actions) return;  // one entry per distinct sequence
  const long long order = next_order_++;
  if (static_cast<int>(entries_.size()) >= k_) {
    if (reward <= entries_.back().reward) return;  // not above the current minimum
    entries_.pop_back();
  }
  Entry e{actions, reward, order};
  auto at = std::upper_bound(entries_.begin(), entries_.end(), e,
                             [](const Entry& a, const Entry& b) {
                               if (a.reward != b.reward) return a.reward > b.reward;
                               return a.seen_order < b.seen_order;
                             });
  entries_.insert(at, std::move(e));
}

double TopKQueue::min_reward() const {
  if (entries_.empty()) throw contract_error("TopKQueue::min_reward: empty queue");
  return entries_.back().reward;
}

const TopKQueue::Entry& TopKQueue::sample_uniform(Rng& rng) const {
  if (entries_.empty()) throw contract_error("TopKQueue::sample_uniform: empty queue");
  return entries_[rng.index(static_cast<int>(entries_.size()))];
}

GradMap reinforce_grad(const PolicyParams& p, const MergedSpace& m, const Trajectory& traj,
                       double baseline) {
  if (!traj.reward) throw contract_error("reinforce_grad: trajectory has no reward");
  LossSpec spec;
  spec.actions = traj.actions();
  spec.advantage = *traj.reward - baseline;
  Graph g(&p.store);
  const LossNodes nodes = build_trajectory_loss(g, p, m, traj.pair, spec);
  GradMap gm(p.store.size());
  g.backward(nodes.j_term, gm);
  return gm;
}

GradMap pqt_grad(const PolicyParams& p, const MergedSpace& m, const PairKey& pair,
                 const TopKQueue& queue, Rng& rng) {
  GradMap gm(p.store.size());
  if (queue.empty()) return gm;  // nothing stored yet: zero gradient
  LossSpec spec;
  spec.actions = queue.sample_uniform(rng).actions;
  spec.advantage = 1.0;
  Graph g(&p.store);
  const LossNodes nodes = build_trajectory_loss(g, p, m, pair, spec);
  g.backward(nodes.logp_sum, gm);
  return gm;
}

GradMap entropy_grad(const PolicyParams& p, const MergedSpace& m, const Trajectory& traj) {
  LossSpec spec;
  spec.actions = traj.actions();
  Graph g(&p.store);
  const LossNodes nodes = build_trajectory_loss(g, p, m, traj.pair, spec);
  GradMap gm(p.store.size());
  g.backward(nodes.entropy_mean, gm);
  return gm;
}

void combined_step(PolicyParams& p, const MergedSpace& m, const Trajectory& traj,
                   TrainState& state, const TrainConfig& cfg) {
  if (!traj.reward) throw contract_error("combined_step: trajectory has no reward");
  const double reward = *traj.reward;
  const double baseline = state.baselines.get(traj.pair).value_or(reward);
  const TopKQueue& queue = state.queue_for(traj.pair, cfg.top_k);

  LossSpec spec;
  spec.actions = traj.actions();
  spec.advantage = reward - baseline;
  spec.lambda_ent = cfg.lambda_ent;
  if (!queue.empty() && cfg.lambda_pqt != 0.0) {
    spec.replay = queue.sample_uniform(state.rng).actions;
    spec.lambda_pqt = cfg.lambda_pqt;
  }

  Graph g(&p.store);
  const LossNodes nodes = build_trajectory_loss(g, p, m, traj.pair, spec);
  GradMap gm(p.store.size());
  g.backward(nodes.loss, gm);
  adam_step(p.store, gm, state.adam);

  state.baselines.update(traj.pair, reward, cfg.ema_alpha);
  state.queue_for(traj.pair, cfg.top_k).insert(spec.actions, reward);
}

TrainResult train_joint(PolicyParams& p, const MergedSpace& m,
                        const std::vector<PairKey>& pairs,
                        const std::map<PairKey, const Oracle*>& oracles,
                        const TrainConfig& cfg, TrainState& state, long long budget,
                        const std::function<void(const TrialRecord&)>& sink) {
  if (pairs.empty()) throw contract_error("train_joint: no pairs");
  for (const PairKey& pk : pairs)
    if (!oracles.count(pk)) throw contract_error("train_joint: no oracle for " + pk.str());

  TrainResult result;
  result.records.reserve(static_cast<size_t>(budget));
  Graph scratch(&p.store);

  for (long long i = 0; i < budget; ++i) {
    const PairKey& pair = pairs[pairs.size() == 1 ? 0 : state.rng.index(
                                                            static_cast<int>(pairs.size()))];
    SampleOptions opt;
    opt.gamma = cfg.gamma_schedule.value(state.trials);
    opt.record_attention = cfg.record_attention;

    Trajectory traj =
        sample_valid_genotype(scratch, p, m, pair, opt, state.rng, cfg.max_rejects);

    const Oracle* oracle = oracles.at(pair);
    EvalResult eval;
    try {
      eval = oracle->evaluate(traj);
    } catch (const std::exception& e) {
      throw contract_error("oracle '" + oracle->name() + "' failed at trial " +
                           std::to_string(state.trials + 1) + ": " + e.what());
    }
    traj.reward = eval.valid_acc;

    combined_step(p, m, traj, state, cfg);

    state.trials += 1;
    state.trials_per_pair[pair] += 1;

    TrialRecord rec;
    rec.trial = state.trials;
    rec.pair = pair;
    rec.genotype_key = traj.key();
    rec.reward = *traj.reward;
    rec.baseline = *state.baselines.get(pair);
    rec.entropy = traj.mean_entropy();
    rec.gamma = opt.gamma;
    if (sink) sink(rec);
    result.records.push_back(rec);

    if (cfg.record_attention) {
      result.attention_tail.push_back(std::move(traj));
      if (static_cast<int>(result.attention_tail.size()) > cfg.attention_window)
        result.attention_tail.erase(result.attention_tail.begin());
    }
  }
  return result;
}

}  // namespace mergenas
