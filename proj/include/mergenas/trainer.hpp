#pragma once

#include <functional>
#include <map>
#include <optional>

#include "mergenas/adam.hpp"
#include "mergenas/gamma.hpp"
#include "mergenas/oracles.hpp"
#include "mergenas/policy.hpp"

namespace mergenas {

struct TrainConfig {
  double lambda_pqt = 5.0;
  double lambda_ent = 0.15;
  int top_k = 25;
  double ema_alpha = 0.9;  // baseline' = alpha*baseline + (1-alpha)*reward
  double lr = 5e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  GammaSchedule gamma_schedule{};
  long long max_rejects = 1000000;
  bool record_attention = false;
  int attention_window = 100;  // trajectories kept for attention summaries
};

// Per-pair exponential moving average of rewards. The first observation
// initializes the average; reading an uninitialized entry yields nullopt.
class BaselineTable {
 public:
  std::optional<double> get(const PairKey& pair) const {
    auto it = values_.find(pair);
    return it == values_.end() ? std::nullopt : std::optional<double>(it->second);
  }
  void update(const PairKey& pair, double reward, double alpha) {
    auto it = values_.find(pair);
    if (it == values_.end())
      values_.emplace(pair, reward);
    else
      it->second = alpha * it->second + (1.0 - alpha) * reward;
  }

 private:
  std::map<PairKey, double> values_;
};

// Top-K distinct action sequences by reward for one pair. Insertion keeps the
// invariant: contents always equal the top K of all distinct sequences seen,
// ordered by (reward desc, first-seen asc) — a new sequence only displaces a
// strictly worse one, and ties keep the earlier arrival.
class TopKQueue {
 public:
  struct Entry {
    std::vector<std::string> actions;
    double reward;
    long long seen_order;
  };

  explicit TopKQueue(int k = 25) : k_(k) {
    if (k < 1) throw contract_error("TopKQueue: K must be >= 1");
  }

  void insert(const std::vector<std::string>& actions, double reward);
  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  int size() const { return static_cast<int>(entries_.size()); }
  double min_reward() const;
  const Entry& sample_uniform(Rng& rng) const;

 private:
  int k_;
  long long next_order_ = 0;
  std::vector<Entry> entries_;  // sorted by (reward desc, seen_order asc)
};

struct TrainState {
  BaselineTable baselines;
  std::map<PairKey, TopKQueue> queues;
  AdamState adam;
  long long trials = 0;  // accepted (evaluated) trajectories
  std::map<PairKey, long long> trials_per_pair;
  Rng rng;

  TrainState(const ParamStore& store, const TrainConfig& cfg, uint64_t seed)
      : adam(AdamState::init(store, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)),
        rng(seed) {}

  TopKQueue& queue_for(const PairKey& pair, int k) {
    auto it = queues.find(pair);
    if (it == queues.end()) it = queues.emplace(pair, TopKQueue(k)).first;
    return it->second;
  }
};

// Gradient views of the three training signals. Each builds its own graph.
GradMap reinforce_grad(const PolicyParams& p, const MergedSpace& m, const Trajectory& traj,
                       double baseline);
GradMap pqt_grad(const PolicyParams& p, const MergedSpace& m, const PairKey& pair,
                 const TopKQueue& queue, Rng& rng);
GradMap entropy_grad(const PolicyParams& p, const MergedSpace& m, const Trajectory& traj);

// One ascent step on (R-b)*grad(log pi) + lambda_pqt*grad(replay log-lik)
// + lambda_ent*grad(mean entropy), then baseline and queue updates.
// The baseline is read before it absorbs this trajectory's reward; an
// uninitialized baseline reads as the trajectory's own reward.
void combined_step(PolicyParams& p, const MergedSpace& m, const Trajectory& traj,
                   TrainState& state, const TrainConfig& cfg);

struct TrialRecord {
  long long trial = 0;  // 1-based, global across pairs
  PairKey pair;
  std::string genotype_key;
  double reward = 0.0;
  double baseline = 0.0;  // value after this trial's update
  double entropy = 0.0;   // mean per-step entropy of the sampled trajectory
  double gamma = 0.0;
};

struct TrainResult {
  std::vector<TrialRecord> records;
  std::vector<Trajectory> attention_tail;  // last few trajectories, when recording
};

// Joint loop: pair ~ Uniform(pairs), rejection-sample a valid trajectory,
// evaluate, one combined gradient step. Deterministic given (seed, config).
TrainResult train_joint(PolicyParams& p, const MergedSpace& m,
                        const std::vector<PairKey>& pairs,
                        const std::map<PairKey, const Oracle*>& oracles,
                        const TrainConfig& cfg, TrainState& state, long long budget,
                        const std::function<void(const TrialRecord&)>& sink = nullptr);

}  // namespace mergenas
