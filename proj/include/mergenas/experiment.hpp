#pragma once

#include <map>
#include <string>
#include <vector>

#include "mergenas/checkpoint.hpp"
#include "mergenas/metrics.hpp"
#include "mergenas/surrogate.hpp"
#include "mergenas/trainer.hpp"

namespace mergenas {

// Experiment kinds: xor | nasbench-scratch | nasbench-transfer | random | re
struct ExperimentConfig {
  std::string kind;
  uint64_t seed_base = 1;
  int replicas = 5;
  long long budget = 3000;        // trials of the main phase
  long long joint_budget = 2000;  // transfer: trials of the joint subspace phase
  uint64_t surrogate_seed = 42;
  std::string tabular_path;  // when set, replaces the synthetic surrogate
  std::string out_dir;
  int ma_window = 100;
  double threshold_frac = 0.99;  // of the best known validation accuracy
  std::string checkpoint_in;
  std::string checkpoint_out;
  int num_vertices = 7;
  long long max_rejects = 1000000;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
  static ExperimentConfig from_file(const std::string& path);
  // `key=value` override, same keys as the config file.
  void set(const std::string& key, const std::string& value);
};

struct ReplicaOutput {
  uint64_t seed = 0;
  std::vector<TrialRecord> records;
  std::vector<Trajectory> attention_tail;
  RemapReport remap;  // transfer full phase only
};

struct RunOutput {
  ExperimentConfig cfg;
  std::vector<ReplicaOutput> replicas;        // main phase
  std::vector<ReplicaOutput> joint_replicas;  // transfer joint phase
  double best_valid_known = -1.0;             // <0 when the oracle has no optimum
  double best_test_known = -1.0;

  std::vector<std::vector<double>> reward_series() const;
  std::vector<std::vector<double>> valid_bsf_series() const;
};

RunOutput run_experiment(const ExperimentConfig& cfg);

// Per-trajectory attention matrix for one encoder layer: one row per decision
// step (the query), columns = key positions 0..M, zero-padded on the right.
Tensor trajectory_attention_rows(const Trajectory& traj, int layer);
// Elementwise mean over trajectories (all must share the chain length).
Tensor mean_attention(const std::vector<Trajectory>& trajectories, int layer);
// Per query row, the argmax key position.
std::vector<int> attention_argmax(const Tensor& rows);

// Trial CSV with the shared schema; header + one row per record.
void write_trial_csv(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_trial_csv(const std::string& path);

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path);

}  // namespace mergenas
