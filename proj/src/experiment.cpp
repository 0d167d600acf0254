#include "mergenas/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "mergenas/dsl.hpp"
#include "mergenas/nas_tasks.hpp"
#include "mergenas/random_search.hpp"
#include "mergenas/tabular.hpp"

namespace mergenas {

namespace {

namespace fs = std::filesystem;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const CellFamilyIds kCellIds{};

struct NasSetup {
  SpaceDocument doc;
  MergedSpace full;       // merged full space, pair (nb_full, cifar)
  MergedSpace joint;      // merged subspaces, two pairs
  std::unique_ptr<Oracle> oracle;
};

NasSetup make_nas_setup(const ExperimentConfig& cfg) {
  NasSetup s;
  s.doc = parse_space_document(cell_family_dsl(cfg.num_vertices, kCellIds));
  std::vector<SearchSpaceDef> full_only, subs;
  for (const SearchSpaceDef& ss : s.doc.spaces)
    (ss.id == kCellIds.full ? full_only : subs).push_back(ss);
  PairSet full_pairs, sub_pairs;
  for (const PairKey& p : s.doc.pairs.pairs)
    (p.space == kCellIds.full ? full_pairs : sub_pairs).pairs.push_back(p);
  s.full = merge(full_only, s.doc.states, full_pairs);
  s.joint = merge(subs, s.doc.states, sub_pairs);
  if (!cfg.tabular_path.empty()) {
    s.oracle = std::make_unique<TabularOracle>(
        TabularOracle::load(cfg.tabular_path, cfg.num_vertices));
  } else {
    s.oracle = std::make_unique<SurrogateOracle>(
        SurrogateParams::make(cfg.surrogate_seed, cfg.num_vertices),
        SpaceRestriction::full(cfg.num_vertices));
  }
  return s;
}

// Derived seeds: one run consumes independent streams for initialization and
// training, per phase.
uint64_t stream_seed(uint64_t replica_seed, int stream) {
  return mix64(replica_seed * 4 + static_cast<uint64_t>(stream));
}

void run_replicas(int replicas, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, replicas));
  if (threads == 1) {
    for (int i = 0; i < replicas; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= replicas) return;
        body(i);
      }
    });
  for (auto& th : pool) th.join();
}

std::vector<std::vector<double>> ma_series(const RunOutput& out, int window) {
  std::vector<std::vector<double>> res;
  for (const auto& rep : out.replicas) {
    std::vector<double> rewards;
    rewards.reserve(rep.records.size());
    for (const TrialRecord& r : rep.records) rewards.push_back(r.reward);
    res.push_back(moving_average(rewards, window));
  }
  return res;
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kinds = {"xor", "nasbench-scratch",
                                                 "nasbench-transfer", "random", "re"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw contract_error("config: unknown experiment kind '" + kind + "'");
  if (replicas < 1) throw contract_error("config: need at least one replica");
  if (budget < 0 || (budget == 0 && kind != "nasbench-transfer"))
    throw contract_error("config: budget must be >= 1");
  if (kind == "nasbench-transfer" && joint_budget < 1)
    throw contract_error("config: joint_budget must be >= 1");
  if (ma_window < 1) throw contract_error("config: ma_window must be >= 1");
  if (threshold_frac <= 0.0 || threshold_frac > 1.0)
    throw contract_error("config: threshold_frac must be in (0,1]");
  if (num_vertices < 3) throw contract_error("config: num_vertices must be >= 3");
  if (out_dir.empty()) throw contract_error("config: out directory required");
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  try {
    if (key == "experiment") kind = value;
    else if (key == "seed_base") seed_base = std::stoull(value);
    else if (key == "replicas") replicas = std::stoi(value);
    else if (key == "budget") budget = std::stoll(value);
    else if (key == "joint_budget") joint_budget = std::stoll(value);
    else if (key == "surrogate_seed") surrogate_seed = std::stoull(value);
    else if (key == "tabular") tabular_path = value;
    else if (key == "out") out_dir = value;
    else if (key == "ma_window") ma_window = std::stoi(value);
    else if (key == "threshold_frac") threshold_frac = std::stod(value);
    else if (key == "checkpoint_in") checkpoint_in = value;
    else if (key == "checkpoint_out") checkpoint_out = value;
    else if (key == "num_vertices") num_vertices = std::stoi(value);
    else if (key == "max_rejects") max_rejects = std::stoll(value);
    else if (key == "threads") threads = std::stoi(value);
    else throw contract_error("config: unknown key '" + key + "'");
  } catch (const contract_error&) {
    throw;
  } catch (const std::exception&) {
    throw contract_error("config: bad value '" + value + "' for key '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config '" + path + "'");
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    size_t b = line.find_last_not_of(" \t\r");
    line = line.substr(a, b - a + 1);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw parse_error("expected key=value", line_no, 1);
    auto trim = [](std::string s) {
      const size_t x = s.find_first_not_of(" \t");
      const size_t y = s.find_last_not_of(" \t");
      return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
    };
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::vector<std::vector<double>> RunOutput::reward_series() const {
  std::vector<std::vector<double>> out;
  for (const auto& rep : replicas) {
    std::vector<double> r;
    r.reserve(rep.records.size());
    for (const TrialRecord& t : rep.records) r.push_back(t.reward);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<double>> RunOutput::valid_bsf_series() const {
  std::vector<std::vector<double>> out;
  for (auto& series : reward_series()) out.push_back(best_so_far(series));
  return out;
}

Tensor trajectory_attention_rows(const Trajectory& traj, int layer) {
  const int m = static_cast<int>(traj.steps.size());
  Tensor rows(m, m + 1, 0.0);
  for (int s = 0; s < m; ++s) {
    const StepRecord& rec = traj.steps[s];
    if (layer >= static_cast<int>(rec.attention.size()))
      throw contract_error("trajectory has no recorded attention for layer " +
                           std::to_string(layer));
    const Tensor& map = rec.attention[layer];  // [s+2, s+2]: start + s chosen + candidate
    const int last = map.rows() - 1;
    for (int kcol = 0; kcol < map.cols(); ++kcol) rows.at(s, kcol) = map.at(last, kcol);
  }
  return rows;
}

Tensor mean_attention(const std::vector<Trajectory>& trajectories, int layer) {
  if (trajectories.empty()) throw contract_error("mean_attention: no trajectories recorded");
  Tensor acc = trajectory_attention_rows(trajectories[0], layer);
  for (size_t i = 1; i < trajectories.size(); ++i) {
    const Tensor rows = trajectory_attention_rows(trajectories[i], layer);
    if (!rows.same_shape(acc)) throw contract_error("mean_attention: mixed chain lengths");
    for (size_t k = 0; k < acc.data.size(); ++k) acc.data[k] += rows.data[k];
  }
  for (double& v : acc.data) v /= static_cast<double>(trajectories.size());
  return acc;
}

std::vector<int> attention_argmax(const Tensor& rows) {
  std::vector<int> out(rows.rows());
  for (int r = 0; r < rows.rows(); ++r) {
    int arg = 0;
    for (int c = 1; c < rows.cols(); ++c)
      if (rows.at(r, c) > rows.at(r, arg)) arg = c;
    out[r] = arg;
  }
  return out;
}

void write_trial_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "trial,pair,genotype,reward,baseline,entropy,gamma\n";
  for (const TrialRecord& r : records) {
    out << r.trial << ',' << r.pair.str() << ',' << r.genotype_key << ',' << g17(r.reward)
        << ',' << g17(r.baseline) << ',' << g17(r.entropy) << ',' << g17(r.gamma) << '\n';
  }
}

std::vector<TrialRecord> read_trial_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::vector<TrialRecord> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    TrialRecord r;
    std::getline(row, field, ',');
    r.trial = std::stoll(field);
    std::getline(row, field, ',');
    const size_t colon = field.find(':');
    r.pair = {field.substr(0, colon), field.substr(colon + 1)};
    std::getline(row, r.genotype_key, ',');
    std::getline(row, field, ',');
    r.reward = std::stod(field);
    std::getline(row, field, ',');
    r.baseline = std::stod(field);
    std::getline(row, field, ',');
    r.entropy = std::stod(field);
    std::getline(row, field, ',');
    r.gamma = std::stod(field);
    out.push_back(std::move(r));
  }
  return out;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "trial,mean,ci68\n";
  for (const CurvePoint& p : curve)
    out << p.trial << ',' << g17(p.mean) << ',' << g17(p.ci68) << '\n';
}

namespace {

// Shared per-replica agent run: fresh or checkpoint-seeded parameters, then
// a joint training loop over the given pairs.
ReplicaOutput agent_replica(const MergedSpace& space, const std::vector<PairKey>& pairs,
                            const Oracle& oracle, const TrainConfig& tcfg, uint64_t seed,
                            long long budget, const LoadedCheckpoint* warm_start,
                            const std::string& ckpt_out) {
  ReplicaOutput rep;
  rep.seed = seed;
  Rng init_rng(stream_seed(seed, 0));
  PolicyConfig pcfg;
  PolicyParams params = warm_start
                            ? load_with_remap(*warm_start, space, pcfg, init_rng, &rep.remap)
                            : PolicyParams::init(space, pcfg, init_rng);
  TrainState state(params.store, tcfg, stream_seed(seed, 1));
  std::map<PairKey, const Oracle*> oracle_map;
  for (const PairKey& p : pairs) oracle_map[p] = &oracle;
  TrainResult res = train_joint(params, space, pairs, oracle_map, tcfg, state, budget);
  rep.records = std::move(res.records);
  rep.attention_tail = std::move(res.attention_tail);
  if (!ckpt_out.empty()) save_checkpoint(params, &state.adam, ckpt_out);
  return rep;
}

void write_attention_outputs(const ReplicaOutput& rep, const PolicyConfig& pcfg,
                             const std::string& dir) {
  if (rep.attention_tail.empty()) return;
  for (int layer = 0; layer < pcfg.n_layers; ++layer) {
    write_matrix(mean_attention(rep.attention_tail, layer),
                 dir + "/attention_mean_layer" + std::to_string(layer) + "_r" +
                     std::to_string(rep.seed) + ".txt");
    write_matrix(trajectory_attention_rows(rep.attention_tail.back(), layer),
                 dir + "/attention_last_layer" + std::to_string(layer) + "_r" +
                     std::to_string(rep.seed) + ".txt");
  }
  const Tensor mean0 = mean_attention(rep.attention_tail, 0);
  const std::vector<int> arg = attention_argmax(mean0);
  std::ofstream out(dir + "/attention_argmax_r" + std::to_string(rep.seed) + ".txt");
  out << "query_position,argmax_key_position\n";
  for (size_t q = 0; q < arg.size(); ++q) out << (q + 1) << ',' << arg[q] << '\n';
}

void write_summary(const RunOutput& out, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f << "experiment=" << out.cfg.kind << "\n";
  f << "replicas=" << out.cfg.replicas << "\n";
  f << "budget=" << out.cfg.budget << "\n";
  if (out.cfg.kind == "nasbench-transfer") f << "joint_budget=" << out.cfg.joint_budget << "\n";

  if (out.replicas.empty() || out.replicas[0].records.empty()) return;
  const auto bsf = out.valid_bsf_series();
  std::vector<double> finals;
  for (const auto& series : bsf) finals.push_back(series.back());
  f << "final_best_valid_mean=" << g17(mean_of(finals)) << "\n";
  f << "final_best_valid_stderr=" << g17(stderr_of(finals)) << "\n";

  if (out.best_valid_known >= 0.0) {
    const double threshold = out.cfg.threshold_frac * out.best_valid_known;
    const ThresholdResult t2t = trials_to_threshold(bsf, threshold);
    f << "best_valid_known=" << g17(out.best_valid_known) << "\n";
    f << "best_test_known=" << g17(out.best_test_known) << "\n";
    f << "threshold=" << g17(threshold) << "\n";
    f << "trials_to_threshold_median=" << g17(t2t.median) << "\n";
    f << "trials_to_threshold=";
    for (size_t i = 0; i < t2t.per_replica.size(); ++i)
      f << (i ? ";" : "") << t2t.per_replica[i] << (t2t.censored[i] ? "c" : "");
    f << "\n";
  }
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);

  RunOutput out;
  out.cfg = cfg;
  TrainConfig tcfg;
  tcfg.max_rejects = cfg.max_rejects;
  PolicyConfig pcfg;

  const bool is_agent_nas = cfg.kind == "nasbench-scratch" || cfg.kind == "nasbench-transfer";
  const bool is_baseline = cfg.kind == "random" || cfg.kind == "re";

  if (cfg.kind == "xor") {
    const SpaceDocument doc = parse_space_document(xor_space_dsl());
    const MergedSpace space = merge_document(doc);
    const XorOracle oracle;
    tcfg.record_attention = true;
    std::optional<LoadedCheckpoint> warm;
    if (!cfg.checkpoint_in.empty()) warm = load_checkpoint(cfg.checkpoint_in);
    out.replicas.resize(cfg.replicas);
    run_replicas(cfg.replicas, cfg.threads, [&](int i) {
      const uint64_t seed = cfg.seed_base + static_cast<uint64_t>(i);
      const std::string ckpt =
          cfg.checkpoint_out.empty()
              ? std::string()
              : cfg.checkpoint_out + ".r" + std::to_string(seed);
      out.replicas[i] = agent_replica(space, doc.pairs.pairs, oracle, tcfg, seed, cfg.budget,
                                      warm ? &*warm : nullptr, ckpt);
      write_trial_csv(out.replicas[i].records,
                      cfg.out_dir + "/replica_" + std::to_string(seed) + ".csv");
      write_attention_outputs(out.replicas[i], pcfg, cfg.out_dir);
    });
    out.best_valid_known = 1.0;
    out.best_test_known = 1.0;
    write_curve_csv(aggregate_curves(ma_series(out, cfg.ma_window)),
                    cfg.out_dir + "/curve_ma_reward.csv");
  } else if (is_agent_nas || is_baseline) {
    const NasSetup setup = make_nas_setup(cfg);
    if (auto bv = setup.oracle->best_valid()) out.best_valid_known = *bv;
    if (auto bt = setup.oracle->best_test()) out.best_test_known = *bt;
    out.replicas.resize(cfg.replicas);
    if (cfg.kind == "nasbench-transfer") out.joint_replicas.resize(cfg.replicas);
    const PairKey full_pair = setup.full.pairs().pairs[0];

    run_replicas(cfg.replicas, cfg.threads, [&](int i) {
      const uint64_t seed = cfg.seed_base + static_cast<uint64_t>(i);
      ReplicaOutput& rep = out.replicas[i];
      if (cfg.kind == "random") {
        rep.seed = seed;
        Rng rng(stream_seed(seed, 1));
        rep.records = run_random_search(cfg.num_vertices, *setup.oracle, full_pair,
                                        cfg.budget, rng);
      } else if (cfg.kind == "re") {
        rep.seed = seed;
        Rng rng(stream_seed(seed, 1));
        rep.records = run_regularized_evolution(cfg.num_vertices, *setup.oracle, full_pair,
                                                cfg.budget, EvolutionConfig{}, rng);
      } else if (cfg.kind == "nasbench-scratch") {
        std::optional<LoadedCheckpoint> warm;
        if (!cfg.checkpoint_in.empty()) warm = load_checkpoint(cfg.checkpoint_in);
        const std::string ckpt =
            cfg.checkpoint_out.empty()
                ? std::string()
                : cfg.checkpoint_out + ".r" + std::to_string(seed);
        rep = agent_replica(setup.full, {full_pair}, *setup.oracle, tcfg, seed, cfg.budget,
                            warm ? &*warm : nullptr, ckpt);
      } else {  // nasbench-transfer
        LoadedCheckpoint stage;
        if (cfg.checkpoint_in.empty()) {
          ReplicaOutput& joint = out.joint_replicas[i];
          const std::string joint_ckpt = cfg.out_dir + "/ckpt_joint_r" +
                                         std::to_string(seed) + ".mnck";
          joint = agent_replica(setup.joint, setup.joint.pairs().pairs, *setup.oracle, tcfg,
                                seed, cfg.joint_budget, nullptr, joint_ckpt);
          write_trial_csv(joint.records,
                          cfg.out_dir + "/joint_replica_" + std::to_string(seed) + ".csv");
          stage = load_checkpoint(joint_ckpt);
        } else {
          stage = load_checkpoint(cfg.checkpoint_in);
        }
        if (cfg.budget > 0) {
          const uint64_t full_seed = mix64(seed + 0x7f4a7c15);
          const std::string ckpt =
              cfg.checkpoint_out.empty()
                  ? std::string()
                  : cfg.checkpoint_out + ".r" + std::to_string(seed);
          rep = agent_replica(setup.full, {full_pair}, *setup.oracle, tcfg, full_seed,
                              cfg.budget, &stage, ckpt);
          rep.seed = seed;  // replica identity stays the base seed
        } else {
          rep.seed = seed;
        }
      }
      if (!rep.records.empty())
        write_trial_csv(rep.records,
                        cfg.out_dir + "/replica_" + std::to_string(seed) + ".csv");
    });

    if (!out.replicas[0].records.empty()) {
      write_curve_csv(aggregate_curves(out.valid_bsf_series()),
                      cfg.out_dir + "/curve_best_valid.csv");
      if (out.best_test_known >= 0.0) {
        std::vector<std::vector<double>> regrets;
        for (const auto& rep : out.replicas) {
          std::vector<double> valid, test;
          for (const TrialRecord& r : rep.records) {
            valid.push_back(r.reward);
            const Genotype g = parse_canonical_key(r.genotype_key, cfg.num_vertices);
            test.push_back(setup.oracle->evaluate_genotype(g).test_acc);
          }
          regrets.push_back(regret_series(valid, test, out.best_test_known));
        }
        write_curve_csv(aggregate_curves(regrets), cfg.out_dir + "/curve_regret.csv");
      }
    }
  }

  write_summary(out, cfg.out_dir + "/summary.txt");
  return out;
}

}  // namespace mergenas
