#include <cstdio>
#include <exception>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "mergenas/evolution.hpp"
#include "mergenas/experiment.hpp"
#include "mergenas/surrogate.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
  mergenas::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = mergenas::ExperimentConfig::from_file(config_path);
    for (const std::string& kv : overrides) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw mergenas::contract_error("override '" + kv + "' is not key=value");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const mergenas::RunOutput out = mergenas::run_experiment(cfg);
    std::cout << "wrote " << out.replicas.size() << " replica logs to " << cfg.out_dir
              << "\n";
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_export(uint64_t seed, int vertices, long long samples, const std::string& out_path) {
  try {
    const mergenas::SurrogateParams params = mergenas::SurrogateParams::make(seed, vertices);
    const mergenas::SpaceRestriction full = mergenas::SpaceRestriction::full(vertices);
    std::vector<mergenas::Genotype> genotypes;
    if (samples <= 0) {
      genotypes = mergenas::enumerate_valid_genotypes(vertices, full);
    } else {
      mergenas::Rng rng(seed ^ 0xe9d7u);
      std::set<std::string> seen;
      while (static_cast<long long>(genotypes.size()) < samples) {
        mergenas::Genotype g = mergenas::random_valid_genotype(vertices, rng);
        if (seen.insert(mergenas::canonical_key(g)).second) genotypes.push_back(std::move(g));
      }
    }
    mergenas::export_surrogate_csv(params, genotypes, out_path);
    std::cout << "wrote " << genotypes.size() << " rows to " << out_path << "\n";
  } catch (const std::exception& e) {
    std::cerr << "export failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"policy-gradient architecture search over merged conditional search spaces"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment");
  std::string config_path;
  std::vector<std::string> overrides;
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("--experiment", [&](const std::vector<std::string>& v) {
    overrides.push_back("experiment=" + v[0]);
    return true;
  }, "xor | nasbench-scratch | nasbench-transfer | random | re");
  for (const char* key : {"seed-base", "replicas", "budget", "joint-budget", "out",
                          "checkpoint-in", "checkpoint-out", "surrogate-seed", "tabular",
                          "ma-window", "threshold-frac", "num-vertices", "threads"}) {
    std::string opt = std::string("--") + key;
    std::string cfg_key = key;
    for (char& c : cfg_key)
      if (c == '-') c = '_';
    if (cfg_key == "seed_base") cfg_key = "seed_base";
    run->add_option(opt, [&overrides, cfg_key](const std::vector<std::string>& v) {
      overrides.push_back(cfg_key + "=" + v[0]);
      return true;
    }, "");
  }

  auto* exp = app.add_subcommand("export-surrogate", "dump surrogate rewards as tabular CSV");
  uint64_t seed = 42;
  int vertices = 4;
  long long samples = 0;
  std::string out_path;
  exp->add_option("--surrogate-seed", seed, "table seed");
  exp->add_option("--vertices", vertices, "cell size (enumeration is exhaustive for <= 5)");
  exp->add_option("--samples", samples, "random sample count; 0 enumerates every genotype");
  exp->add_option("--out", out_path, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path, overrides);
  if (exp->parsed()) return cmd_export(seed, vertices, samples, out_path);
  return kExitConfig;
}
