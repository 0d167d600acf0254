#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mergenas/genotype.hpp"
#include "mergenas/trajectory.hpp"

namespace mergenas {

struct EvalResult {
  double valid_acc = 0.0;
  double test_acc = 0.0;
};

// Reward source in [0,1]. Implementations are pure; every evaluation of the
// same point returns the same result.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::string name() const = 0;

  virtual EvalResult evaluate_genotype(const Genotype&) const {
    throw contract_error(name() + ": genotype evaluation unsupported");
  }
  virtual EvalResult evaluate_actions(const std::vector<std::string>&) const {
    throw contract_error(name() + ": raw action evaluation unsupported");
  }

  // Best attainable values, when the oracle knows them.
  virtual std::optional<double> best_valid() const { return std::nullopt; }
  virtual std::optional<double> best_test() const { return std::nullopt; }

  EvalResult evaluate(const Trajectory& t) const {
    return t.genotype ? evaluate_genotype(*t.genotype) : evaluate_actions(t.actions());
  }
};

// (a1 xor a5) and (a3 xor a7) over a chain of 7 binary actions.
int double_xor_reward(const std::vector<int>& bits);

class XorOracle final : public Oracle {
 public:
  std::string name() const override { return "double_xor"; }
  EvalResult evaluate_actions(const std::vector<std::string>& actions) const override;
  std::optional<double> best_valid() const override { return 1.0; }
  std::optional<double> best_test() const override { return 1.0; }
};

// Forwarding wrapper: counts evaluations (the shared trial unit) and, when
// asked, asserts that every genotype it sees validates.
class CountingOracle final : public Oracle {
 public:
  CountingOracle(const Oracle& inner, bool check_validity = false)
      : inner_(inner), check_validity_(check_validity) {}

  std::string name() const override { return inner_.name(); }
  EvalResult evaluate_genotype(const Genotype& g) const override;
  EvalResult evaluate_actions(const std::vector<std::string>& a) const override;
  std::optional<double> best_valid() const override { return inner_.best_valid(); }
  std::optional<double> best_test() const override { return inner_.best_test(); }

  long long trials() const { return trials_; }
  long long invalid_seen() const { return invalid_seen_; }

 private:
  const Oracle& inner_;
  bool check_validity_;
  mutable long long trials_ = 0;
  mutable long long invalid_seen_ = 0;
};

}  // namespace mergenas
