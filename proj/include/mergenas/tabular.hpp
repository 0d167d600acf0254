#pragma once

#include <map>
#include <string>

#include "mergenas/oracles.hpp"

namespace mergenas {

// Dictionary-backed oracle over user-supplied benchmark rows. CSV format:
//   genotype,valid_acc,test_acc
// with the genotype key as emitted by canonical_key (edge bits, ';', op
// digits). Duplicate or malformed rows fail the load with a line number.
class TabularOracle final : public Oracle {
 public:
  static TabularOracle load(const std::string& path, int num_vertices = 7);

  std::string name() const override { return "tabular(" + path_ + ")"; }
  EvalResult evaluate_genotype(const Genotype& g) const override;
  std::optional<double> best_valid() const override { return best_valid_; }
  std::optional<double> best_test() const override { return best_test_; }
  size_t size() const { return rows_.size(); }

 private:
  std::string path_;
  int num_vertices_ = 7;
  std::map<std::string, EvalResult> rows_;
  double best_valid_ = 0.0;
  double best_test_ = 0.0;
};

}  // namespace mergenas
