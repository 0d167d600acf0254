#include "mergenas/tabular.hpp"

#include <fstream>
#include <sstream>

namespace mergenas {

TabularOracle TabularOracle::load(const std::string& path, int num_vertices) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  TabularOracle oracle;
  oracle.path_ = path;
  oracle.num_vertices_ = num_vertices;

  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == "genotype,valid_acc,test_acc") continue;
      throw parse_error("expected header 'genotype,valid_acc,test_acc'", line_no, 1);
    }
    const size_t c1 = line.find(',');
    const size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw parse_error("expected 3 comma-separated fields", line_no, 1);
    const std::string key = line.substr(0, c1);
    EvalResult r;
    try {
      // round-trips the key to reject malformed genotypes early
      (void)parse_canonical_key(key, num_vertices);
      size_t used = 0;
      const std::string v = line.substr(c1 + 1, c2 - c1 - 1);
      r.valid_acc = std::stod(v, &used);
      if (used != v.size()) throw contract_error("trailing characters");
      const std::string t = line.substr(c2 + 1);
      r.test_acc = std::stod(t, &used);
      if (used != t.size()) throw contract_error("trailing characters");
    } catch (const std::exception& e) {
      throw parse_error(std::string("malformed row: ") + e.what(), line_no, 1);
    }
    if (r.valid_acc < 0.0 || r.valid_acc > 1.0 || r.test_acc < 0.0 || r.test_acc > 1.0)
      throw parse_error("accuracies must lie in [0,1]", line_no, 1);
    if (!oracle.rows_.emplace(key, r).second)
      throw parse_error("duplicate genotype key '" + key + "'", line_no, 1);
    oracle.best_valid_ = std::max(oracle.best_valid_, r.valid_acc);
    oracle.best_test_ = std::max(oracle.best_test_, r.test_acc);
  }
  if (oracle.rows_.empty()) throw parse_error("no data rows", line_no, 1);
  return oracle;
}

EvalResult TabularOracle::evaluate_genotype(const Genotype& g) const {
  const std::string key = canonical_key(g);
  auto it = rows_.find(key);
  if (it == rows_.end())
    throw missing_key_error("tabular oracle has no entry for genotype '" + key + "'");
  return it->second;
}

}  // namespace mergenas
