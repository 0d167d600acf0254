#include "mergenas/oracles.hpp"

namespace mergenas {

int double_xor_reward(const std::vector<int>& bits) {
  if (bits.size() != 7)
    throw contract_error("double_xor_reward: expected 7 actions, got " +
                         std::to_string(bits.size()));
  for (int b : bits)
    if (b != 0 && b != 1) throw contract_error("double_xor_reward: actions must be binary");
  return ((bits[0] ^ bits[4]) & (bits[2] ^ bits[6])) ? 1 : 0;
}

EvalResult XorOracle::evaluate_actions(const std::vector<std::string>& actions) const {
  std::vector<int> bits;
  bits.reserve(actions.size());
  for (const std::string& a : actions) {
    if (a != "0" && a != "1")
      throw contract_error("double_xor: non-binary action '" + a + "'");
    bits.push_back(a == "1");
  }
  const double r = double_xor_reward(bits);
  return {r, r};
}

EvalResult CountingOracle::evaluate_genotype(const Genotype& g) const {
  ++trials_;
  if (check_validity_ && !validate(g)) ++invalid_seen_;
  return inner_.evaluate_genotype(g);
}

EvalResult CountingOracle::evaluate_actions(const std::vector<std::string>& a) const {
  ++trials_;
  return inner_.evaluate_actions(a);
}

}  // namespace mergenas
