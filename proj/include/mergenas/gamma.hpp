#pragma once

#include "mergenas/errors.hpp"

namespace mergenas {

// Exploration mixing coefficient, decayed linearly from gamma0 to zero over
// the first `horizon` sampling steps and zero afterwards.
struct GammaSchedule {
  double gamma0 = 0.1;
  long long horizon = 100;

  double value(long long t) const {
    if (t < 0) throw contract_error("GammaSchedule: negative step");
    if (t >= horizon) return 0.0;
    return gamma0 * (1.0 - static_cast<double>(t) / static_cast<double>(horizon));
  }
};

}  // namespace mergenas
