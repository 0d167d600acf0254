#pragma once

#include <cmath>
#include <cstdint>

#include "mergenas/tensor.hpp"

namespace mergenas {

// Bias-corrected Adam over a ParamStore. Moment tensors are shaped like their
// parameters; a parameter absent from the GradMap contributes a zero gradient
// (its moments still decay).
struct AdamState {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t t = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  static AdamState init(const ParamStore& store, double lr = 5e-4, double beta1 = 0.9,
                        double beta2 = 0.999, double eps = 1e-8) {
    AdamState s;
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    s.m.reserve(store.size());
    s.v.reserve(store.size());
    for (const Tensor& p : store.values) {
      s.m.emplace_back(p.rows(), p.cols(), 0.0);
      s.v.emplace_back(p.rows(), p.cols(), 0.0);
    }
    return s;
  }
};

// One descent step on the given gradient.
inline void adam_step(ParamStore& store, const GradMap& grads, AdamState& s) {
  if (static_cast<int>(s.m.size()) != store.size())
    throw dimension_error("adam_step: state sized for " + std::to_string(s.m.size()) +
                          " params, store has " + std::to_string(store.size()));
  s.t += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (int p = 0; p < store.size(); ++p) {
    Tensor& theta = store.values[p];
    Tensor& m = s.m[p];
    Tensor& v = s.v[p];
    const bool has = grads.has(p);
    if (has && !grads.g[p].same_shape(theta))
      throw dimension_error("adam_step: grad " + grads.g[p].shape_str() + " vs param " +
                            theta.shape_str() + " (" + store.names[p] + ")");
    for (size_t i = 0; i < theta.data.size(); ++i) {
      const double g = has ? grads.g[p].data[i] : 0.0;
      m.data[i] = s.beta1 * m.data[i] + (1.0 - s.beta1) * g;
      v.data[i] = s.beta2 * v.data[i] + (1.0 - s.beta2) * g * g;
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      theta.data[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
  }
}

}  // namespace mergenas
