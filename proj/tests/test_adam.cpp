#include <cmath>

#include "doctest.h"
#include "mergenas/adam.hpp"
#include "mergenas/rng.hpp"

using namespace mergenas;

TEST_CASE("first Adam step moves a scalar by about -lr") {
  ParamStore store;
  const int p = store.add("w", Tensor(1, 1, {0.0}));
  AdamState s = AdamState::init(store);
  GradMap gm(1);
  gm.accum_slot(p, store.values[p]).data[0] = 1.0;
  adam_step(store, gm, s);
  CHECK(s.t == 1);
  CHECK(store.values[p].data[0] == doctest::Approx(-5e-4).epsilon(1e-6));
}

TEST_CASE("zero gradient leaves fresh parameters unchanged but advances t") {
  ParamStore store;
  store.add("w", Tensor(2, 2, 1.25));
  AdamState s = AdamState::init(store);
  GradMap gm(1);  // nothing accumulated
  adam_step(store, gm, s);
  CHECK(s.t == 1);
  for (double v : store.values[0].data) CHECK(v == 1.25);
}

TEST_CASE("per-step displacement under constant gradient stays within lr") {
  // direct evaluation of the update recurrences
  for (double g : {1.0, 0.3, -2.5}) {
    ParamStore store;
    store.add("w", Tensor(1, 1, {0.7}));
    AdamState s = AdamState::init(store);
    GradMap gm(1);
    gm.accum_slot(0, store.values[0]).data[0] = g;
    double prev = store.values[0].data[0];
    for (int t = 0; t < 5; ++t) {
      adam_step(store, gm, s);
      const double delta = store.values[0].data[0] - prev;
      prev = store.values[0].data[0];
      CHECK(std::abs(delta) <= s.lr * 1.0001);
      CHECK(delta * g < 0.0);  // moves against the gradient
    }
  }
}

TEST_CASE("Adam update is odd under joint sign flip") {
  Rng rng(11);
  ParamStore a, b;
  a.add("w", Tensor(2, 3, 0.0));
  b.add("w", Tensor(2, 3, 0.0));
  for (size_t i = 0; i < 6; ++i) {
    const double v = rng.uniform(-1.0, 1.0);
    a.values[0].data[i] = v;
    b.values[0].data[i] = -v;
  }
  AdamState sa = AdamState::init(a), sb = AdamState::init(b);
  for (int step = 0; step < 7; ++step) {
    GradMap ga(1), gb(1);
    Tensor& ta = ga.accum_slot(0, a.values[0]);
    Tensor& tb = gb.accum_slot(0, b.values[0]);
    for (size_t i = 0; i < 6; ++i) {
      const double g = rng.uniform(-2.0, 2.0);
      ta.data[i] = g;
      tb.data[i] = -g;
    }
    adam_step(a, ga, sa);
    adam_step(b, gb, sb);
    for (size_t i = 0; i < 6; ++i)
      CHECK(a.values[0].data[i] == doctest::Approx(-b.values[0].data[i]).epsilon(1e-12));
  }
}

TEST_CASE("shape mismatch between grad and param is a dimension error") {
  ParamStore store;
  store.add("w", Tensor(2, 2, 0.0));
  AdamState s = AdamState::init(store);
  GradMap gm(1);
  gm.present[0] = 1;
  gm.g[0] = Tensor(1, 3, 0.0);
  CHECK_THROWS_AS(adam_step(store, gm, s), dimension_error);
}
