#include <cmath>

#include "doctest.h"
#include "mergenas/graph.hpp"
#include "mergenas/rng.hpp"

using namespace mergenas;

namespace {

Tensor random_tensor(int r, int c, Rng& rng, double lim = 1.0) {
  Tensor t(r, c, 0.0);
  for (double& v : t.data) v = rng.uniform(-lim, lim);
  return t;
}

}  // namespace

TEST_CASE("matmul identity leaves operand unchanged") {
  ParamStore store;
  Rng rng(7);
  const int a_id = store.add("a", random_tensor(3, 3, rng));
  Tensor eye(3, 3, 0.0);
  for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  Graph g(&store);
  const int out = g.matmul(g.constant(eye), g.leaf(a_id));
  for (size_t i = 0; i < 9; ++i) CHECK(g.val(out).data[i] == doctest::Approx(store.values[a_id].data[i]).epsilon(1e-15));
}

TEST_CASE("matmul shape mismatch raises dimension error naming shapes") {
  ParamStore store;
  Graph g(&store);
  const int a = g.constant(Tensor(2, 3, 1.0));
  const int b = g.constant(Tensor(4, 5, 1.0));
  CHECK_THROWS_WITH_AS(g.matmul(a, b), "matmul: [2,3] x [4,5]", dimension_error);
}

TEST_CASE("softmax of equal logits is uniform and sums to one") {
  Graph g;
  const int out = g.softmax(g.constant(Tensor::row({0.0, 0.0, 0.0})));
  for (double v : g.val(out).data) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));

  Rng rng(3);
  for (int it = 0; it < 50; ++it) {
    Graph h;
    const int sm = h.softmax(h.constant(random_tensor(4, 6, rng, 30.0)));
    const Tensor& p = h.val(sm);
    for (int r = 0; r < p.rows(); ++r) {
      double sum = 0.0;
      for (int c = 0; c < p.cols(); ++c) {
        CHECK(p.at(r, c) > 0.0);
        sum += p.at(r, c);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("layer_norm maps a constant row to the bias") {
  Graph g;
  const int x = g.constant(Tensor(1, 5, 3.7));
  const int gain = g.constant(Tensor(1, 5, 2.0));
  const int bias = g.constant(Tensor(1, 5, 0.25));
  const int out = g.layer_norm(x, gain, bias);
  for (double v : g.val(out).data) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("backward of product recovers the other factor") {
  ParamStore store;
  const int x = store.add("x", Tensor(1, 1, {2.0}));
  const int y = store.add("y", Tensor(1, 1, {3.0}));
  Graph g(&store);
  const int out = g.mul(g.leaf(x), g.leaf(y));
  GradMap gm(store.size());
  g.backward(out, gm);
  CHECK(gm.g[x].data[0] == doctest::Approx(3.0));
  CHECK(gm.g[y].data[0] == doctest::Approx(2.0));
}

TEST_CASE("backward requires a scalar output") {
  Graph g;
  const int v = g.constant(Tensor(1, 3, 1.0));
  GradMap gm;
  CHECK_THROWS_AS(g.backward(v, gm), contract_error);
}

TEST_CASE("softmax cross-entropy gradient vanishes at the target") {
  // loss = -log softmax(z)[target] with softmax(z) already one-hot at target
  ParamStore store;
  const int z = store.add("z", Tensor::row({30.0, 0.0, 0.0}));
  Graph g(&store);
  const int lp = g.log(g.softmax(g.leaf(z)));
  const int picked = g.gather(g.reshape(lp, 3, 1), 0);
  const int loss = g.scale(picked, -1.0);
  GradMap gm(store.size());
  g.backward(loss, gm);
  for (double v : gm.g[z].data) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("unreached leaves keep zero gradient") {
  ParamStore store;
  const int a = store.add("a", Tensor(1, 1, {1.0}));
  const int b = store.add("b", Tensor(1, 1, {2.0}));
  Graph g(&store);
  const int out = g.scale(g.leaf(a), 2.0);
  g.leaf(b);  // present in the graph, outside the output's cone
  GradMap gm(store.size());
  g.backward(out, gm);
  CHECK(gm.g[a].data[0] == doctest::Approx(2.0));
  CHECK(!gm.has(b));
}

namespace {

// A small random composite through every op the agent uses; returns the
// scalar loss node.
int build_composite(Graph& g, const ParamStore& store) {
  const int w1 = g.leaf(0);
  const int w2 = g.leaf(1);
  const int gain = g.leaf(2);
  const int bias = g.leaf(3);
  const int table = g.leaf(4);

  const int x = g.concat(std::array{g.gather(table, 1), g.gather(table, 3)}, 0);  // [2,6]
  const int h1 = g.matmul(x, w1);                     // [2,4]
  const int h2 = g.relu(h1);
  const int h3 = g.layer_norm(h2, gain, bias);
  const int h4 = g.add(h3, g.scale(h1, 0.5));
  const int att = g.softmax(g.scale(g.matmul(h4, g.transpose(h4)), 0.7));  // [2,2]
  const int mixed = g.matmul(att, h4);                // [2,4]
  const int wide = g.concat(std::array{mixed, h3}, 1);  // [2,8]
  const int out = g.matmul(wide, w2);                 // [2,1]
  const int p = g.softmax(g.transpose(out));          // [1,2]
  const int lp = g.mul(p, g.log(p));
  (void)store;
  return g.reduce_sum(g.add(lp, g.reshape(g.scale(out, 0.1), 1, 2)));
}

}  // namespace

TEST_CASE("finite differences confirm gradients of every composite op") {
  Rng rng(99);
  for (int seedcase = 0; seedcase < 3; ++seedcase) {
    ParamStore store;
    store.add("w1", random_tensor(6, 4, rng));
    store.add("w2", random_tensor(8, 1, rng));
    store.add("gain", random_tensor(1, 4, rng));
    store.add("bias", random_tensor(1, 4, rng));
    store.add("table", random_tensor(5, 6, rng));

    Graph g(&store);
    const int loss = build_composite(g, store);
    GradMap gm(store.size());
    g.backward(loss, gm);

    auto loss_fn = [](const ParamStore& s) {
      Graph h(&s);
      return h.val(build_composite(h, s)).data[0];
    };
    const GradCheckReport rep = grad_check(loss_fn, store, gm, 1e-6, 1e-6);
    INFO("worst: ", rep.worst_param, "[", rep.worst_index, "] err ", rep.max_rel_err);
    CHECK(rep.pass);
  }
}

TEST_CASE("grad_check on a linear model is exact to 1e-8") {
  ParamStore store;
  Rng rng(5);
  store.add("w", random_tensor(4, 1, rng));
  auto loss_fn = [&](const ParamStore& s) {
    Graph g(&s);
    return g.val(g.reduce_sum(g.matmul(g.constant(Tensor::row({1.0, -2.0, 0.5, 3.0})),
                                       g.leaf(0))))
        .data[0];
  };
  Graph g(&store);
  const int loss =
      g.reduce_sum(g.matmul(g.constant(Tensor::row({1.0, -2.0, 0.5, 3.0})), g.leaf(0)));
  GradMap gm(store.size());
  g.backward(loss, gm);
  const GradCheckReport rep = grad_check(loss_fn, store, gm, 1e-5, 1e-8);
  CHECK(rep.pass);
  CHECK(rep.max_rel_err < 1e-8);
}

TEST_CASE("grad_check on a constant function reports zero error") {
  ParamStore store;
  store.add("w", Tensor(2, 2, 1.5));
  auto loss_fn = [](const ParamStore&) { return 4.0; };
  GradMap gm(store.size());  // all-zero analytic gradient
  const GradCheckReport rep = grad_check(loss_fn, store, gm, 1e-5, 1e-8);
  CHECK(rep.pass);
  CHECK(rep.max_rel_err == 0.0);
}

TEST_CASE("grad_check rejects non-positive h") {
  ParamStore store;
  store.add("w", Tensor(1, 1, 0.0));
  GradMap gm(store.size());
  CHECK_THROWS_AS(grad_check([](const ParamStore&) { return 0.0; }, store, gm, 0.0, 1e-4),
                  contract_error);
}

TEST_CASE("backward is additive over summed graphs") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    ParamStore store;
    store.add("a", random_tensor(3, 3, rng));
    store.add("b", random_tensor(1, 3, rng));

    auto build_f = [](Graph& g) {
      return g.reduce_sum(g.relu(g.matmul(g.leaf(1), g.leaf(0))));
    };
    auto build_h = [](Graph& g) {
      return g.reduce_sum(g.softmax(g.matmul(g.leaf(1), g.transpose(g.leaf(0)))));
    };

    GradMap gf(store.size()), gh(store.size()), gsum(store.size());
    {
      Graph g(&store);
      g.backward(build_f(g), gf);
    }
    {
      Graph g(&store);
      g.backward(build_h(g), gh);
    }
    {
      Graph g(&store);
      g.backward(g.add(build_f(g), build_h(g)), gsum);
    }
    for (int p = 0; p < store.size(); ++p) {
      for (size_t i = 0; i < store.values[p].data.size(); ++i) {
        const double a = (gf.has(p) ? gf.g[p].data[i] : 0.0) +
                         (gh.has(p) ? gh.g[p].data[i] : 0.0);
        const double b = gsum.has(p) ? gsum.g[p].data[i] : 0.0;
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
      }
    }
  }
}
