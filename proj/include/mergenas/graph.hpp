#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mergenas/tensor.hpp"

namespace mergenas {

enum class Op : uint8_t {
  leaf,       // learnable parameter from the bound ParamStore
  constant,   // value with no gradient
  matmul,
  add,        // elementwise; second operand may be a [1,n] row broadcast over rows
  concat,     // axis 0 (stack rows) or axis 1 (widen rows)
  relu,
  softmax,    // row-wise, max-subtracted
  layer_norm, // row-wise normalize, then affine gain/bias rows
  gather,     // one row of a matrix
  scale,      // multiply by a compile-time constant
  reduce_sum, // sum of all elements -> [1,1]
  log,        // elementwise, input clamped to >= 1e-300
  mul,        // elementwise product
  reshape,
  transpose,
};

const char* op_name(Op op);

// Define-by-run tape. forward-style builder methods execute immediately and
// record a node; backward() walks the tape in reverse. A Graph belongs to one
// training run; rebuild (reset) per trajectory.
class Graph {
 public:
  explicit Graph(const ParamStore* store = nullptr) : store_(store) {}

  void reset();
  void bind(const ParamStore* store) { store_ = store; reset(); }

  int leaf(int param_id);
  int leaf(const std::string& name);
  int constant(Tensor v);

  int matmul(int a, int b);
  int add(int a, int b);
  int concat(std::span<const int> parts, int axis);
  int relu(int a);
  int softmax(int a);
  int layer_norm(int x, int gain, int bias);
  int gather(int table, int row);
  int scale(int a, double c);
  int reduce_sum(int a);
  int log(int a);
  int mul(int a, int b);
  int reshape(int a, int r, int c);
  int transpose(int a);

  const Tensor& val(int id) const { return nodes_[id].val; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }

  // Reverse-mode sweep from a scalar output. Gradients of leaf parameters are
  // accumulated into gm; parameters the output does not depend on are left
  // untouched (zero).
  void backward(int output, GradMap& gm);

 private:
  struct Node {
    Op op;
    int in_ofs = 0;
    int in_cnt = 0;
    int iattr = 0;      // gather row / concat axis
    double dattr = 0.0; // scale factor
    int param_id = -1;
    bool needs_grad = false;
    Tensor val;
    Tensor grad;
    bool has_grad = false;
  };

  int push(Node n, std::span<const int> ins);
  const Tensor& in_val(const Node& n, int i) const {
    return nodes_[inputs_[n.in_ofs + i]].val;
  }
  Tensor& grad_slot(int id);

  const ParamStore* store_;
  std::vector<Node> nodes_;
  std::vector<int> inputs_;
  std::unordered_map<int, int> leaf_cache_;
};

// Central-difference check of an analytic gradient against a scalar loss
// rebuilt from a parameter store. loss_fn must be a pure function of the
// store contents. Relative error uses max(|a|,|b|,1) in the denominator so
// near-zero components are compared absolutely.
struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_index = -1;
  bool pass = false;
};

GradCheckReport grad_check(const std::function<double(const ParamStore&)>& loss_fn,
                           const ParamStore& store, const GradMap& analytic,
                           double h, double tol, int n_threads = 1);

}  // namespace mergenas
