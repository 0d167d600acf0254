#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "mergenas/errors.hpp"

namespace mergenas {

// Dense row-major matrix of doubles. Everything the agent touches is rank 2;
// vectors are [1, n] rows. 64-bit floats throughout: the model is tiny and
// gradient checks want the precision.
struct Tensor {
  std::vector<int> shape;  // dims >= 1, product == data.size()
  std::vector<double> data;

  Tensor() : shape{1, 1}, data{0.0} {}

  Tensor(int r, int c, double fill = 0.0)
      : shape{r, c}, data(static_cast<size_t>(r) * c, fill) {
    if (r < 1 || c < 1) throw dimension_error("Tensor: dims must be >= 1");
  }

  Tensor(int r, int c, std::vector<double> values) : shape{r, c}, data(std::move(values)) {
    if (r < 1 || c < 1) throw dimension_error("Tensor: dims must be >= 1");
    if (data.size() != static_cast<size_t>(r) * c)
      throw dimension_error("Tensor: data size does not match shape");
  }

  static Tensor row(std::initializer_list<double> v) {
    return Tensor(1, static_cast<int>(v.size()), std::vector<double>(v));
  }

  int rows() const { return shape[0]; }
  int cols() const { return shape[1]; }
  size_t numel() const { return data.size(); }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols() + c]; }

  const double* row_ptr(int r) const { return data.data() + static_cast<size_t>(r) * cols(); }
  double* row_ptr(int r) { return data.data() + static_cast<size_t>(r) * cols(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::string shape_str() const {
    return "[" + std::to_string(rows()) + "," + std::to_string(cols()) + "]";
  }
};

inline bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) return false;
  for (size_t i = 0; i < a.data.size(); ++i) {
    if (a.data[i] != b.data[i]) return false;  // NaN-free by construction
  }
  return true;
}

// Named flat store of learnable tensors. Insertion order is the canonical
// order for initialization, serialization and optimizer state.
struct ParamStore {
  std::vector<std::string> names;
  std::vector<Tensor> values;

  int add(const std::string& name, Tensor t) {
    if (index_.count(name)) throw contract_error("ParamStore: duplicate name " + name);
    int id = static_cast<int>(values.size());
    index_.emplace(name, id);
    names.push_back(name);
    values.push_back(std::move(t));
    return id;
  }

  int find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw missing_key_error("no parameter named '" + name + "'");
    return it->second;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  int size() const { return static_cast<int>(values.size()); }

 private:
  std::unordered_map<std::string, int> index_;
};

// Gradient per parameter id; entries absent from any backward pass stay zero.
struct GradMap {
  std::vector<Tensor> g;
  std::vector<uint8_t> present;

  explicit GradMap(int n = 0) : g(n), present(n, 0) {}

  void ensure(int n) {
    if (static_cast<int>(g.size()) < n) {
      g.resize(n);
      present.resize(n, 0);
    }
  }

  // Grad tensor for param id, allocated as zeros shaped like `like`.
  Tensor& accum_slot(int id, const Tensor& like) {
    ensure(id + 1);
    if (!present[id]) {
      g[id] = Tensor(like.rows(), like.cols(), 0.0);
      present[id] = 1;
    }
    return g[id];
  }

  bool has(int id) const { return id < static_cast<int>(g.size()) && present[id]; }
};

}  // namespace mergenas
