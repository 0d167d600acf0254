#include "mergenas/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <thread>

namespace mergenas {

namespace {

constexpr double kLogFloor = 1e-300;

// C[m,n] += A[m,k] * B[k,n]
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* bp = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// C[m,n] += A[m,k] * B[n,k]^T
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<size_t>(j) * k;
      double s = 0.0;
      for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
  }
}

// C[k,n] += A[m,k]^T * B[m,n]
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    const double* bi = b + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double aip = ai[p];
      double* cp = c + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) cp[j] += aip * bi[j];
    }
  }
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::leaf: return "leaf";
    case Op::constant: return "constant";
    case Op::matmul: return "matmul";
    case Op::add: return "add";
    case Op::concat: return "concat";
    case Op::relu: return "relu";
    case Op::softmax: return "softmax";
    case Op::layer_norm: return "layer_norm";
    case Op::gather: return "gather";
    case Op::scale: return "scale";
    case Op::reduce_sum: return "reduce_sum";
    case Op::log: return "log";
    case Op::mul: return "mul";
    case Op::reshape: return "reshape";
    case Op::transpose: return "transpose";
  }
  return "?";
}

void Graph::reset() {
  nodes_.clear();
  inputs_.clear();
  leaf_cache_.clear();
}

int Graph::push(Node n, std::span<const int> ins) {
  n.in_ofs = static_cast<int>(inputs_.size());
  n.in_cnt = static_cast<int>(ins.size());
  for (int id : ins) {
    inputs_.push_back(id);
    if (nodes_[id].needs_grad) n.needs_grad = true;
  }
  if (n.op == Op::leaf) n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Graph::leaf(int param_id) {
  if (!store_) throw contract_error("Graph::leaf: no ParamStore bound");
  auto it = leaf_cache_.find(param_id);
  if (it != leaf_cache_.end()) return it->second;
  Node n;
  n.op = Op::leaf;
  n.param_id = param_id;
  n.val = store_->values[param_id];
  int id = push(std::move(n), {});
  leaf_cache_.emplace(param_id, id);
  return id;
}

int Graph::leaf(const std::string& name) { return leaf(store_->find(name)); }

int Graph::constant(Tensor v) {
  Node n;
  n.op = Op::constant;
  n.val = std::move(v);
  return push(std::move(n), {});
}

int Graph::matmul(int a, int b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (A.cols() != B.rows())
    throw dimension_error("matmul: " + A.shape_str() + " x " + B.shape_str());
  Node n;
  n.op = Op::matmul;
  n.val = Tensor(A.rows(), B.cols(), 0.0);
  matmul_nn(A.data.data(), B.data.data(), n.val.data.data(), A.rows(), A.cols(), B.cols());
  const int ins[] = {a, b};
  return push(std::move(n), ins);
}

int Graph::add(int a, int b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  Node n;
  n.op = Op::add;
  if (A.same_shape(B)) {
    n.val = A;
    for (size_t i = 0; i < n.val.data.size(); ++i) n.val.data[i] += B.data[i];
  } else if (B.rows() == 1 && B.cols() == A.cols()) {
    n.val = A;
    for (int r = 0; r < A.rows(); ++r) {
      double* out = n.val.row_ptr(r);
      for (int c = 0; c < A.cols(); ++c) out[c] += B.data[c];
    }
  } else {
    throw dimension_error("add: " + A.shape_str() + " + " + B.shape_str());
  }
  const int ins[] = {a, b};
  return push(std::move(n), ins);
}

int Graph::concat(std::span<const int> parts, int axis) {
  if (parts.empty()) throw contract_error("concat: no inputs");
  if (axis != 0 && axis != 1) throw contract_error("concat: axis must be 0 or 1");
  const Tensor& first = nodes_[parts[0]].val;
  Node n;
  n.op = Op::concat;
  n.iattr = axis;
  if (axis == 0) {
    int total = 0;
    for (int id : parts) {
      const Tensor& t = nodes_[id].val;
      if (t.cols() != first.cols())
        throw dimension_error("concat axis 0: " + t.shape_str() + " vs " + first.shape_str());
      total += t.rows();
    }
    n.val = Tensor(total, first.cols(), 0.0);
    double* out = n.val.data.data();
    for (int id : parts) {
      const Tensor& t = nodes_[id].val;
      std::memcpy(out, t.data.data(), t.data.size() * sizeof(double));
      out += t.data.size();
    }
  } else {
    int total = 0;
    for (int id : parts) {
      const Tensor& t = nodes_[id].val;
      if (t.rows() != first.rows())
        throw dimension_error("concat axis 1: " + t.shape_str() + " vs " + first.shape_str());
      total += t.cols();
    }
    n.val = Tensor(first.rows(), total, 0.0);
    int ofs = 0;
    for (int id : parts) {
      const Tensor& t = nodes_[id].val;
      for (int r = 0; r < t.rows(); ++r)
        std::memcpy(n.val.row_ptr(r) + ofs, t.row_ptr(r), t.cols() * sizeof(double));
      ofs += t.cols();
    }
  }
  return push(std::move(n), parts);
}

int Graph::relu(int a) {
  Node n;
  n.op = Op::relu;
  n.val = nodes_[a].val;
  for (double& v : n.val.data) v = v > 0.0 ? v : 0.0;
  const int ins[] = {a};
  return push(std::move(n), ins);
}

int Graph::softmax(int a) {
  const Tensor& A = nodes_[a].val;
  Node n;
  n.op = Op::softmax;
  n.val = Tensor(A.rows(), A.cols(), 0.0);
  for (int r = 0; r < A.rows(); ++r) {
    const double* in = A.row_ptr(r);
    double* out = n.val.row_ptr(r);
    double mx = in[0];
    for (int c = 1; c < A.cols(); ++c) mx = std::max(mx, in[c]);
    double sum = 0.0;
    for (int c = 0; c < A.cols(); ++c) {
      out[c] = std::exp(in[c] - mx);
      sum += out[c];
    }
    for (int c = 0; c < A.cols(); ++c) out[c] /= sum;
  }
  const int ins[] = {a};
  return push(std::move(n), ins);
}

int Graph::layer_norm(int x, int gain, int bias) {
  const Tensor& X = nodes_[x].val;
  const Tensor& G = nodes_[gain].val;
  const Tensor& B = nodes_[bias].val;
  if (G.rows() != 1 || B.rows() != 1 || G.cols() != X.cols() || B.cols() != X.cols())
    throw dimension_error("layer_norm: x " + X.shape_str() + ", gain " + G.shape_str() +
                          ", bias " + B.shape_str());
  Node n;
  n.op = Op::layer_norm;
  n.val = Tensor(X.rows(), X.cols(), 0.0);
  const int c = X.cols();
  for (int r = 0; r < X.rows(); ++r) {
    const double* in = X.row_ptr(r);
    double* out = n.val.row_ptr(r);
    double mean = 0.0;
    for (int j = 0; j < c; ++j) mean += in[j];
    mean /= c;
    double var = 0.0;
    for (int j = 0; j < c; ++j) var += (in[j] - mean) * (in[j] - mean);
    var /= c;
    if (var < 1e-12) {
      // constant row: normalized value defined as 0
      for (int j = 0; j < c; ++j) out[j] = B.data[j];
    } else {
      const double inv = 1.0 / std::sqrt(var);
      for (int j = 0; j < c; ++j) out[j] = (in[j] - mean) * inv * G.data[j] + B.data[j];
    }
  }
  const int ins[] = {x, gain, bias};
  return push(std::move(n), ins);
}

int Graph::gather(int table, int row) {
  const Tensor& T = nodes_[table].val;
  if (row < 0 || row >= T.rows())
    throw contract_error("gather: row " + std::to_string(row) + " out of " +
                         std::to_string(T.rows()));
  Node n;
  n.op = Op::gather;
  n.iattr = row;
  n.val = Tensor(1, T.cols(), std::vector<double>(T.row_ptr(row), T.row_ptr(row) + T.cols()));
  const int ins[] = {table};
  return push(std::move(n), ins);
}

int Graph::scale(int a, double c) {
  Node n;
  n.op = Op::scale;
  n.dattr = c;
  n.val = nodes_[a].val;
  for (double& v : n.val.data) v *= c;
  const int ins[] = {a};
  return push(std::move(n), ins);
}

int Graph::reduce_sum(int a) {
  Node n;
  n.op = Op::reduce_sum;
  double s = 0.0;
  for (double v : nodes_[a].val.data) s += v;
  n.val = Tensor(1, 1, {s});
  const int ins[] = {a};
  return push(std::move(n), ins);
}

int Graph::log(int a) {
  Node n;
  n.op = Op::log;
  n.val = nodes_[a].val;
  for (double& v : n.val.data) v = std::log(std::max(v, kLogFloor));
  const int ins[] = {a};
  return push(std::move(n), ins);
}

int Graph::mul(int a, int b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (!A.same_shape(B)) throw dimension_error("mul: " + A.shape_str() + " * " + B.shape_str());
  Node n;
  n.op = Op::mul;
  n.val = A;
  for (size_t i = 0; i < n.val.data.size(); ++i) n.val.data[i] *= B.data[i];
  const int ins[] = {a, b};
  return push(std::move(n), ins);
}

int Graph::reshape(int a, int r, int c) {
  const Tensor& A = nodes_[a].val;
  if (static_cast<size_t>(r) * c != A.numel())
    throw dimension_error("reshape: " + A.shape_str() + " -> [" + std::to_string(r) + "," +
                          std::to_string(c) + "]");
  Node n;
  n.op = Op::reshape;
  n.val = Tensor(r, c, A.data);
  const int ins[] = {a};
  return push(std::move(n), ins);
}

int Graph::transpose(int a) {
  const Tensor& A = nodes_[a].val;
  Node n;
  n.op = Op::transpose;
  n.val = Tensor(A.cols(), A.rows(), 0.0);
  for (int r = 0; r < A.rows(); ++r)
    for (int c = 0; c < A.cols(); ++c) n.val.at(c, r) = A.at(r, c);
  const int ins[] = {a};
  return push(std::move(n), ins);
}

Tensor& Graph::grad_slot(int id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(n.val.rows(), n.val.cols(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

void Graph::backward(int output, GradMap& gm) {
  const Node& out = nodes_[output];
  if (out.val.numel() != 1)
    throw contract_error("backward: output must be scalar, got " + out.val.shape_str());
  gm.ensure(store_ ? store_->size() : 0);
  grad_slot(output).data[0] = 1.0;

  for (int id = output; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.needs_grad) continue;
    const Tensor& gy = n.grad;
    const int* ins = inputs_.data() + n.in_ofs;
    switch (n.op) {
      case Op::leaf: {
        Tensor& slot = gm.accum_slot(n.param_id, n.val);
        for (size_t i = 0; i < gy.data.size(); ++i) slot.data[i] += gy.data[i];
        break;
      }
      case Op::constant:
        break;
      case Op::matmul: {
        const Tensor& A = in_val(n, 0);
        const Tensor& B = in_val(n, 1);
        if (nodes_[ins[0]].needs_grad) {
          Tensor& ga = grad_slot(ins[0]);
          matmul_nt(gy.data.data(), B.data.data(), ga.data.data(), gy.rows(), gy.cols(),
                    A.cols());
        }
        if (nodes_[ins[1]].needs_grad) {
          Tensor& gb = grad_slot(ins[1]);
          matmul_tn(A.data.data(), gy.data.data(), gb.data.data(), A.rows(), A.cols(),
                    gy.cols());
        }
        break;
      }
      case Op::add: {
        const Tensor& A = in_val(n, 0);
        const Tensor& B = in_val(n, 1);
        if (nodes_[ins[0]].needs_grad) {
          Tensor& ga = grad_slot(ins[0]);
          for (size_t i = 0; i < gy.data.size(); ++i) ga.data[i] += gy.data[i];
        }
        if (nodes_[ins[1]].needs_grad) {
          Tensor& gb = grad_slot(ins[1]);
          if (B.same_shape(A)) {
            for (size_t i = 0; i < gy.data.size(); ++i) gb.data[i] += gy.data[i];
          } else {
            for (int r = 0; r < gy.rows(); ++r) {
              const double* gr = gy.row_ptr(r);
              for (int c = 0; c < gy.cols(); ++c) gb.data[c] += gr[c];
            }
          }
        }
        break;
      }
      case Op::concat: {
        if (n.iattr == 0) {
          int row = 0;
          for (int i = 0; i < n.in_cnt; ++i) {
            const Tensor& part = in_val(n, i);
            if (nodes_[ins[i]].needs_grad) {
              Tensor& gp = grad_slot(ins[i]);
              for (size_t k = 0; k < part.data.size(); ++k)
                gp.data[k] += gy.data[static_cast<size_t>(row) * gy.cols() + k];
            }
            row += part.rows();
          }
        } else {
          int ofs = 0;
          for (int i = 0; i < n.in_cnt; ++i) {
            const Tensor& part = in_val(n, i);
            if (nodes_[ins[i]].needs_grad) {
              Tensor& gp = grad_slot(ins[i]);
              for (int r = 0; r < part.rows(); ++r)
                for (int c = 0; c < part.cols(); ++c) gp.at(r, c) += gy.at(r, ofs + c);
            }
            ofs += part.cols();
          }
        }
        break;
      }
      case Op::relu: {
        if (!nodes_[ins[0]].needs_grad) break;
        const Tensor& X = in_val(n, 0);
        Tensor& gx = grad_slot(ins[0]);
        for (size_t i = 0; i < gy.data.size(); ++i)
          if (X.data[i] > 0.0) gx.data[i] += gy.data[i];
        break;
      }
      case Op::softmax: {
        if (!nodes_[ins[0]].needs_grad) break;
        Tensor& gx = grad_slot(ins[0]);
        const Tensor& P = n.val;
        for (int r = 0; r < P.rows(); ++r) {
          const double* p = P.row_ptr(r);
          const double* gr = gy.row_ptr(r);
          double dot = 0.0;
          for (int c = 0; c < P.cols(); ++c) dot += p[c] * gr[c];
          double* gxr = gx.row_ptr(r);
          for (int c = 0; c < P.cols(); ++c) gxr[c] += p[c] * (gr[c] - dot);
        }
        break;
      }
      case Op::layer_norm: {
        const Tensor& X = in_val(n, 0);
        const Tensor& G = in_val(n, 1);
        const int c = X.cols();
        const bool need_x = nodes_[ins[0]].needs_grad;
        const bool need_g = nodes_[ins[1]].needs_grad;
        const bool need_b = nodes_[ins[2]].needs_grad;
        for (int r = 0; r < X.rows(); ++r) {
          const double* in = X.row_ptr(r);
          const double* gr = gy.row_ptr(r);
          double mean = 0.0;
          for (int j = 0; j < c; ++j) mean += in[j];
          mean /= c;
          double var = 0.0;
          for (int j = 0; j < c; ++j) var += (in[j] - mean) * (in[j] - mean);
          var /= c;
          if (need_b) {
            Tensor& gb = grad_slot(ins[2]);
            for (int j = 0; j < c; ++j) gb.data[j] += gr[j];
          }
          if (var < 1e-12) continue;  // flat region: xhat == 0, no grad to x or gain
          const double inv = 1.0 / std::sqrt(var);
          if (need_g) {
            Tensor& gg = grad_slot(ins[1]);
            for (int j = 0; j < c; ++j) gg.data[j] += gr[j] * (in[j] - mean) * inv;
          }
          if (need_x) {
            Tensor& gx = grad_slot(ins[0]);
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (int j = 0; j < c; ++j) {
              const double xhat = (in[j] - mean) * inv;
              const double dxhat = gr[j] * G.data[j];
              sum_dxhat += dxhat;
              sum_dxhat_xhat += dxhat * xhat;
            }
            double* gxr = gx.row_ptr(r);
            for (int j = 0; j < c; ++j) {
              const double xhat = (in[j] - mean) * inv;
              const double dxhat = gr[j] * G.data[j];
              gxr[j] += inv * (dxhat - sum_dxhat / c - xhat * sum_dxhat_xhat / c);
            }
          }
        }
        break;
      }
      case Op::gather: {
        if (!nodes_[ins[0]].needs_grad) break;
        Tensor& gt = grad_slot(ins[0]);
        double* row = gt.row_ptr(n.iattr);
        for (int c = 0; c < gy.cols(); ++c) row[c] += gy.data[c];
        break;
      }
      case Op::scale: {
        if (!nodes_[ins[0]].needs_grad) break;
        Tensor& gx = grad_slot(ins[0]);
        for (size_t i = 0; i < gy.data.size(); ++i) gx.data[i] += gy.data[i] * n.dattr;
        break;
      }
      case Op::reduce_sum: {
        if (!nodes_[ins[0]].needs_grad) break;
        Tensor& gx = grad_slot(ins[0]);
        const double g = gy.data[0];
        for (double& v : gx.data) v += g;
        break;
      }
      case Op::log: {
        if (!nodes_[ins[0]].needs_grad) break;
        const Tensor& X = in_val(n, 0);
        Tensor& gx = grad_slot(ins[0]);
        for (size_t i = 0; i < gy.data.size(); ++i)
          gx.data[i] += gy.data[i] / std::max(X.data[i], kLogFloor);
        break;
      }
      case Op::mul: {
        const Tensor& A = in_val(n, 0);
        const Tensor& B = in_val(n, 1);
        if (nodes_[ins[0]].needs_grad) {
          Tensor& ga = grad_slot(ins[0]);
          for (size_t i = 0; i < gy.data.size(); ++i) ga.data[i] += gy.data[i] * B.data[i];
        }
        if (nodes_[ins[1]].needs_grad) {
          Tensor& gb = grad_slot(ins[1]);
          for (size_t i = 0; i < gy.data.size(); ++i) gb.data[i] += gy.data[i] * A.data[i];
        }
        break;
      }
      case Op::reshape: {
        if (!nodes_[ins[0]].needs_grad) break;
        Tensor& gx = grad_slot(ins[0]);
        for (size_t i = 0; i < gy.data.size(); ++i) gx.data[i] += gy.data[i];
        break;
      }
      case Op::transpose: {
        if (!nodes_[ins[0]].needs_grad) break;
        Tensor& gx = grad_slot(ins[0]);
        for (int r = 0; r < gy.rows(); ++r)
          for (int c = 0; c < gy.cols(); ++c) gx.at(c, r) += gy.at(r, c);
        break;
      }
    }
  }
}

GradCheckReport grad_check(const std::function<double(const ParamStore&)>& loss_fn,
                           const ParamStore& store, const GradMap& analytic, double h,
                           double tol, int n_threads) {
  if (h <= 0.0) throw contract_error("grad_check: h must be positive");
  struct Worst {
    double err = 0.0;
    int param = -1;
    int index = -1;
  };
  std::vector<Worst> worst(std::max(1, n_threads));

  auto sweep = [&](int tid) {
    ParamStore local = store;  // private copy; loss_fn is pure in the store
    Worst& w = worst[tid];
    for (int p = tid; p < store.size(); p += n_threads) {
      Tensor& t = local.values[p];
      for (size_t i = 0; i < t.data.size(); ++i) {
        const double keep = t.data[i];
        t.data[i] = keep + h;
        const double fp = loss_fn(local);
        t.data[i] = keep - h;
        const double fm = loss_fn(local);
        t.data[i] = keep;
        const double fd = (fp - fm) / (2.0 * h);
        const double an = analytic.has(p) ? analytic.g[p].data[i] : 0.0;
        const double rel =
            std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1.0});
        if (rel > w.err) {
          w.err = rel;
          w.param = p;
          w.index = static_cast<int>(i);
        }
      }
    }
  };

  if (n_threads <= 1) {
    sweep(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(sweep, t);
    for (auto& th : pool) th.join();
  }

  GradCheckReport rep;
  for (const Worst& w : worst) {
    if (w.err >= rep.max_rel_err && w.param >= 0) {
      rep.max_rel_err = w.err;
      rep.worst_param = store.names[w.param];
      rep.worst_index = w.index;
    }
  }
  rep.pass = rep.max_rel_err < tol;
  return rep;
}

}  // namespace mergenas
