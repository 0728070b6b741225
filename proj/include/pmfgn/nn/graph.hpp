#pragma once

#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "pmfgn/nn/parameters.hpp"

namespace pmfgn::nn {

class Graph;

// Handle to a node in a Graph. Cheap to copy; valid while the graph lives.
struct Expr {
  Graph* graph = nullptr;
  int id = -1;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
};

// Reverse-mode autodiff tape over dense double matrices. A graph is built
// per record, evaluated eagerly during construction, and differentiated once
// with backward(). Parameters are read by reference from the store; their
// gradients are written into a caller-supplied Gradients buffer.
class Graph {
 public:
  using Backward = std::function<void(Graph&, int self)>;

  explicit Graph(const ParameterStore& params);
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  const ParameterStore& params() const { return params_; }

  // One node per parameter per graph; repeated calls return the same node.
  Expr param(ParamId id);
  // Row `row` of parameter `table`, as a column vector.
  Expr lookup(ParamId table, int row);
  Expr constant(Matrix value);

  const Matrix& value(int id) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Accumulates d(seed * root)/d(param) into `grads`. root must be 1x1.
  void backward(Expr root, Gradients& grads, double seed = 1.0);

  // Op-implementation interface.
  Expr push(Matrix value, std::vector<int> args, Backward fn);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  const Matrix& grad(int id) const { return nodes_[id].grad; }
  template <typename Derived>
  void accumulate(int id, const Eigen::MatrixBase<Derived>& delta) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
      n.grad = delta;
    } else {
      n.grad += delta;
    }
  }
  const std::vector<int>& args(int id) const { return nodes_[id].args; }

 private:
  struct Node {
    Matrix value;
    const Matrix* ref = nullptr;
    Matrix grad;
    std::vector<int> args;
    Backward backward;
    bool needs_grad = false;
    int param = -1;
    int lookup_row = -1;
  };

  const ParameterStore& params_;
  // deque keeps references to node values stable while the tape grows
  std::deque<Node> nodes_;
  std::vector<int> param_nodes_;
};

// ---- operations ---------------------------------------------------------
// All operations evaluate eagerly. Vectors are n x 1 matrices.

Expr matmul(Expr a, Expr b);
// a^T * b
Expr matmul_tn(Expr a, Expr b);
Expr transpose(Expr a);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr cmul(Expr a, Expr b);
Expr scale(Expr a, double factor);
// Adds column vector v to every column of m.
Expr add_colwise(Expr m, Expr v);
Expr tanh(Expr a);
Expr sigmoid(Expr a);
Expr log(Expr a);
// Column-wise softmax.
Expr softmax(Expr a);
Expr pick(Expr a, Eigen::Index row, Eigen::Index col = 0);
Expr dot(Expr a, Expr b);
Expr sum(std::span<const Expr> xs);
Expr sum(std::initializer_list<Expr> xs);
// Vertical concatenation (equal column counts).
Expr concat_rows(std::span<const Expr> xs);
Expr concat_rows(std::initializer_list<Expr> xs);
// Horizontal concatenation of column vectors (equal row counts).
Expr concat_cols(std::span<const Expr> xs);
Expr column(Expr m, Eigen::Index j);
Expr slice_rows(Expr a, Eigen::Index start, Eigen::Index count);
// Column-major flatten to a column vector.
Expr flatten(Expr a);
// r * a + (1 - r) * b, with r a 1x1 expression.
Expr mix(Expr a, Expr b, Expr r);
// Same with a constant weight.
Expr mix(Expr a, Expr b, double r);

// Image ops on feature maps stored as C x (H*W), column index = y*W + x.
// Non-overlapping k x k patches: output (C*k*k) x ((H/k)*(W/k)); row index
// = (c*k + dy)*k + dx.
Expr patchify(Expr a, int height, int width, int k);
// k x k average pooling, stride k: output C x ((H/k)*(W/k)).
Expr avg_pool(Expr a, int height, int width, int k);

}  // namespace pmfgn::nn
