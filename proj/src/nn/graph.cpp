#include "pmfgn/nn/graph.hpp"

#include <cmath>

#include "pmfgn/error.hpp"

namespace pmfgn::nn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(std::string("graph shape error: ") + what);
}

Graph& graph_of(Expr a) {
  require(a.graph != nullptr, "expression is not attached to a graph");
  return *a.graph;
}

Graph& graph_of(Expr a, Expr b) {
  require(a.graph != nullptr && a.graph == b.graph, "expressions belong to different graphs");
  return *a.graph;
}

}  // namespace

const Matrix& Expr::value() const { return graph->value(id); }

Graph::Graph(const ParameterStore& params)
    : params_(params), param_nodes_(params.size(), -1) {}

const Matrix& Graph::value(int id) const {
  const Node& n = nodes_[id];
  return n.ref ? *n.ref : n.value;
}

Expr Graph::param(ParamId id) {
  if (!id.valid() || static_cast<std::size_t>(id.index) >= param_nodes_.size()) {
    throw Error("graph: invalid parameter id");
  }
  int& slot = param_nodes_[id.index];
  if (slot < 0) {
    Node n;
    n.ref = &params_.value(id);
    n.needs_grad = true;
    n.param = id.index;
    slot = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
  }
  return Expr{this, slot};
}

Expr Graph::lookup(ParamId table, int row) {
  const Matrix& t = params_.value(table);
  if (row < 0 || row >= t.rows()) {
    throw Error("graph: lookup row " + std::to_string(row) + " out of range for '" +
                params_.name(table) + "'");
  }
  Node n;
  n.value = t.row(row).transpose();
  n.needs_grad = true;
  n.param = table.index;
  n.lookup_row = row;
  nodes_.push_back(std::move(n));
  return Expr{this, static_cast<int>(nodes_.size()) - 1};
}

Expr Graph::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Expr{this, static_cast<int>(nodes_.size()) - 1};
}

Expr Graph::push(Matrix value, std::vector<int> args, Backward fn) {
  Node n;
  n.value = std::move(value);
  for (int a : args) n.needs_grad = n.needs_grad || nodes_[a].needs_grad;
  n.args = std::move(args);
  if (n.needs_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Expr{this, static_cast<int>(nodes_.size()) - 1};
}

void Graph::backward(Expr root, Gradients& grads, double seed) {
  require(root.graph == this, "backward root belongs to another graph");
  const Matrix& rv = value(root.id);
  require(rv.rows() == 1 && rv.cols() == 1, "backward root must be scalar");
  if (grads.size() != params_.size()) throw Error("gradient buffer does not match parameters");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[root.id].needs_grad) return;
  nodes_[root.id].grad = Matrix::Constant(1, 1, seed);
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param >= 0) {
      Matrix& g = grads[ParamId{n.param}];
      if (n.lookup_row >= 0) {
        g.row(n.lookup_row) += n.grad.transpose();
      } else {
        g += n.grad;
      }
    }
  }
}

// ---- operations ---------------------------------------------------------

Expr matmul(Expr a, Expr b) {
  Graph& g = graph_of(a, b);
  require(a.cols() == b.rows(), "matmul inner dimensions");
  Matrix v = a.value() * b.value();
  const int ia = a.id, ib = b.id;
  return g.push(std::move(v), {ia, ib}, [ia, ib](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    if (g.needs_grad(ia)) g.accumulate(ia, d * g.value(ib).transpose());
    if (g.needs_grad(ib)) g.accumulate(ib, g.value(ia).transpose() * d);
  });
}

Expr matmul_tn(Expr a, Expr b) {
  Graph& g = graph_of(a, b);
  require(a.rows() == b.rows(), "matmul_tn inner dimensions");
  Matrix v = a.value().transpose() * b.value();
  const int ia = a.id, ib = b.id;
  return g.push(std::move(v), {ia, ib}, [ia, ib](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    if (g.needs_grad(ia)) g.accumulate(ia, g.value(ib) * d.transpose());
    if (g.needs_grad(ib)) g.accumulate(ib, g.value(ia) * d);
  });
}

Expr transpose(Expr a) {
  Graph& g = graph_of(a);
  Matrix v = a.value().transpose();
  const int ia = a.id;
  return g.push(std::move(v), {ia}, [ia](Graph& g, int self) {
    g.accumulate(ia, g.grad(self).transpose());
  });
}

Expr add(Expr a, Expr b) {
  Graph& g = graph_of(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add shapes");
  Matrix v = a.value() + b.value();
  const int ia = a.id, ib = b.id;
  return g.push(std::move(v), {ia, ib}, [ia, ib](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    g.accumulate(ia, d);
    g.accumulate(ib, d);
  });
}

Expr sub(Expr a, Expr b) {
  Graph& g = graph_of(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub shapes");
  Matrix v = a.value() - b.value();
  const int ia = a.id, ib = b.id;
  return g.push(std::move(v), {ia, ib}, [ia, ib](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    g.accumulate(ia, d);
    g.accumulate(ib, -d);
  });
}

Expr cmul(Expr a, Expr b) {
  Graph& g = graph_of(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "cmul shapes");
  Matrix v = a.value().cwiseProduct(b.value());
  const int ia = a.id, ib = b.id;
  return g.push(std::move(v), {ia, ib}, [ia, ib](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    if (g.needs_grad(ia)) g.accumulate(ia, d.cwiseProduct(g.value(ib)));
    if (g.needs_grad(ib)) g.accumulate(ib, d.cwiseProduct(g.value(ia)));
  });
}

Expr scale(Expr a, double factor) {
  Graph& g = graph_of(a);
  Matrix v = a.value() * factor;
  const int ia = a.id;
  return g.push(std::move(v), {ia}, [ia, factor](Graph& g, int self) {
    g.accumulate(ia, g.grad(self) * factor);
  });
}

Expr add_colwise(Expr m, Expr v) {
  Graph& g = graph_of(m, v);
  require(v.cols() == 1 && v.rows() == m.rows(), "add_colwise shapes");
  Matrix out = m.value().colwise() + v.value().col(0);
  const int im = m.id, iv = v.id;
  return g.push(std::move(out), {im, iv}, [im, iv](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    g.accumulate(im, d);
    if (g.needs_grad(iv)) g.accumulate(iv, d.rowwise().sum());
  });
}

Expr tanh(Expr a) {
  Graph& g = graph_of(a);
  Matrix v = a.value().array().tanh().matrix();
  const int ia = a.id;
  return g.push(std::move(v), {ia}, [ia](Graph& g, int self) {
    const Matrix& y = g.value(self);
    g.accumulate(ia, g.grad(self).cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Expr sigmoid(Expr a) {
  Graph& g = graph_of(a);
  Matrix v = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  const int ia = a.id;
  return g.push(std::move(v), {ia}, [ia](Graph& g, int self) {
    const Matrix& y = g.value(self);
    g.accumulate(ia, g.grad(self).cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
  });
}

Expr log(Expr a) {
  Graph& g = graph_of(a);
  Matrix v = a.value().array().log().matrix();
  const int ia = a.id;
  return g.push(std::move(v), {ia}, [ia](Graph& g, int self) {
    g.accumulate(ia, g.grad(self).cwiseQuotient(g.value(ia)));
  });
}

Expr softmax(Expr a) {
  Graph& g = graph_of(a);
  const Matrix& x = a.value();
  Matrix v(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double m = x.col(c).maxCoeff();
    v.col(c) = (x.col(c).array() - m).exp().matrix();
    v.col(c) /= v.col(c).sum();
  }
  const int ia = a.id;
  return g.push(std::move(v), {ia}, [ia](Graph& g, int self) {
    const Matrix& y = g.value(self);
    const Matrix& d = g.grad(self);
    Matrix dx(y.rows(), y.cols());
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      const double inner = y.col(c).dot(d.col(c));
      dx.col(c) = y.col(c).cwiseProduct((d.col(c).array() - inner).matrix());
    }
    g.accumulate(ia, dx);
  });
}

Expr pick(Expr a, Eigen::Index row, Eigen::Index col) {
  Graph& g = graph_of(a);
  require(row >= 0 && row < a.rows() && col >= 0 && col < a.cols(), "pick index");
  Matrix v = Matrix::Constant(1, 1, a.value()(row, col));
  const int ia = a.id;
  const Eigen::Index rows = a.rows(), cols = a.cols();
  return g.push(std::move(v), {ia}, [ia, row, col, rows, cols](Graph& g, int self) {
    Matrix d = Matrix::Zero(rows, cols);
    d(row, col) = g.grad(self)(0, 0);
    g.accumulate(ia, d);
  });
}

Expr dot(Expr a, Expr b) {
  Graph& g = graph_of(a, b);
  require(a.cols() == 1 && b.cols() == 1 && a.rows() == b.rows(), "dot shapes");
  Matrix v = Matrix::Constant(1, 1, a.value().col(0).dot(b.value().col(0)));
  const int ia = a.id, ib = b.id;
  return g.push(std::move(v), {ia, ib}, [ia, ib](Graph& g, int self) {
    const double d = g.grad(self)(0, 0);
    if (g.needs_grad(ia)) g.accumulate(ia, g.value(ib) * d);
    if (g.needs_grad(ib)) g.accumulate(ib, g.value(ia) * d);
  });
}

Expr sum(std::span<const Expr> xs) {
  require(!xs.empty(), "sum of nothing");
  Graph& g = graph_of(xs.front());
  Matrix v = xs.front().value();
  std::vector<int> ids{xs.front().id};
  for (std::size_t i = 1; i < xs.size(); ++i) {
    graph_of(xs.front(), xs[i]);
    require(xs[i].rows() == v.rows() && xs[i].cols() == v.cols(), "sum shapes");
    v += xs[i].value();
    ids.push_back(xs[i].id);
  }
  std::vector<int> captured = ids;
  return g.push(std::move(v), std::move(ids), [captured](Graph& g, int self) {
    for (int id : captured) g.accumulate(id, g.grad(self));
  });
}

Expr sum(std::initializer_list<Expr> xs) {
  return sum(std::span<const Expr>(xs.begin(), xs.size()));
}

Expr concat_rows(std::span<const Expr> xs) {
  require(!xs.empty(), "concat of nothing");
  Graph& g = graph_of(xs.front());
  const Eigen::Index cols = xs.front().cols();
  Eigen::Index rows = 0;
  for (const Expr& x : xs) {
    graph_of(xs.front(), x);
    require(x.cols() == cols, "concat_rows column mismatch");
    rows += x.rows();
  }
  Matrix v(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Expr& x : xs) {
    v.middleRows(off, x.rows()) = x.value();
    ids.push_back(x.id);
    offsets.push_back(off);
    off += x.rows();
  }
  std::vector<int> captured = ids;
  return g.push(std::move(v), std::move(ids), [captured, offsets](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    for (std::size_t i = 0; i < captured.size(); ++i) {
      if (!g.needs_grad(captured[i])) continue;
      const Eigen::Index n = g.value(captured[i]).rows();
      g.accumulate(captured[i], d.middleRows(offsets[i], n));
    }
  });
}

Expr concat_rows(std::initializer_list<Expr> xs) {
  return concat_rows(std::span<const Expr>(xs.begin(), xs.size()));
}

Expr concat_cols(std::span<const Expr> xs) {
  require(!xs.empty(), "concat of nothing");
  Graph& g = graph_of(xs.front());
  const Eigen::Index rows = xs.front().rows();
  Eigen::Index cols = 0;
  for (const Expr& x : xs) {
    graph_of(xs.front(), x);
    require(x.rows() == rows, "concat_cols row mismatch");
    cols += x.cols();
  }
  Matrix v(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Expr& x : xs) {
    v.middleCols(off, x.cols()) = x.value();
    ids.push_back(x.id);
    offsets.push_back(off);
    off += x.cols();
  }
  std::vector<int> captured = ids;
  return g.push(std::move(v), std::move(ids), [captured, offsets](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    for (std::size_t i = 0; i < captured.size(); ++i) {
      if (!g.needs_grad(captured[i])) continue;
      const Eigen::Index n = g.value(captured[i]).cols();
      g.accumulate(captured[i], d.middleCols(offsets[i], n));
    }
  });
}

Expr column(Expr m, Eigen::Index j) {
  Graph& g = graph_of(m);
  require(j >= 0 && j < m.cols(), "column index");
  Matrix v = m.value().col(j);
  const int im = m.id;
  const Eigen::Index rows = m.rows(), cols = m.cols();
  return g.push(std::move(v), {im}, [im, j, rows, cols](Graph& g, int self) {
    Matrix d = Matrix::Zero(rows, cols);
    d.col(j) = g.grad(self);
    g.accumulate(im, d);
  });
}

Expr slice_rows(Expr a, Eigen::Index start, Eigen::Index count) {
  Graph& g = graph_of(a);
  require(start >= 0 && count > 0 && start + count <= a.rows(), "slice_rows range");
  Matrix v = a.value().middleRows(start, count);
  const int ia = a.id;
  const Eigen::Index rows = a.rows(), cols = a.cols();
  return g.push(std::move(v), {ia}, [ia, start, count, rows, cols](Graph& g, int self) {
    Matrix d = Matrix::Zero(rows, cols);
    d.middleRows(start, count) = g.grad(self);
    g.accumulate(ia, d);
  });
}

Expr flatten(Expr a) {
  Graph& g = graph_of(a);
  const Matrix& x = a.value();
  Matrix v = Eigen::Map<const Matrix>(x.data(), x.size(), 1);
  const int ia = a.id;
  const Eigen::Index rows = x.rows(), cols = x.cols();
  return g.push(std::move(v), {ia}, [ia, rows, cols](Graph& g, int self) {
    g.accumulate(ia, Eigen::Map<const Matrix>(g.grad(self).data(), rows, cols));
  });
}

Expr mix(Expr a, Expr b, Expr r) {
  Graph& g = graph_of(a, b);
  graph_of(a, r);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "mix shapes");
  require(r.rows() == 1 && r.cols() == 1, "mix weight must be scalar");
  const double w = r.scalar();
  Matrix v = w * a.value() + (1.0 - w) * b.value();
  const int ia = a.id, ib = b.id, ir = r.id;
  return g.push(std::move(v), {ia, ib, ir}, [ia, ib, ir](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    const double w = g.value(ir)(0, 0);
    if (g.needs_grad(ia)) g.accumulate(ia, d * w);
    if (g.needs_grad(ib)) g.accumulate(ib, d * (1.0 - w));
    if (g.needs_grad(ir)) {
      const double dr = d.cwiseProduct(g.value(ia) - g.value(ib)).sum();
      g.accumulate(ir, Matrix::Constant(1, 1, dr));
    }
  });
}

Expr mix(Expr a, Expr b, double r) {
  Graph& g = graph_of(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "mix shapes");
  Matrix v = r * a.value() + (1.0 - r) * b.value();
  const int ia = a.id, ib = b.id;
  return g.push(std::move(v), {ia, ib}, [ia, ib, r](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    g.accumulate(ia, d * r);
    g.accumulate(ib, d * (1.0 - r));
  });
}

Expr patchify(Expr a, int height, int width, int k) {
  Graph& g = graph_of(a);
  require(k > 0 && height % k == 0 && width % k == 0, "patchify kernel must tile the map");
  require(a.cols() == static_cast<Eigen::Index>(height) * width, "patchify map size");
  const Matrix& x = a.value();
  const int channels = static_cast<int>(x.rows());
  const int oh = height / k, ow = width / k;
  Matrix v(static_cast<Eigen::Index>(channels) * k * k, static_cast<Eigen::Index>(oh) * ow);
  for (int py = 0; py < oh; ++py)
    for (int px = 0; px < ow; ++px)
      for (int c = 0; c < channels; ++c)
        for (int dy = 0; dy < k; ++dy)
          for (int dx = 0; dx < k; ++dx)
            v((c * k + dy) * k + dx, py * ow + px) = x(c, (py * k + dy) * width + px * k + dx);
  const int ia = a.id;
  return g.push(std::move(v), {ia}, [ia, height, width, k, channels](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    const int oh = height / k, ow = width / k;
    Matrix dx(channels, static_cast<Eigen::Index>(height) * width);
    for (int py = 0; py < oh; ++py)
      for (int px = 0; px < ow; ++px)
        for (int c = 0; c < channels; ++c)
          for (int dy = 0; dy < k; ++dy)
            for (int ddx = 0; ddx < k; ++ddx)
              dx(c, (py * k + dy) * width + px * k + ddx) = d((c * k + dy) * k + ddx, py * ow + px);
    g.accumulate(ia, dx);
  });
}

Expr avg_pool(Expr a, int height, int width, int k) {
  Graph& g = graph_of(a);
  require(k > 0 && height % k == 0 && width % k == 0, "avg_pool kernel must tile the map");
  require(a.cols() == static_cast<Eigen::Index>(height) * width, "avg_pool map size");
  const Matrix& x = a.value();
  const Eigen::Index channels = x.rows();
  const int oh = height / k, ow = width / k;
  const double inv = 1.0 / (k * k);
  Matrix v = Matrix::Zero(channels, static_cast<Eigen::Index>(oh) * ow);
  for (int y = 0; y < height; ++y)
    for (int xx = 0; xx < width; ++xx)
      v.col((y / k) * ow + xx / k) += x.col(y * width + xx) * inv;
  const int ia = a.id;
  return g.push(std::move(v), {ia}, [ia, height, width, k, channels, inv](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    const int ow = width / k;
    Matrix dx(channels, static_cast<Eigen::Index>(height) * width);
    for (int y = 0; y < height; ++y)
      for (int xx = 0; xx < width; ++xx) dx.col(y * width + xx) = d.col((y / k) * ow + xx / k) * inv;
    g.accumulate(ia, dx);
  });
}

}  // namespace pmfgn::nn
