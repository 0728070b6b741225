#include "pmfgn/nn/layers.hpp"

namespace pmfgn::nn {

Affine Affine::create(ParameterStore& store, const std::string& prefix, int in, int out) {
  Affine a;
  a.weight = store.add(prefix + ".W", out, in);
  a.bias = store.add(prefix + ".b", out, 1);
  a.in = in;
  a.out = out;
  return a;
}

Expr Affine::operator()(Graph& g, Expr x) const {
  Expr wx = matmul(g.param(weight), x);
  return x.cols() == 1 ? add(wx, g.param(bias)) : add_colwise(wx, g.param(bias));
}

Gru Gru::create(ParameterStore& store, const std::string& prefix, int in, int hidden) {
  Gru c;
  c.wx = store.add(prefix + ".Wx", 3 * hidden, in);
  c.wh = store.add(prefix + ".Wh", 3 * hidden, hidden);
  c.bx = store.add(prefix + ".bx", 3 * hidden, 1);
  c.bh = store.add(prefix + ".bh", 3 * hidden, 1);
  c.in = in;
  c.hidden = hidden;
  return c;
}

Expr Gru::step(Graph& g, Expr x, Expr h) const {
  const Eigen::Index n = hidden;
  Expr gx = add(matmul(g.param(wx), x), g.param(bx));
  Expr gh = add(matmul(g.param(wh), h), g.param(bh));
  Expr r = sigmoid(add(slice_rows(gx, 0, n), slice_rows(gh, 0, n)));
  Expr z = sigmoid(add(slice_rows(gx, n, n), slice_rows(gh, n, n)));
  Expr cand = tanh(add(slice_rows(gx, 2 * n, n), cmul(r, slice_rows(gh, 2 * n, n))));
  // (1 - z) * cand + z * h == cand + z * (h - cand)
  return add(cand, cmul(z, sub(h, cand)));
}

Lstm Lstm::create(ParameterStore& store, const std::string& prefix, int in, int hidden) {
  Lstm c;
  c.wx = store.add(prefix + ".Wx", 4 * hidden, in);
  c.wh = store.add(prefix + ".Wh", 4 * hidden, hidden);
  c.b = store.add(prefix + ".b", 4 * hidden, 1);
  c.in = in;
  c.hidden = hidden;
  return c;
}

Lstm::State Lstm::step(Graph& g, Expr x, State prev) const {
  const Eigen::Index n = hidden;
  Expr gates = sum({matmul(g.param(wx), x), matmul(g.param(wh), prev.h), g.param(b)});
  Expr i = sigmoid(slice_rows(gates, 0, n));
  Expr f = sigmoid(slice_rows(gates, n, n));
  Expr cand = tanh(slice_rows(gates, 2 * n, n));
  Expr o = sigmoid(slice_rows(gates, 3 * n, n));
  Expr c = add(cmul(f, prev.c), cmul(i, cand));
  Expr h = cmul(o, tanh(c));
  return State{h, c};
}

Expr zeros(Graph& g, Eigen::Index rows, Eigen::Index cols) {
  return g.constant(Matrix::Zero(rows, cols));
}

}  // namespace pmfgn::nn
