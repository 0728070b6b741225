#pragma once

#include <string>

#include "pmfgn/nn/graph.hpp"

namespace pmfgn::nn {

// y = W x + b, applied column-wise when x is a matrix.
struct Affine {
  ParamId weight;
  ParamId bias;
  int in = 0;
  int out = 0;

  static Affine create(ParameterStore& store, const std::string& prefix, int in, int out);
  Expr operator()(Graph& g, Expr x) const;
};

// Gated recurrent unit:
//   r = sigmoid(Wx_r x + bx_r + Wh_r h + bh_r)
//   z = sigmoid(Wx_z x + bx_z + Wh_z h + bh_z)
//   n = tanh(Wx_n x + bx_n + r * (Wh_n h + bh_n))
//   h' = (1 - z) * n + z * h
// Gate blocks are stacked [r; z; n] in the weight rows.
struct Gru {
  ParamId wx, wh, bx, bh;
  int in = 0;
  int hidden = 0;

  static Gru create(ParameterStore& store, const std::string& prefix, int in, int hidden);
  Expr step(Graph& g, Expr x, Expr h) const;
};

// Long short-term memory cell with gate blocks stacked [i; f; g; o].
struct Lstm {
  ParamId wx, wh, b;
  int in = 0;
  int hidden = 0;

  struct State {
    Expr h;
    Expr c;
  };

  static Lstm create(ParameterStore& store, const std::string& prefix, int in, int hidden);
  State step(Graph& g, Expr x, State prev) const;
};

Expr zeros(Graph& g, Eigen::Index rows, Eigen::Index cols = 1);

}  // namespace pmfgn::nn
