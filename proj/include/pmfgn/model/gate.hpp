#pragma once

#include <array>
#include <span>
#include <vector>

#include "pmfgn/model/config.hpp"
#include "pmfgn/nn/layers.hpp"

namespace pmfgn::model {

// K-hop structured self-attention over one modality's features.
struct AspectAttention {
  nn::ParamId queries;  // K x d, row k is q_k
  nn::ParamId w;        // d x d

  // F: d x L. Returns Z (d x K), column k = z_k. If alpha is given it
  // receives the L x K attention weights.
  nn::Expr aspects(nn::Graph& g, nn::Expr features, nn::Matrix* alpha = nullptr) const;
};

struct Gate {
  std::array<AspectAttention, 3> attention;
  std::array<nn::ParamId, 3> key_proj;  // d x (K d)
  nn::ParamId z0;                       // d x 1
  nn::ParamId score;                    // d_h x d
  int hops = 0;

  static Gate create(nn::ParameterStore& store, const ModelDims& dims, int hops);

  // d x 4 matrix [z0 : k1 : k2 : k3].
  nn::Expr keys(nn::Graph& g, const std::array<nn::Expr, 3>& aspects) const;
  // tanh(W_g keys), d_h x 4. Depends only on the record, not the step.
  nn::Expr score_table(nn::Graph& g, nn::Expr keys) const;
  // s = softmax(table^T h_prev), 4 x 1.
  static nn::Expr scores(nn::Expr table, nn::Expr h_prev);
};

// -log s_l[label_l], summed over steps and divided by the number of steps.
nn::Expr gate_loss(std::span<const nn::Expr> scores, std::span<const int> labels);
double gate_loss(std::span<const nn::Vector> scores, std::span<const int> labels);

// Index of the first maximum.
int argmax(const nn::Matrix& column);

}  // namespace pmfgn::model
