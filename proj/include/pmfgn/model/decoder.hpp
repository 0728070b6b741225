#pragma once

#include <string>
#include <vector>

#include "pmfgn/model/config.hpp"
#include "pmfgn/nn/layers.hpp"

namespace pmfgn::model {

// Conditioned GRU language model.
struct GeneralLm {
  nn::ParamId embedding;       // E, V_out x e (shared with the personalized model)
  nn::ParamId modality_embed;  // 4 x d, row m is e^(m)
  nn::ParamId context_w;       // W_h, d_h x d
  nn::Gru gru;
  nn::Affine out;
  int vocab = 0;

  static GeneralLm create(nn::ParameterStore& store, const ModelDims& dims, int output_vocab);

  // tanh(W_h Z), d_h x K.
  nn::Expr aspect_table(nn::Graph& g, nn::Expr aspects) const;
  // Z softmax(table^T h_prev).
  static nn::Expr aspect_context(nn::Expr aspects, nn::Expr table, nn::Expr h_prev);

  struct Step {
    nn::Expr h;
    nn::Expr p_gen;
  };
  Step step(nn::Graph& g, nn::Expr h_prev, int y_prev, int modality, nn::Expr z_tilde) const;
  nn::Expr embed(nn::Graph& g, int token) const;
};

// Bigram feed-forward model, first layer per teacher:
//   h = H_2 tanh(H_1^p [E y_{t-2} : E y_{t-1}] + d_1^p) + d_2
//   P_per = softmax(affine(h))
struct PersonalizedLm {
  std::vector<nn::ParamId> h1, d1;  // indexed by teacher
  nn::ParamId h2, d2;
  nn::Affine out;

  static PersonalizedLm create(nn::ParameterStore& store, const ModelDims& dims, int output_vocab,
                               const std::vector<std::string>& teachers);
  nn::Expr probs(nn::Graph& g, const GeneralLm& lm, int y_prev2, int y_prev1, int teacher) const;
};

// P = r P_gen + (1 - r) P_per with r = sigmoid(w_r . h).
nn::Expr mixture_weight(nn::Graph& g, nn::ParamId w_r, nn::Expr h);

}  // namespace pmfgn::model
