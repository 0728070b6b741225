#pragma once

#include <span>
#include <vector>

#include "pmfgn/model/config.hpp"
#include "pmfgn/nn/layers.hpp"
#include "pmfgn/signal/image.hpp"
#include "pmfgn/signal/mfcc.hpp"

namespace pmfgn::model {

// Encoders return features as a d x L matrix: column j is f_j.

// Two conv+pool stages over the 64x64 grid, then a shared affine per cell of
// the final 4x4 map. Column index = row * 4 + col of the 16x16 area.
struct ImageEncoder {
  nn::ParamId conv1_w, conv1_b, conv2_w, conv2_b;
  nn::Affine proj;
  static constexpr int kPatch = 4;

  static ImageEncoder create(nn::ParameterStore& store, const ModelDims& dims);
  nn::Expr encode(nn::Graph& g, const signal::PatchGrid& grid) const;
};

// f_j = affine(h_j), h_j = GRU(h_{j-1}, a_j).
struct AudioEncoder {
  nn::Gru gru;
  nn::Affine proj;

  static AudioEncoder create(nn::ParameterStore& store, const ModelDims& dims);
  nn::Expr encode(nn::Graph& g, const signal::FrameMatrix& frames) const;
};

struct TextMatchTrace {
  std::vector<nn::Matrix> alpha;    // L_q x 1 per speech position
  std::vector<nn::Matrix> context;  // c_k, d x 1
};

// Speech and question GRUs, then a match-LSTM that attends over question
// states for every speech position.
struct TextMatchEncoder {
  nn::ParamId embedding;
  nn::Gru speech_gru, question_gru;
  nn::Affine speech_proj, question_proj;
  nn::ParamId w, w_q, w_t, w_m;
  nn::Lstm match;
  nn::Affine out;
  int vocab = 0;

  static TextMatchEncoder create(nn::ParameterStore& store, const ModelDims& dims, int input_vocab);
  nn::Expr encode(nn::Graph& g, std::span<const int> speech, std::span<const int> question,
                  TextMatchTrace* trace = nullptr) const;
  // Projected recurrent states for one sequence, d x L.
  nn::Expr states(nn::Graph& g, const nn::Gru& gru, const nn::Affine& proj, std::span<const int> tokens) const;
};

}  // namespace pmfgn::model
