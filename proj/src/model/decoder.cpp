#include "pmfgn/model/decoder.hpp"

#include "pmfgn/error.hpp"

namespace pmfgn::model {

using nn::Expr;

GeneralLm GeneralLm::create(nn::ParameterStore& store, const ModelDims& dims, int output_vocab) {
  GeneralLm lm;
  lm.vocab = output_vocab;
  lm.embedding = store.add("decoder.embedding", output_vocab, dims.e, nn::Init::StandardNormal);
  lm.modality_embed = store.add("decoder.modality_embedding", 4, dims.d);
  lm.context_w = store.add("decoder.Wh", dims.d_h, dims.d);
  lm.gru = nn::Gru::create(store, "decoder.gru", dims.e + 2 * dims.d, dims.d_h);
  lm.out = nn::Affine::create(store, "decoder.out", dims.d_h, output_vocab);
  return lm;
}

Expr GeneralLm::aspect_table(nn::Graph& g, Expr aspects) const {
  return nn::tanh(nn::matmul(g.param(context_w), aspects));
}

Expr GeneralLm::aspect_context(Expr aspects, Expr table, Expr h_prev) {
  return nn::matmul(aspects, nn::softmax(nn::matmul_tn(table, h_prev)));
}

Expr GeneralLm::embed(nn::Graph& g, int token) const {
  if (token < 0 || token >= vocab) {
    throw ValidationError("output token index " + std::to_string(token) + " outside vocabulary of size " +
                          std::to_string(vocab));
  }
  return g.lookup(embedding, token);
}

GeneralLm::Step GeneralLm::step(nn::Graph& g, Expr h_prev, int y_prev, int modality, Expr z_tilde) const {
  if (modality < 0 || modality > 3) throw ValidationError("modality must be in 0..3");
  Expr x = nn::concat_rows({embed(g, y_prev), g.lookup(modality_embed, modality), z_tilde});
  Expr h = gru.step(g, x, h_prev);
  return {h, nn::softmax(out(g, h))};
}

PersonalizedLm PersonalizedLm::create(nn::ParameterStore& store, const ModelDims& dims, int output_vocab,
                                      const std::vector<std::string>& teachers) {
  PersonalizedLm p;
  for (const auto& t : teachers) {
    p.h1.push_back(store.add("personal." + t + ".H1", dims.per_hidden1, 2 * dims.e));
    p.d1.push_back(store.add("personal." + t + ".d1", dims.per_hidden1, 1));
  }
  p.h2 = store.add("personal.H2", dims.per_hidden2, dims.per_hidden1);
  p.d2 = store.add("personal.d2", dims.per_hidden2, 1);
  p.out = nn::Affine::create(store, "personal.out", dims.per_hidden2, output_vocab);
  return p;
}

Expr PersonalizedLm::probs(nn::Graph& g, const GeneralLm& lm, int y_prev2, int y_prev1, int teacher) const {
  if (teacher < 0 || teacher >= static_cast<int>(h1.size())) throw ValidationError("unknown teacher");
  Expr x = nn::concat_rows({lm.embed(g, y_prev2), lm.embed(g, y_prev1)});
  Expr hidden = nn::tanh(nn::add(nn::matmul(g.param(h1[teacher]), x), g.param(d1[teacher])));
  Expr h = nn::add(nn::matmul(g.param(h2), hidden), g.param(d2));
  return nn::softmax(out(g, h));
}

Expr mixture_weight(nn::Graph& g, nn::ParamId w_r, Expr h) { return nn::sigmoid(nn::dot(g.param(w_r), h)); }

}  // namespace pmfgn::model
