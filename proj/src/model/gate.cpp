#include "pmfgn/model/gate.hpp"

#include <cmath>

#include "pmfgn/error.hpp"

namespace pmfgn::model {

using nn::Expr;

Expr AspectAttention::aspects(nn::Graph& g, Expr features, nn::Matrix* alpha) const {
  Expr energy = nn::matmul(g.param(queries), nn::tanh(nn::matmul(g.param(w), features)));  // K x L
  Expr a = nn::softmax(nn::transpose(energy));                                              // L x K
  if (alpha) *alpha = a.value();
  return nn::matmul(features, a);
}

Gate Gate::create(nn::ParameterStore& store, const ModelDims& dims, int hops) {
  static const char* names[3] = {"image", "audio", "text"};
  Gate gate;
  gate.hops = hops;
  for (int m = 0; m < 3; ++m) {
    const std::string prefix = std::string("gate.") + names[m];
    gate.attention[m].queries = store.add(prefix + ".Q", hops, dims.d);
    gate.attention[m].w = store.add(prefix + ".W", dims.d, dims.d);
    gate.key_proj[m] = store.add(prefix + ".Wk", dims.d, static_cast<Eigen::Index>(hops) * dims.d);
  }
  gate.z0 = store.add("gate.z0", dims.d, 1);
  gate.score = store.add("gate.Wg", dims.d_h, dims.d);
  return gate;
}

Expr Gate::keys(nn::Graph& g, const std::array<Expr, 3>& aspects) const {
  std::vector<Expr> cols{g.param(z0)};
  for (int m = 0; m < 3; ++m) cols.push_back(nn::matmul(g.param(key_proj[m]), nn::flatten(aspects[m])));
  return nn::concat_cols(cols);
}

Expr Gate::score_table(nn::Graph& g, Expr keys) const { return nn::tanh(nn::matmul(g.param(score), keys)); }

Expr Gate::scores(Expr table, Expr h_prev) { return nn::softmax(nn::matmul_tn(table, h_prev)); }

Expr gate_loss(std::span<const Expr> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("gate_loss: scores and labels differ in length");
  if (scores.empty()) throw ValidationError("gate_loss: no steps");
  std::vector<Expr> terms;
  terms.reserve(scores.size());
  for (std::size_t l = 0; l < scores.size(); ++l) terms.push_back(nn::log(nn::pick(scores[l], labels[l])));
  return nn::scale(nn::sum(terms), -1.0 / static_cast<double>(scores.size()));
}

double gate_loss(std::span<const nn::Vector> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("gate_loss: scores and labels differ in length");
  if (scores.empty()) throw ValidationError("gate_loss: no steps");
  double total = 0.0;
  for (std::size_t l = 0; l < scores.size(); ++l) total -= std::log(scores[l](labels[l]));
  return total / static_cast<double>(scores.size());
}

int argmax(const nn::Matrix& column) {
  int best = 0;
  for (Eigen::Index i = 1; i < column.size(); ++i)
    if (column(i) > column(best)) best = static_cast<int>(i);
  return best;
}

}  // namespace pmfgn::model
