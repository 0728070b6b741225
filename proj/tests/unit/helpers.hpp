#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include "pmfgn/corpus/vocabulary.hpp"
#include "pmfgn/model/dataset.hpp"
#include "pmfgn/model/model.hpp"
#include "pmfgn/nn/graph.hpp"
#include "pmfgn/training/gradcheck.hpp"

namespace testing {

using pmfgn::nn::Expr;
using pmfgn::nn::Graph;
using pmfgn::nn::Matrix;
using pmfgn::nn::ParameterStore;

// Largest |analytic - numeric| / max(|a|, |n|, floor) over every entry of
// every parameter, for a scalar built by `f`.
inline double max_grad_error(ParameterStore& store, const std::function<Expr(Graph&)>& f, double h = 1e-5,
                             double floor = 1e-3) {
  pmfgn::nn::Gradients grads(store);
  {
    Graph g(store);
    g.backward(f(g), grads);
  }
  auto eval = [&] {
    Graph g(store);
    return f(g).scalar();
  };
  double worst = 0.0;
  for (auto id : store.ids()) {
    Matrix& v = store.value(id);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double keep = v.data()[i];
      v.data()[i] = keep + h;
      const double up = eval();
      v.data()[i] = keep - h;
      const double down = eval();
      v.data()[i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads[id].data()[i];
      worst = std::max(worst, std::abs(analytic - numeric) /
                                  std::max({std::abs(analytic), std::abs(numeric), floor}));
    }
  }
  return worst;
}

// Weighted sum of all entries so every output element influences the scalar.
inline Expr probe(Graph& g, Expr x, std::uint64_t seed = 5) {
  pmfgn::nn::Rng rng(seed);
  Matrix w(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-1.0, 1.0);
  return pmfgn::nn::dot(pmfgn::nn::flatten(g.constant(w)), pmfgn::nn::flatten(x));
}

struct MicroSetup {
  pmfgn::corpus::Corpus corpus;
  pmfgn::corpus::Vocabulary vin, vout;
  pmfgn::model::ModelConfig config;
  std::vector<pmfgn::model::Example> data;
};

inline MicroSetup micro_setup(pmfgn::model::Ablation ablation = pmfgn::model::Ablation::None,
                              std::uint64_t seed = 3) {
  MicroSetup s;
  s.corpus = pmfgn::training::micro_corpus(seed);
  std::tie(s.vin, s.vout) = pmfgn::corpus::build_vocabularies(s.corpus);
  s.config.dims = pmfgn::model::micro_dims();
  s.config.ablation = ablation;
  s.config.input_vocab = s.vin.size();
  s.config.output_vocab = s.vout.size();
  s.config.teachers = {"A", "B"};
  s.data = pmfgn::model::prepare_dataset(s.corpus, s.vin, s.vout, s.config);
  return s;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pmfgn_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
