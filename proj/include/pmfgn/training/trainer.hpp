#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pmfgn/corpus/split.hpp"
#include "pmfgn/corpus/vocabulary.hpp"
#include "pmfgn/error.hpp"
#include "pmfgn/model/dataset.hpp"
#include "pmfgn/training/config.hpp"

namespace pmfgn::training {

class Adam {
 public:
  Adam(const nn::ParameterStore& store, const TrainConfig& c);
  void step(nn::ParameterStore& store, const nn::Gradients& grads);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<nn::Matrix> m_, v_;
};

// Per-target modality routes used during training: the labels, or under
// no_label one uniformly drawn modality per sentence (EOS stays general).
std::vector<int> training_routes(const model::RecordInputs& in, model::Ablation ablation, std::uint64_t seed);

struct LossParts {
  double j = 0.0;        // sum of -log P over the batch
  double j_gate = 0.0;   // sum of per-record J'
  long tokens = 0;
  double objective = 0.0;  // mean over records of J + alpha J'
};

// Accumulates d/dtheta of mean_batch(J + alpha J') into grads.
LossParts batch_gradients(const model::Model& m, std::span<const model::Example* const> batch,
                          std::span<const std::vector<int>> routes, double alpha, int workers,
                          nn::Gradients& grads);

// Scales grads to global norm <= max_norm; returns the norm before scaling.
double clip_global_norm(nn::Gradients& grads, double max_norm);

// Name of the parameter whose gradient has the largest (or non-finite) norm.
std::string largest_gradient_group(const nn::ParameterStore& store, const nn::Gradients& grads);

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

struct EpochStats {
  int epoch = 0;
  double train_objective = 0.0;  // mean J + alpha J' per record
  double train_nll_per_token = 0.0;
  double val_perplexity = 0.0;
  bool improved = false;
};

struct Checkpoint {
  TrainConfig train_config;
  corpus::Vocabulary input_vocab;
  corpus::Vocabulary output_vocab;
  int epoch = 0;  // epoch of the stored parameters
  std::vector<double> val_history;
  std::string rng_state;
  std::shared_ptr<model::Model> model;
};

struct TrainOptions {
  std::function<void(const EpochStats&)> on_epoch;
};

// Trains on `train`, early-stopping on teacher-forced perplexity of `val`,
// and returns the best-validation parameters.
Checkpoint train(const TrainConfig& config, const corpus::Corpus& train, const corpus::Corpus& val,
                 const TrainOptions& options = {});
Checkpoint train(const TrainConfig& config, const corpus::CorpusSplits& splits, const TrainOptions& options = {});

// Sorted teacher ids of a corpus.
std::vector<std::string> teacher_ids(const corpus::Corpus& corpus);

}  // namespace pmfgn::training
