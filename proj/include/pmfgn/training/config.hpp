#pragma once

#include <cstdint>
#include <json.hpp>

#include "pmfgn/model/config.hpp"

namespace pmfgn::training {

struct TrainConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 10;
  double alpha = 0.5;
  int patience = 3;
  int max_epochs = 50;
  std::uint64_t seed = 1;
  model::Ablation ablation = model::Ablation::None;
  double fixed_r = 0.7;
  model::ModelDims dims;
  double clip_norm = 5.0;  // <= 0 disables clipping
  int workers = 1;
  int min_count = 1;
  int max_decode_len = 40;
  // Stop as soon as validation perplexity falls below this (0 = never).
  double target_perplexity = 0.0;
  // Optimizer steps during which a learned r is held at 0.5.
  int mixture_warmup_steps = 800;
  // Stratified split of a corpus directory; the split uses `seed`.
  double train_ratio = 0.8;
  double val_ratio = 0.1;
  double test_ratio = 0.1;

  void validate() const;
};

nlohmann::json to_json(const model::ModelDims& d);
model::ModelDims dims_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);
// Keys missing from j keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
nlohmann::json to_json(const model::ModelConfig& c);
model::ModelConfig model_config_from_json(const nlohmann::json& j);

model::ModelConfig make_model_config(const TrainConfig& c, int input_vocab, int output_vocab,
                                     std::vector<std::string> teachers);

}  // namespace pmfgn::training
