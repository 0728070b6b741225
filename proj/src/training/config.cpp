#include "pmfgn/training/config.hpp"

#include <set>

#include "pmfgn/error.hpp"

namespace pmfgn::training {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(lr > 0)) throw ValidationError("lr must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) throw ValidationError("Adam betas must lie in [0,1)");
  if (!(eps > 0)) throw ValidationError("eps must be positive");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(alpha >= 0)) throw ValidationError("alpha must be >= 0");
  if (patience < 1) throw ValidationError("patience must be >= 1");
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (!(fixed_r > 0 && fixed_r < 1)) throw ValidationError("fixed_r must lie in (0,1)");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (min_count < 1) throw ValidationError("min_count must be >= 1");
  if (mixture_warmup_steps < 0) throw ValidationError("mixture_warmup_steps must be >= 0");
  if (max_decode_len < 1) throw ValidationError("max_decode_len must be >= 1");
  dims.validate();
}

json to_json(const model::ModelDims& d) {
  return json{{"d", d.d},
              {"d_h", d.d_h},
              {"e", d.e},
              {"e_in", d.e_in},
              {"d_audio", d.d_audio},
              {"d_text", d.d_text},
              {"K", d.hops},
              {"conv1", d.conv1},
              {"conv2", d.conv2},
              {"per_hidden1", d.per_hidden1},
              {"per_hidden2", d.per_hidden2},
              {"n_mfcc", d.n_mfcc}};
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config key '") + key + "' has the wrong type");
  }
}

bool read_dims(const json& j, const std::string& key, model::ModelDims& d) {
  static const std::set<std::string> names = {"d",     "d_h",         "e",           "e_in",  "d_audio", "d_text",
                                              "K",     "conv1",       "conv2",       "per_hidden1",
                                              "per_hidden2", "n_mfcc"};
  if (!names.contains(key)) return false;
  int v = 0;
  read(j, key.c_str(), v);
  if (key == "d") d.d = v;
  else if (key == "d_h") d.d_h = v;
  else if (key == "e") d.e = v;
  else if (key == "e_in") d.e_in = v;
  else if (key == "d_audio") d.d_audio = v;
  else if (key == "d_text") d.d_text = v;
  else if (key == "K") d.hops = v;
  else if (key == "conv1") d.conv1 = v;
  else if (key == "conv2") d.conv2 = v;
  else if (key == "per_hidden1") d.per_hidden1 = v;
  else if (key == "per_hidden2") d.per_hidden2 = v;
  else d.n_mfcc = v;
  return true;
}

}  // namespace

model::ModelDims dims_from_json(const json& j) {
  model::ModelDims d;
  for (const auto& [key, _] : j.items()) {
    if (!read_dims(j, key, d)) throw ValidationError("unknown model dimension key '" + key + "'");
  }
  return d;
}

json to_json(const TrainConfig& c) {
  json j{{"lr", c.lr},
         {"beta1", c.beta1},
         {"beta2", c.beta2},
         {"eps", c.eps},
         {"batch_size", c.batch_size},
         {"alpha", c.alpha},
         {"patience", c.patience},
         {"max_epochs", c.max_epochs},
         {"seed", c.seed},
         {"ablation", model::ablation_name(c.ablation)},
         {"fixed_r", c.fixed_r},
         {"clip_norm", c.clip_norm},
         {"workers", c.workers},
         {"min_count", c.min_count},
         {"max_decode_len", c.max_decode_len},
         {"target_perplexity", c.target_perplexity},
         {"mixture_warmup_steps", c.mixture_warmup_steps},
         {"train_ratio", c.train_ratio},
         {"val_ratio", c.val_ratio},
         {"test_ratio", c.test_ratio}};
  j.update(to_json(c.dims));
  return j;
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw ValidationError("training config must be a JSON object");
  static const std::set<std::string> keys = {"lr",        "beta1",      "beta2",   "eps",       "batch_size",
                                             "alpha",     "patience",   "max_epochs", "seed",   "ablation",
                                             "fixed_r",   "clip_norm",  "workers", "min_count", "max_decode_len",
                                             "target_perplexity", "mixture_warmup_steps", "train_ratio", "val_ratio", "test_ratio"};
  for (const auto& [key, _] : j.items()) {
    if (keys.contains(key)) continue;
    if (!read_dims(j, key, c.dims)) throw ValidationError("unknown config key '" + key + "'");
  }
  read(j, "lr", c.lr);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "eps", c.eps);
  read(j, "batch_size", c.batch_size);
  read(j, "alpha", c.alpha);
  read(j, "patience", c.patience);
  read(j, "max_epochs", c.max_epochs);
  read(j, "seed", c.seed);
  if (j.contains("ablation")) {
    std::string name;
    read(j, "ablation", name);
    c.ablation = model::ablation_from_name(name);
  }
  read(j, "fixed_r", c.fixed_r);
  read(j, "clip_norm", c.clip_norm);
  read(j, "workers", c.workers);
  read(j, "min_count", c.min_count);
  read(j, "max_decode_len", c.max_decode_len);
  read(j, "target_perplexity", c.target_perplexity);
  read(j, "mixture_warmup_steps", c.mixture_warmup_steps);
  read(j, "train_ratio", c.train_ratio);
  read(j, "val_ratio", c.val_ratio);
  read(j, "test_ratio", c.test_ratio);
  return c;
}

json to_json(const model::ModelConfig& c) {
  return json{{"dims", to_json(c.dims)},
              {"ablation", model::ablation_name(c.ablation)},
              {"fixed_r", c.fixed_r},
              {"input_vocab", c.input_vocab},
              {"output_vocab", c.output_vocab},
              {"teachers", c.teachers}};
}

model::ModelConfig model_config_from_json(const json& j) {
  try {
    model::ModelConfig c;
    c.dims = dims_from_json(j.at("dims"));
    c.ablation = model::ablation_from_name(j.at("ablation").get<std::string>());
    c.fixed_r = j.at("fixed_r").get<double>();
    c.input_vocab = j.at("input_vocab").get<int>();
    c.output_vocab = j.at("output_vocab").get<int>();
    c.teachers = j.at("teachers").get<std::vector<std::string>>();
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model config: ") + e.what());
  }
}

model::ModelConfig make_model_config(const TrainConfig& c, int input_vocab, int output_vocab,
                                     std::vector<std::string> teachers) {
  model::ModelConfig m;
  m.dims = c.dims;
  m.ablation = c.ablation;
  m.fixed_r = c.fixed_r;
  m.input_vocab = input_vocab;
  m.output_vocab = output_vocab;
  m.teachers = std::move(teachers);
  return m;
}

}  // namespace pmfgn::training
