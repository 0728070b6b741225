#pragma once

#include <string>
#include <vector>

namespace pmfgn::model {

enum class Ablation { None, NoLabel, NoPlm, FixedR, OneHop };

std::string ablation_name(Ablation a);
// Throws ValidationError on unknown names.
Ablation ablation_from_name(const std::string& name);
const std::vector<Ablation>& all_ablations();

struct ModelDims {
  int d = 256;            // modality feature size
  int d_h = 512;          // decoder hidden size
  int e = 256;            // output word embedding size
  int e_in = 256;         // input word embedding size
  int d_audio = 256;      // audio GRU hidden size
  int d_text = 512;       // speech/question GRU hidden size
  int hops = 3;           // K, aspect vectors per modality
  int conv1 = 8;          // channels after the first conv stage
  int conv2 = 16;         // channels after the second conv stage
  int per_hidden1 = 256;  // personalized first layer (per teacher)
  int per_hidden2 = 256;  // personalized second layer (shared)
  int n_mfcc = 13;

  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// Small sizes used by the gradient checker.
ModelDims micro_dims();

struct ModelConfig {
  ModelDims dims;
  Ablation ablation = Ablation::None;
  double fixed_r = 0.7;
  int input_vocab = 0;
  int output_vocab = 0;
  std::vector<std::string> teachers;

  // Hops after applying the one_hop ablation.
  int effective_hops() const { return ablation == Ablation::OneHop ? 1 : dims.hops; }
  bool has_personalized() const { return ablation != Ablation::NoPlm; }
  bool learns_mixture() const { return ablation == Ablation::None || ablation == Ablation::NoLabel || ablation == Ablation::OneHop; }
  int teacher_index(const std::string& teacher_id) const;  // throws "unknown teacher"
  void validate() const;
};

}  // namespace pmfgn::model
