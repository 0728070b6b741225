#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmfgn/corpus/types.hpp"
#include "pmfgn/corpus/vocabulary.hpp"
#include "pmfgn/model/config.hpp"
#include "pmfgn/model/decoder.hpp"
#include "pmfgn/model/encoders.hpp"
#include "pmfgn/model/gate.hpp"
#include "pmfgn/signal/mfcc.hpp"

namespace pmfgn::model {

// A record converted to indices and numeric modality inputs.
struct RecordInputs {
  std::string id;
  signal::PatchGrid image;
  signal::FrameMatrix audio;
  std::vector<int> speech;
  std::vector<int> question;
  int teacher = -1;
  std::vector<int> targets;   // feedback indices followed by EOS
  std::vector<int> labels;    // modality per target; the EOS step is general
  std::vector<int> sentence;  // sentence index per target; EOS has its own
};

RecordInputs prepare_inputs(const corpus::AssignmentRecord& record, const corpus::Vocabulary& input_vocab,
                            const corpus::Vocabulary& output_vocab, const ModelConfig& config,
                            const signal::MfccExtractor& mfcc);

struct Encoded {
  std::array<nn::Expr, 3> features;        // d x L^(m)
  std::array<nn::Expr, 3> aspects;         // d x K
  std::array<nn::Expr, 3> context_tables;  // tanh(W_h Z^(m))
  nn::Expr keys;                           // d x 4
  nn::Expr score_table;                    // d_h x 4
  nn::Expr z0;
};

struct StepOutput {
  nn::Expr h;
  nn::Expr s;
  nn::Expr z_tilde;
  nn::Expr p_gen;
  nn::Expr p_per;  // unset under no_plm
  nn::Expr p;
  double r = 1.0;
  int modality = 0;
};

struct StepValues {
  nn::Vector s, p_gen, p_per, p;
  double r = 1.0;
  int modality = 0;
};

struct SequenceResult {
  nn::Expr nll;       // J for the record: sum of -log P(y_t), EOS included
  nn::Expr gate_nll;  // J' for the record; unset when no gate supervision
  std::vector<StepValues> steps;
};

struct Decoded {
  std::vector<int> tokens;  // without EOS
  std::vector<int> modality_trace;
  std::vector<double> r_trace;
};

class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }
  void initialize(std::uint64_t seed);

  Encoded encode(nn::Graph& g, const RecordInputs& in) const;

  // One decoder step. With no route the gate's argmax picks the modality.
  StepOutput step(nn::Graph& g, const Encoded& enc, nn::Expr h_prev, int y_prev2, int y_prev1, int teacher,
                  std::optional<int> route) const;

  // Teacher-forced pass. routes has one modality per target. J' is built
  // when supervise_gate is set, against in.labels.
  SequenceResult sequence_nll(nn::Graph& g, const RecordInputs& in, std::span<const int> routes,
                              bool supervise_gate) const;

  Decoded decode_greedy(const RecordInputs& in, int teacher, int max_len) const;

  // Holds r at a constant while set (training warm-up); w_r then gets no gradient.
  void set_mixture_override(std::optional<double> r) { mixture_override_ = r; }
  std::optional<double> mixture_override() const { return mixture_override_; }

  ImageEncoder image_encoder;
  AudioEncoder audio_encoder;
  TextMatchEncoder text_encoder;
  Gate gate;
  GeneralLm general;
  std::optional<PersonalizedLm> personal;
  nn::ParamId w_r;  // invalid unless the mixture weight is learned

 private:
  ModelConfig config_;
  nn::ParameterStore params_;
  std::optional<double> mixture_override_;
};

}  // namespace pmfgn::model
