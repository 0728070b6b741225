#include "pmfgn/model/model.hpp"

#include "pmfgn/corpus/labeling.hpp"
#include "pmfgn/error.hpp"
#include "pmfgn/signal/image.hpp"

namespace pmfgn::model {

using corpus::Vocabulary;
using nn::Expr;

RecordInputs prepare_inputs(const corpus::AssignmentRecord& record, const Vocabulary& input_vocab,
                            const Vocabulary& output_vocab, const ModelConfig& config,
                            const signal::MfccExtractor& mfcc) {
  corpus::validate(record);
  RecordInputs in;
  in.id = record.id;
  in.image = signal::preprocess_image(record.image);
  in.audio = mfcc.compute(record.audio);
  in.speech = input_vocab.encode(record.speech_tokens);
  in.question = input_vocab.encode(record.question_tokens);
  in.teacher = config.teacher_index(record.teacher_id);
  in.targets = output_vocab.encode(record.feedback_tokens);
  in.targets.push_back(Vocabulary::kEos);
  in.labels = record.modality_labels;
  in.labels.push_back(0);
  in.sentence.assign(in.targets.size(), 0);
  const auto ranges = corpus::split_sentences(record.feedback_tokens);
  for (std::size_t s = 0; s < ranges.size(); ++s)
    for (std::size_t i = ranges[s].first; i < ranges[s].second; ++i) in.sentence[i] = static_cast<int>(s);
  in.sentence.back() = static_cast<int>(ranges.size());
  return in;
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const ModelDims& d = config_.dims;
  image_encoder = ImageEncoder::create(params_, d);
  audio_encoder = AudioEncoder::create(params_, d);
  text_encoder = TextMatchEncoder::create(params_, d, config_.input_vocab);
  gate = Gate::create(params_, d, config_.effective_hops());
  general = GeneralLm::create(params_, d, config_.output_vocab);
  if (config_.has_personalized()) {
    personal = PersonalizedLm::create(params_, d, config_.output_vocab, config_.teachers);
    if (config_.learns_mixture()) w_r = params_.add("mixture.w_r", d.d_h, 1);
  }
}

void Model::initialize(std::uint64_t seed) {
  nn::Rng rng(seed);
  params_.initialize(rng);
}

Encoded Model::encode(nn::Graph& g, const RecordInputs& in) const {
  Encoded enc;
  enc.features[0] = image_encoder.encode(g, in.image);
  enc.features[1] = audio_encoder.encode(g, in.audio);
  enc.features[2] = text_encoder.encode(g, in.speech, in.question);
  for (int m = 0; m < 3; ++m) {
    enc.aspects[m] = gate.attention[m].aspects(g, enc.features[m]);
    enc.context_tables[m] = general.aspect_table(g, enc.aspects[m]);
  }
  enc.keys = gate.keys(g, enc.aspects);
  enc.score_table = gate.score_table(g, enc.keys);
  enc.z0 = g.param(gate.z0);
  return enc;
}

StepOutput Model::step(nn::Graph& g, const Encoded& enc, Expr h_prev, int y_prev2, int y_prev1, int teacher,
                       std::optional<int> route) const {
  StepOutput out;
  out.s = Gate::scores(enc.score_table, h_prev);
  out.modality = route ? *route : argmax(out.s.value());
  if (out.modality < 0 || out.modality > 3) throw ValidationError("modality must be in 0..3");
  out.z_tilde = out.modality == 0 ? enc.z0
                                  : GeneralLm::aspect_context(enc.aspects[out.modality - 1],
                                                              enc.context_tables[out.modality - 1], h_prev);
  auto gen = general.step(g, h_prev, y_prev1, out.modality, out.z_tilde);
  out.h = gen.h;
  out.p_gen = gen.p_gen;
  if (!personal) {
    out.p = out.p_gen;
    out.r = 1.0;
    return out;
  }
  out.p_per = personal->probs(g, general, y_prev2, y_prev1, teacher);
  if (w_r.valid() && mixture_override_) {
    out.r = *mixture_override_;
    out.p = nn::mix(out.p_gen, out.p_per, out.r);
  } else if (w_r.valid()) {
    Expr r = mixture_weight(g, w_r, out.h);
    out.r = r.scalar();
    out.p = nn::mix(out.p_gen, out.p_per, r);
  } else {
    out.r = config_.fixed_r;
    out.p = nn::mix(out.p_gen, out.p_per, config_.fixed_r);
  }
  return out;
}

SequenceResult Model::sequence_nll(nn::Graph& g, const RecordInputs& in, std::span<const int> routes,
                                   bool supervise_gate) const {
  if (routes.size() != in.targets.size()) throw ValidationError("one route per target step is required");
  const Encoded enc = encode(g, in);
  SequenceResult res;
  Expr h = nn::zeros(g, config_.dims.d_h);
  std::vector<Expr> nll_terms, scores;
  for (std::size_t t = 0; t < in.targets.size(); ++t) {
    const int y1 = t == 0 ? Vocabulary::kBos : in.targets[t - 1];
    const int y2 = t <= 1 ? Vocabulary::kBos : in.targets[t - 2];
    StepOutput out = step(g, enc, h, y2, y1, in.teacher, routes[t]);
    nll_terms.push_back(nn::log(nn::pick(out.p, in.targets[t])));
    scores.push_back(out.s);
    StepValues v;
    v.s = out.s.value();
    v.p_gen = out.p_gen.value();
    if (out.p_per.graph) v.p_per = out.p_per.value();
    v.p = out.p.value();
    v.r = out.r;
    v.modality = out.modality;
    res.steps.push_back(std::move(v));
    h = out.h;
  }
  res.nll = nn::scale(nn::sum(nll_terms), -1.0);
  if (supervise_gate) res.gate_nll = gate_loss(scores, in.labels);
  return res;
}

Decoded Model::decode_greedy(const RecordInputs& in, int teacher, int max_len) const {
  if (max_len < 1) throw ValidationError("max_len must be >= 1");
  if (teacher < 0 || teacher >= static_cast<int>(config_.teachers.size())) throw ValidationError("unknown teacher");
  nn::Graph g(params_);
  const Encoded enc = encode(g, in);
  Decoded dec;
  Expr h = nn::zeros(g, config_.dims.d_h);
  int y2 = Vocabulary::kBos, y1 = Vocabulary::kBos;
  for (int t = 0; t < max_len; ++t) {
    StepOutput out = step(g, enc, h, y2, y1, teacher, std::nullopt);
    const int tok = argmax(out.p.value());
    dec.modality_trace.push_back(out.modality);
    dec.r_trace.push_back(out.r);
    if (tok == Vocabulary::kEos) break;
    dec.tokens.push_back(tok);
    h = out.h;
    y2 = y1;
    y1 = tok;
  }
  return dec;
}

}  // namespace pmfgn::model
