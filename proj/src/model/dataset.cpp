#include "pmfgn/model/dataset.hpp"

#include "pmfgn/nn/parallel.hpp"

namespace pmfgn::model {

std::vector<Example> prepare_dataset(const corpus::Corpus& corpus, const corpus::Vocabulary& input_vocab,
                                     const corpus::Vocabulary& output_vocab, const ModelConfig& config,
                                     int workers) {
  signal::MfccParams params;
  params.n_coeffs = config.dims.n_mfcc;
  const signal::MfccExtractor mfcc(params);
  std::vector<Example> out(corpus.size());
  nn::parallel_for(corpus.size(), workers, [&](std::size_t i) {
    const auto& rec = corpus[i];
    out[i].inputs = prepare_inputs(rec, input_vocab, output_vocab, config, mfcc);
    out[i].teacher_id = rec.teacher_id;
    out[i].feedback = rec.feedback_tokens;
    out[i].references = rec.references;
  });
  return out;
}

}  // namespace pmfgn::model
