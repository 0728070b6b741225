#pragma once

#include <string>
#include <vector>

#include "pmfgn/corpus/types.hpp"
#include "pmfgn/corpus/vocabulary.hpp"
#include "pmfgn/model/model.hpp"

namespace pmfgn::model {

struct Example {
  RecordInputs inputs;
  std::string teacher_id;
  corpus::Tokens feedback;
  std::vector<corpus::Tokens> references;
};

std::vector<Example> prepare_dataset(const corpus::Corpus& corpus, const corpus::Vocabulary& input_vocab,
                                     const corpus::Vocabulary& output_vocab, const ModelConfig& config,
                                     int workers = 1);

}  // namespace pmfgn::model
