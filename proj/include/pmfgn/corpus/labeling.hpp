#pragma once

#include <vector>

#include "pmfgn/corpus/types.hpp"

namespace pmfgn::corpus {

struct KeywordPhrase {
  Tokens phrase;
  Modality modality;
};

using KeywordTable = std::vector<KeywordPhrase>;

bool is_sentence_delimiter(const std::string& token);

// [begin, end) token ranges, one per sentence. A sentence ends after a
// delimiter token; trailing tokens without one form a final sentence.
std::vector<std::pair<std::size_t, std::size_t>> split_sentences(const Tokens& tokens);

// Per-token modality labels. A sentence takes modality m when its matched
// phrases name exactly one modality m, otherwise General.
std::vector<int> label_modalities(const Tokens& feedback, const KeywordTable& table);

// Phrases used by the synthetic corpus templates. Illustrative only.
const KeywordTable& default_keyword_table();

}  // namespace pmfgn::corpus
