#include "pmfgn/corpus/labeling.hpp"

#include <algorithm>
#include <set>

namespace pmfgn::corpus {

bool is_sentence_delimiter(const std::string& token) {
  return token == "." || token == "!" || token == "?";
}

std::vector<std::pair<std::size_t, std::size_t>> split_sentences(const Tokens& tokens) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_sentence_delimiter(tokens[i])) {
      out.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  if (begin < tokens.size()) out.emplace_back(begin, tokens.size());
  return out;
}

namespace {

bool contains_phrase(const Tokens& tokens, std::size_t begin, std::size_t end, const Tokens& phrase) {
  if (phrase.empty() || end - begin < phrase.size()) return false;
  auto first = tokens.begin() + static_cast<std::ptrdiff_t>(begin);
  auto last = tokens.begin() + static_cast<std::ptrdiff_t>(end);
  return std::search(first, last, phrase.begin(), phrase.end()) != last;
}

}  // namespace

std::vector<int> label_modalities(const Tokens& feedback, const KeywordTable& table) {
  std::vector<int> labels(feedback.size(), static_cast<int>(Modality::General));
  for (auto [begin, end] : split_sentences(feedback)) {
    std::set<Modality> matched;
    for (const auto& entry : table) {
      if (contains_phrase(feedback, begin, end, entry.phrase)) matched.insert(entry.modality);
    }
    // Phrases tagged General carry no modality evidence.
    matched.erase(Modality::General);
    const int label = matched.size() == 1 ? static_cast<int>(*matched.begin())
                                          : static_cast<int>(Modality::General);
    std::fill(labels.begin() + static_cast<std::ptrdiff_t>(begin),
              labels.begin() + static_cast<std::ptrdiff_t>(end), label);
  }
  return labels;
}

const KeywordTable& default_keyword_table() {
  static const KeywordTable table = {
      {{"cannot", "see"}, Modality::Image},
      {{"screen", "is", "black"}, Modality::Image},
      {{"camera"}, Modality::Image},
      {{"cannot", "hear"}, Modality::Audio},
      {{"no", "sound"}, Modality::Audio},
      {{"microphone"}, Modality::Audio},
      {{"off", "topic"}, Modality::Text},
      {{"wrong", "question"}, Modality::Text},
      {{"answer", "the", "question"}, Modality::Text},
      {{"on", "topic"}, Modality::Text},
      {{"relevant"}, Modality::Text},
      {{"answered", "the", "question"}, Modality::Text},
  };
  return table;
}

}  // namespace pmfgn::corpus
