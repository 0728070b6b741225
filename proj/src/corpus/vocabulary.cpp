#include "pmfgn/corpus/vocabulary.hpp"

#include <map>

#include "pmfgn/error.hpp"

namespace pmfgn::corpus {

namespace {
const std::vector<std::string> kReservedTokens = {"<pad>", "<bos>", "<eos>", "<unk>"};
}

Vocabulary::Vocabulary() {
  for (const auto& t : kReservedTokens) add(t);
}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) : Vocabulary() {
  for (const auto& t : tokens) {
    if (contains(t)) throw ValidationError("vocabulary token '" + t + "' is duplicated or reserved");
    add(t);
  }
}

void Vocabulary::add(const std::string& token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

int Vocabulary::index(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

int Vocabulary::strict_index(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw ValidationError("token '" + token + "' is not in the vocabulary");
  return it->second;
}

const std::string& Vocabulary::token(int index) const {
  if (index < 0 || index >= size()) {
    throw ValidationError("token index " + std::to_string(index) + " out of vocabulary range");
  }
  return tokens_[index];
}

std::vector<int> Vocabulary::encode(const Tokens& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(index(t));
  return out;
}

Tokens Vocabulary::decode(const std::vector<int>& ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

std::pair<Vocabulary, Vocabulary> build_vocabularies(const Corpus& corpus, int min_count) {
  if (corpus.empty()) throw ValidationError("cannot build vocabularies from an empty corpus");
  // std::map gives lexicographic order, so indices are independent of record order.
  std::map<std::string, int> in_counts, out_counts;
  for (const auto& r : corpus) {
    for (const auto& t : r.speech_tokens) ++in_counts[t];
    for (const auto& t : r.question_tokens) ++in_counts[t];
    for (const auto& t : r.feedback_tokens) ++out_counts[t];
  }
  auto select = [min_count](const std::map<std::string, int>& counts) {
    std::vector<std::string> keep;
    for (const auto& [tok, n] : counts)
      if (n >= min_count) keep.push_back(tok);
    return Vocabulary(keep);
  };
  return {select(in_counts), select(out_counts)};
}

}  // namespace pmfgn::corpus
