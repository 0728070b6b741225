#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pmfgn/corpus/types.hpp"

namespace pmfgn::corpus {

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kReserved = 4;

  Vocabulary();
  // Reserved tokens are prepended; `tokens` must not contain them.
  explicit Vocabulary(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(const std::string& token) const { return index_.contains(token); }
  // Unknown tokens map to kUnk.
  int index(const std::string& token) const;
  // Throws if the token is absent.
  int strict_index(const std::string& token) const;
  const std::string& token(int index) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(const Tokens& tokens) const;
  Tokens decode(const std::vector<int>& ids) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  void add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Input vocabulary from speech + question tokens, output vocabulary from
// feedback tokens. Tokens seen fewer than min_count times are left out (and
// therefore encode to UNK).
std::pair<Vocabulary, Vocabulary> build_vocabularies(const Corpus& corpus, int min_count = 1);

}  // namespace pmfgn::corpus
