#pragma once

#include <span>
#include <vector>

#include "pmfgn/corpus/types.hpp"

namespace pmfgn::eval {

using corpus::Tokens;

// Corpus-level BLEU over orders 1..n: clipped n-gram precisions pooled over
// all candidates, uniform geometric mean, brevity penalty against the
// closest reference length (shorter one on ties). No smoothing, so any zero
// precision gives 0. references[i] belongs to candidates[i].
double bleu(std::span<const Tokens> candidates, std::span<const std::vector<Tokens>> references, int n);

// Clipped unigram..n-gram statistics, exposed for tests.
struct NgramStats {
  std::vector<long> matches;  // index k holds order k+1
  std::vector<long> totals;
  long candidate_length = 0;
  long reference_length = 0;
};
NgramStats bleu_stats(std::span<const Tokens> candidates, std::span<const std::vector<Tokens>> references, int n);

std::size_t lcs_length(const Tokens& a, const Tokens& b);
// ROUGE-L F1 (beta = 1) of one candidate, max over references.
double rouge_l(const Tokens& candidate, std::span<const Tokens> references);
// Mean of rouge_l over candidates.
double rouge_l(std::span<const Tokens> candidates, std::span<const std::vector<Tokens>> references);

// Distinct n-grams over total n-grams, pooled over all candidates; 0 when
// no candidate has n tokens.
double distinct_n(std::span<const Tokens> candidates, int n);

double perplexity_from_nll(double total_nll, long token_count);

}  // namespace pmfgn::eval
