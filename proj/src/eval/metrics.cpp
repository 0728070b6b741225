#include "pmfgn/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include "pmfgn/error.hpp"

namespace pmfgn::eval {

namespace {

using Gram = std::vector<std::string>;

std::map<Gram, long> ngram_counts(const Tokens& t, int n) {
  std::map<Gram, long> counts;
  if (static_cast<int>(t.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++counts[Gram(t.begin() + i, t.begin() + i + n)];
  return counts;
}

void check_pairs(std::size_t candidates, std::size_t references) {
  if (candidates == 0) throw ValidationError("no candidates to score");
  if (candidates != references) throw ValidationError("one reference set per candidate is required");
}

}  // namespace

NgramStats bleu_stats(std::span<const Tokens> candidates, std::span<const std::vector<Tokens>> references, int n) {
  if (n < 1) throw ValidationError("BLEU order must be >= 1");
  check_pairs(candidates.size(), references.size());
  NgramStats st;
  st.matches.assign(n, 0);
  st.totals.assign(n, 0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Tokens& cand = candidates[i];
    const auto& refs = references[i];
    if (refs.empty()) throw ValidationError("every candidate needs at least one reference");
    for (int k = 1; k <= n; ++k) {
      std::map<Gram, long> max_ref;
      for (const auto& r : refs)
        for (const auto& [g, c] : ngram_counts(r, k)) max_ref[g] = std::max(max_ref[g], c);
      for (const auto& [g, c] : ngram_counts(cand, k)) {
        auto it = max_ref.find(g);
        if (it != max_ref.end()) st.matches[k - 1] += std::min(c, it->second);
        st.totals[k - 1] += c;
      }
    }
    const long c_len = static_cast<long>(cand.size());
    long best = static_cast<long>(refs.front().size());
    for (const auto& r : refs) {
      const long r_len = static_cast<long>(r.size());
      const long d = std::labs(r_len - c_len), bd = std::labs(best - c_len);
      if (d < bd || (d == bd && r_len < best)) best = r_len;
    }
    st.candidate_length += c_len;
    st.reference_length += best;
  }
  return st;
}

double bleu(std::span<const Tokens> candidates, std::span<const std::vector<Tokens>> references, int n) {
  const NgramStats st = bleu_stats(candidates, references, n);
  double log_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (st.totals[k] == 0 || st.matches[k] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(st.matches[k]) / st.totals[k]);
  }
  const double c = st.candidate_length, r = st.reference_length;
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / n);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Tokens& candidate, std::span<const Tokens> references) {
  if (references.empty()) throw ValidationError("ROUGE-L needs at least one reference");
  double best = 0.0;
  for (const auto& ref : references) {
    const double lcs = static_cast<double>(lcs_length(candidate, ref));
    if (lcs == 0) continue;
    const double p = lcs / candidate.size(), r = lcs / ref.size();
    best = std::max(best, 2 * p * r / (p + r));
  }
  return best;
}

double rouge_l(std::span<const Tokens> candidates, std::span<const std::vector<Tokens>> references) {
  check_pairs(candidates.size(), references.size());
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += rouge_l(candidates[i], references[i]);
  return total / static_cast<double>(candidates.size());
}

double distinct_n(std::span<const Tokens> candidates, int n) {
  if (candidates.empty()) throw ValidationError("no candidates to score");
  if (n < 1) throw ValidationError("Distinct order must be >= 1");
  std::set<Gram> seen;
  long total = 0;
  for (const auto& c : candidates) {
    for (const auto& [g, count] : ngram_counts(c, n)) {
      seen.insert(g);
      total += count;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(seen.size()) / total;
}

double perplexity_from_nll(double total_nll, long token_count) {
  if (token_count <= 0) throw ValidationError("perplexity needs at least one token");
  return std::exp(total_nll / static_cast<double>(token_count));
}

}  // namespace pmfgn::eval
