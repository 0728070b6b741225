#include "pmfgn/corpus/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pmfgn/error.hpp"
#include "pmfgn/nn/rng.hpp"

namespace pmfgn::corpus {

CorpusSplits split_corpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ValidationError("split ratios must be nonnegative and sum to 1");
  }
  std::map<std::string, std::vector<std::size_t>> by_teacher;
  for (std::size_t i = 0; i < corpus.size(); ++i) by_teacher[corpus[i].teacher_id].push_back(i);

  std::string small;
  for (const auto& [teacher, idx] : by_teacher) {
    if (idx.size() < 3) small += (small.empty() ? "" : ",") + teacher;
  }
  if (!small.empty()) throw ValidationError("teachers with fewer than 3 records: " + small);

  std::vector<int> assignment(corpus.size(), 0);
  std::uint64_t stream = 0;
  for (auto& [teacher, idx] : by_teacher) {
    nn::Rng rng(nn::mix_seed(seed, stream++));
    rng.shuffle(idx);
    const auto n = static_cast<long>(idx.size());
    auto portion = [n](double r) {
      if (r <= 0) return 0L;
      return std::max(1L, std::lround(static_cast<double>(n) * r));
    };
    long n_val = portion(ratios.val);
    long n_test = portion(ratios.test);
    if (ratios.train > 0) {
      while (n - n_val - n_test < 1) {
        if (n_val >= n_test && n_val > 1) --n_val;
        else if (n_test > 1) --n_test;
        else break;
      }
    } else {
      n_test = n - n_val;
    }
    for (long k = 0; k < n; ++k) {
      assignment[idx[k]] = k < n_val ? 1 : (k < n_val + n_test ? 2 : 0);
    }
  }

  CorpusSplits out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Corpus& dst = assignment[i] == 0 ? out.train : (assignment[i] == 1 ? out.val : out.test);
    dst.push_back(corpus[i]);
  }
  return out;
}

}  // namespace pmfgn::corpus
