#pragma once

#include <array>
#include <cstdint>

#include "pmfgn/corpus/types.hpp"

namespace pmfgn::corpus {

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct CorpusSplits {
  Corpus train;
  Corpus val;
  Corpus test;
};

// Per-teacher stratified split. Within each teacher the records are shuffled
// with a seed-derived stream, then cut so that every nonzero ratio gets at
// least one record. Each output split preserves corpus order.
CorpusSplits split_corpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace pmfgn::corpus
