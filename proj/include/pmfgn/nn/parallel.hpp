#pragma once

#include <cstddef>
#include <functional>

namespace pmfgn::nn {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Indices are split
// into contiguous chunks, chunk w going to worker w. Exceptions are
// rethrown on the caller (the one from the lowest chunk wins).
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// Same split, but fn receives (worker, begin, end).
void parallel_chunks(std::size_t n, int workers, const std::function<void(int, std::size_t, std::size_t)>& fn);

}  // namespace pmfgn::nn
