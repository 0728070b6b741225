#include "pmfgn/nn/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace pmfgn::nn {

void parallel_chunks(std::size_t n, int workers, const std::function<void(int, std::size_t, std::size_t)>& fn) {
  const int w = static_cast<int>(std::max<std::size_t>(1, std::min<std::size_t>(workers < 1 ? 1 : workers, n)));
  if (w == 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (int k = 0; k < w; ++k) {
    const std::size_t begin = n * k / w, end = n * (k + 1) / w;
    threads.emplace_back([&, k, begin, end] {
      try {
        fn(k, begin, end);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  parallel_chunks(n, workers, [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace pmfgn::nn
