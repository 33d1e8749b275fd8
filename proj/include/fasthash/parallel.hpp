#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace fasthash {

// Splits [0, count) into contiguous chunks, one per worker. fn(begin, end)
// must only write to state owned by its own range.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, count)));
  if (workers <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

}  // namespace fasthash
