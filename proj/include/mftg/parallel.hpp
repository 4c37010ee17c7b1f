#pragma once

#include <algorithm>
#include <functional>
#include <vector>

namespace mftg {

// Worker pool size: MFTG_WORKERS env var if set, else hardware concurrency.
int worker_count();

// Splits [0, count) into fixed-size chunks, evaluates chunks across workers,
// and combines per-chunk accumulators sequentially in chunk order. The chunk
// layout depends only on `count`, so results are bit-identical for any worker
// count.
//
// chunk_fn(begin, end) -> accumulator for indices [begin, end)
// combine(total, part) folds a chunk accumulator into the running total.
template <typename Acc>
Acc chunked_reduce(int count, Acc init,
                   const std::function<Acc(int, int)>& chunk_fn,
                   const std::function<void(Acc&, const Acc&)>& combine);

namespace detail {
void run_chunks(int num_chunks, const std::function<void(int)>& run_one);
constexpr int kChunkSize = 64;
}  // namespace detail

template <typename Acc>
Acc chunked_reduce(int count, Acc init,
                   const std::function<Acc(int, int)>& chunk_fn,
                   const std::function<void(Acc&, const Acc&)>& combine) {
  if (count <= 0) return init;
  const int num_chunks = (count + detail::kChunkSize - 1) / detail::kChunkSize;
  std::vector<Acc> parts(num_chunks, init);
  detail::run_chunks(num_chunks, [&](int c) {
    const int begin = c * detail::kChunkSize;
    const int end = std::min(count, begin + detail::kChunkSize);
    parts[c] = chunk_fn(begin, end);
  });
  Acc total = init;
  for (const Acc& part : parts) combine(total, part);
  return total;
}

}  // namespace mftg
