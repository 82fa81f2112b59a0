#ifndef RISKDUAL_PARALLEL_HPP
#define RISKDUAL_PARALLEL_HPP

#include <cstddef>
#include <thread>
#include <vector>

namespace riskdual {

// Static-partition parallel loop. Work item i is processed exactly once and
// writes only to its own output slot, so results are bit-identical for any
// thread count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers;
        const std::size_t hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace riskdual

#endif // RISKDUAL_PARALLEL_HPP
