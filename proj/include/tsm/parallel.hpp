#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tsm {

inline unsigned default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// Splits [0, count) into one contiguous block per worker and runs
// fn(begin, end, worker) on each.  Block boundaries are multiples of 64 so
// that workers writing bitmap words for their own indices never share a word.
// The first exception thrown by any worker is rethrown after all joined.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    if (workers <= 1 || count < 128) {
        if (count > 0) fn(std::size_t{0}, count, 0u);
        return;
    }
    const std::size_t words = (count + 63) / 64;
    const std::size_t used = std::min<std::size_t>(workers, words);
    const std::size_t per = (words + used - 1) / used;

    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(used);
    for (std::size_t w = 0; w < used; ++w) {
        const std::size_t begin = std::min(count, w * per * 64);
        const std::size_t end = std::min(count, (w + 1) * per * 64);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end, w] {
            try {
                fn(begin, end, static_cast<unsigned>(w));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace tsm
