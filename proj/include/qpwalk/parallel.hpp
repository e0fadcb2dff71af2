#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

// Work-stealing-free parallel loop: workers claim fixed-size index blocks
// from an atomic cursor. Callers get determinism by writing only to slots
// owned by their index; the block schedule never influences results.

namespace qpwalk {

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

template <typename Fn>
void parallel_for(std::uint64_t count, unsigned threads, Fn&& fn,
                  std::uint64_t block = 1024) {
    if (block == 0) throw std::invalid_argument("parallel_for: block size must be positive");
    unsigned workers = resolve_threads(threads);
    if (count == 0) return;
    if (workers <= 1 || count <= block) {
        for (std::uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> cursor{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    std::uint64_t nblocks = (count + block - 1) / block;
    unsigned spawn = static_cast<unsigned>(std::min<std::uint64_t>(workers, nblocks));
    std::vector<std::exception_ptr> errors(spawn);
    for (unsigned w = 0; w < spawn; ++w) {
        pool.emplace_back([&, w] {
            while (!failed.load(std::memory_order_relaxed)) {
                std::uint64_t b = cursor.fetch_add(1, std::memory_order_relaxed);
                if (b >= nblocks) break;
                std::uint64_t lo = b * block;
                std::uint64_t hi = std::min(count, lo + block);
                try {
                    for (std::uint64_t i = lo; i < hi; ++i) fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) { first_error = e; break; }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace qpwalk
