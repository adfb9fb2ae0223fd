#pragma once

// Fixed-chunk parallel loops and mergeable running statistics. Chunk
// boundaries never depend on the thread count and partial results are
// merged in chunk order, so reductions are bit-identical for any number
// of threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace galerkin {

/// Threads used by parallel loops: GALERKIN_THREADS if set and positive,
/// otherwise the hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("GALERKIN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(std::min(v, 1024L));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(chunk, begin, end) for each chunk of [0, count). The first
/// exception thrown by any chunk (lowest chunk index) is rethrown.
template <class Body>
void parallel_chunks(std::size_t count, std::size_t chunk_size, Body&& body, unsigned threads = thread_count()) {
    if (count == 0) return;
    chunk_size = std::max<std::size_t>(1, chunk_size);
    const std::size_t chunks = (count + chunk_size - 1) / chunk_size;
    std::vector<std::exception_ptr> errors(chunks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t c = next++; c < chunks; c = next++) {
            try {
                body(c, c * chunk_size, std::min(count, (c + 1) * chunk_size));
            } catch (...) {
                errors[c] = std::current_exception();
            }
        }
    };
    const unsigned nt = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Welford accumulator with Chan's merge.
struct RunningStats {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }

    void merge(const RunningStats& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double n = static_cast<double>(count + o.count);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.count) / n;
        m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) / n;
        count += o.count;
    }

    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double std_error() const { return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

/// Runs sample(i) for i in [0, count) and accumulates the returned values.
template <class Sample>
RunningStats parallel_stats(std::size_t count, Sample&& sample, std::size_t chunk_size = 1024) {
    const std::size_t chunks = (count + chunk_size - 1) / std::max<std::size_t>(1, chunk_size);
    std::vector<RunningStats> partial(chunks);
    parallel_chunks(count, chunk_size, [&](std::size_t c, std::size_t b, std::size_t e) {
        RunningStats s;
        for (std::size_t i = b; i < e; ++i) s.add(sample(i));
        partial[c] = s;
    });
    RunningStats total;
    for (const auto& p : partial) total.merge(p);
    return total;
}

}  // namespace galerkin
