// Seeded sampling and a small thread pool helper.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "kyano/geometry.hpp"

namespace kyano {

// mt19937_64 with the top 53 bits mapped to [0, 1).
class SampleGenerator {
public:
    static constexpr const char* kName = "mt19937_64, 53-bit uniform";

    explicit SampleGenerator(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

// Uniform points in [lo, hi]^dim.
inline std::vector<std::vector<double>> sample_cube(std::size_t dim, std::size_t count, double lo, double hi,
                                                    SampleGenerator& gen) {
    std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
    for (auto& p : pts) {
        for (double& v : p) v = gen.uniform(lo, hi);
    }
    return pts;
}

// Uniform points in the metric's sample box; points the chart rejects are redrawn.
inline std::vector<std::vector<double>> sample_chart_points(const geometry::MetricSpec& spec, std::size_t count,
                                                            SampleGenerator& gen) {
    const geometry::SampleBox box = spec.sample_box();
    std::vector<std::vector<double>> pts;
    pts.reserve(count);
    std::size_t attempts = 0;
    while (pts.size() < count) {
        if (++attempts > 100 * (count + 1)) throw DomainError("could not draw admissible sample points");
        std::vector<double> p;
        for (const auto& [lo, hi] : box.ranges) p.push_back(gen.uniform(lo, hi));
        try {
            spec.check_domain(p);
        } catch (const DomainError&) {
            continue;
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

// Worker count: KYANO_THREADS when set to a positive integer, else hardware concurrency.
inline std::size_t thread_count() {
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("KYANO_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return hw;
}

// Calls fn(i) for i in [0, n). Each index is handled by exactly one thread;
// the first exception thrown is rethrown on the caller's thread.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace kyano
