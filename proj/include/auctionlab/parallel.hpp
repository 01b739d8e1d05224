#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

#include "auctionlab/rng.hpp"

namespace auctionlab {

/// Worker count used when a caller passes 0.
unsigned default_workers();
void set_default_workers(unsigned workers);

/// Runs fn(i) for i in [0, n_tasks) on up to `workers` threads. Exceptions are
/// rethrown on the calling thread (first one wins).
template <class Fn>
void parallel_for(std::size_t n_tasks, unsigned workers, Fn&& fn) {
    if (workers == 0)
        workers = default_workers();
    workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n_tasks));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n_tasks)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next = n_tasks;
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

/// Running first and second moments of a fixed-width vector of observables.
class Moments {
public:
    explicit Moments(std::size_t width = 0) : sum_(width, 0.0), sum_sq_(width, 0.0) {}

    void add(std::span<const double> x) {
        for (std::size_t i = 0; i < sum_.size(); ++i) {
            sum_[i] += x[i];
            sum_sq_[i] += x[i] * x[i];
        }
        ++count_;
    }

    void merge(const Moments& other) {
        for (std::size_t i = 0; i < sum_.size(); ++i) {
            sum_[i] += other.sum_[i];
            sum_sq_[i] += other.sum_sq_[i];
        }
        count_ += other.count_;
    }

    std::size_t count() const { return count_; }
    std::size_t width() const { return sum_.size(); }
    double mean(std::size_t i) const { return count_ ? sum_[i] / static_cast<double>(count_) : 0.0; }

    double variance(std::size_t i) const {
        if (count_ < 2)
            return 0.0;
        double n = static_cast<double>(count_);
        double m = sum_[i] / n;
        return std::max(0.0, (sum_sq_[i] / n - m * m) * n / (n - 1.0));
    }

    /// Standard error of the mean.
    double std_error(std::size_t i) const {
        return count_ ? std::sqrt(variance(i) / static_cast<double>(count_)) : 0.0;
    }

private:
    std::vector<double> sum_;
    std::vector<double> sum_sq_;
    std::size_t count_ = 0;
};

inline constexpr std::size_t kShardSize = 1u << 15;

/// Sharded Monte Carlo. Shard s draws from Rng(seed, s, tag) and the shard
/// partial sums are merged in shard order, so totals do not depend on the
/// worker count. `draw(rng, out)` fills `out` (length `width`) for one sample.
template <class Draw>
Moments monte_carlo(std::size_t n_draws, std::uint64_t seed, std::string_view tag, std::size_t width,
                    Draw&& draw, unsigned workers = 0) {
    std::size_t n_shards = (n_draws + kShardSize - 1) / kShardSize;
    std::vector<Moments> partial(n_shards, Moments(width));
    parallel_for(n_shards, workers, [&](std::size_t s) {
        Rng rng(seed, s, tag);
        std::size_t begin = s * kShardSize;
        std::size_t end = std::min(n_draws, begin + kShardSize);
        std::vector<double> out(width);
        for (std::size_t k = begin; k < end; ++k) {
            std::fill(out.begin(), out.end(), 0.0);
            draw(rng, std::span<double>(out));
            partial[s].add(out);
        }
    });
    Moments total(width);
    for (const auto& p : partial)
        total.merge(p);
    return total;
}

}  // namespace auctionlab
