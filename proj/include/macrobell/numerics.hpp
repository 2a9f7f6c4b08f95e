#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "macrobell/errors.hpp"

namespace macrobell {

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double inv_sqrt2 = 0.70710678118654752440084436210485;

/// Neumaier-compensated accumulator. Used wherever a sum must be independent
/// of roundoff drift at the 1e-15 level.
class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Uniform symmetric grid with an exact node at 0: x_i = (i - n_half) * step.
class GridAxis {
public:
    GridAxis(double half_width, double step) : step_(step) {
        if (!(step > 0.0) || !(half_width > 0.0)) {
            throw ConfigError("grid axis needs positive half width and step");
        }
        n_half_ = static_cast<long>(std::llround(half_width / step));
        if (n_half_ < 1) throw ConfigError("grid axis has fewer than three nodes");
    }

    std::size_t size() const { return static_cast<std::size_t>(2 * n_half_ + 1); }
    std::size_t center() const { return static_cast<std::size_t>(n_half_); }
    double step() const { return step_; }
    double half_width() const { return static_cast<double>(n_half_) * step_; }

    double operator[](std::size_t i) const {
        return static_cast<double>(static_cast<long>(i) - n_half_) * step_;
    }
    /// Composite-trapezoid weight of node i.
    double trap_weight(std::size_t i) const {
        return (i == 0 || i + 1 == size()) ? step_ / 2.0 : step_;
    }

    bool operator==(const GridAxis&) const = default;

private:
    double step_;
    long n_half_;
};

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs fn(0..count-1) on up to `workers` threads. Tasks must write disjoint
/// state; scheduling order is unspecified, so any reduction over task results
/// must happen afterwards in index order.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
    workers = resolve_workers(workers);
    if (count == 0) return;
    if (workers <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min<std::size_t>(workers, count);
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace macrobell
