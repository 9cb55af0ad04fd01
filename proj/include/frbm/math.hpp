#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "frbm/errors.hpp"

namespace frbm {

/// log(1 + e^x) evaluated without overflow for any finite x.
/// Monotone, non-negative, and softplus(x) - softplus(-x) == x holds to
/// rounding. Non-finite input is rejected.
inline double softplus(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("softplus: non-finite input");
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// Logistic function 1 / (1 + e^-x); never over- or underflows to NaN.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

/// Inverse of sigmoid on (0, 1).
inline double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("logit: p must be in (0, 1)");
    return std::log(p) - std::log1p(-p);
}

/// Streaming log-sum-exp accumulator: tracks the running maximum and the sum
/// of exponentials rescaled to it, so no intermediate ever overflows.
/// Disjoint accumulators combine exactly like one pass over the union.
class LogSumExp {
public:
    void add(double x) {
        if (empty_) {
            max_ = x;
            sum_ = 1.0;
            empty_ = false;
        } else if (x <= max_) {
            sum_ += std::exp(x - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - x) + 1.0;
            max_ = x;
        }
        ++count_;
    }

    void merge(const LogSumExp& other) {
        if (other.empty_) return;
        if (empty_) {
            *this = other;
            return;
        }
        if (other.max_ <= max_) {
            sum_ += other.sum_ * std::exp(other.max_ - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
            max_ = other.max_;
        }
        count_ += other.count_;
    }

    double value() const {
        if (empty_) return -std::numeric_limits<double>::infinity();
        return max_ + std::log(sum_);
    }

    std::uint64_t count() const { return count_; }
    bool empty() const { return empty_; }

private:
    bool empty_ = true;
    double max_ = 0.0;
    double sum_ = 0.0;
    std::uint64_t count_ = 0;
};

/// log((1/n) sum_i e^{x_i}) over a non-empty range.
inline double log_mean_exp(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("log_mean_exp: empty input");
    LogSumExp acc;
    for (double x : xs) acc.add(x);
    return acc.value() - std::log(static_cast<double>(xs.size()));
}

}  // namespace frbm
