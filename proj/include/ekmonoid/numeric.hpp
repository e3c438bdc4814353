#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ekmonoid {

/// Working precision for analytic quantities. On x86-64 this is the x87
/// 80-bit extended format: a 64-bit significand, ~19 significant digits.
using Real = long double;

/// Exact unbounded integer used for norms of factorizations.
using BigInt = boost::multiprecision::cpp_int;

inline constexpr int kAchievedDigits = std::numeric_limits<Real>::digits10;

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(Real v) : sum_(v) {}

    void add(Real v) {
        const Real t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(Real v) {
        add(v);
        return *this;
    }

    void merge(const CompensatedSum& other) {
        add(other.sum_);
        add(other.comp_);
    }

    Real value() const { return sum_ + comp_; }

private:
    Real sum_ = 0;
    Real comp_ = 0;
};

/// Deterministic pairwise-tree reduction of per-shard partial sums.
inline Real pairwise_reduce(std::vector<CompensatedSum> parts) {
    if (parts.empty()) return 0;
    while (parts.size() > 1) {
        std::vector<CompensatedSum> next;
        next.reserve((parts.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
            CompensatedSum s = parts[i];
            s.merge(parts[i + 1]);
            next.push_back(s);
        }
        if (parts.size() % 2 == 1) next.push_back(parts.back());
        parts = std::move(next);
    }
    return parts.front().value();
}

/// a*b if it does not exceed limit, otherwise nullopt.
inline std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b,
                                                std::uint64_t limit) {
    if (a != 0 && b > limit / a) return std::nullopt;
    const std::uint64_t p = a * b;
    if (p > limit) return std::nullopt;
    return p;
}

/// base^exp if it does not exceed limit, otherwise nullopt.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t base, unsigned exp,
                                                std::uint64_t limit) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < exp; ++i) {
        auto next = checked_mul(r, base, limit);
        if (!next) return std::nullopt;
        r = *next;
    }
    return r;
}

/// floor(x^(1/k)) for k >= 1.
std::uint64_t integer_root(std::uint64_t x, unsigned k);

/// log(log(v)) in working precision; v must exceed 1.
inline Real log_log(Real v) { return std::log(std::log(v)); }

/// Standard normal CDF.
inline Real normal_cdf(Real t) { return 0.5L * std::erfc(-t / std::sqrt(2.0L)); }

/// Ordinary least squares fit y = a + b*t; returns {a, b}.
struct LineFit {
    Real intercept = 0;
    Real slope = 0;
    Real max_abs_residual = 0;
};
LineFit fit_line(std::span<const Real> t, std::span<const Real> y);

}  // namespace ekmonoid
