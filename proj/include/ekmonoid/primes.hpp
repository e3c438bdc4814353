#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ekmonoid/numeric.hpp"

namespace ekmonoid {

/// Primes <= limit by a plain sieve of Eratosthenes.
inline std::vector<std::uint32_t> small_primes(std::uint32_t limit) {
    std::vector<std::uint32_t> out;
    if (limit < 2) return out;
    std::vector<bool> composite(limit + 1, false);
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        out.push_back(static_cast<std::uint32_t>(i));
        for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
    }
    return out;
}

/// Calls fn(p) for every prime p in [lo, hi] in increasing order.
/// Odd-only segmented sieve; memory is O(sqrt(hi)).
template <class Fn>
void for_each_prime(std::uint64_t lo, std::uint64_t hi, Fn&& fn) {
    if (hi < 2 || lo > hi) return;
    lo = std::max<std::uint64_t>(lo, 2);
    if (lo == 2) {
        fn(std::uint64_t{2});
        lo = 3;
    }
    if (lo > hi) return;
    if (lo % 2 == 0) ++lo;
    const auto root = static_cast<std::uint32_t>(integer_root(hi, 2));
    const auto base = small_primes(root);

    constexpr std::uint64_t kSpan = std::uint64_t{1} << 19;  // odd slots per segment
    std::vector<std::uint8_t> sieve(kSpan);
    for (std::uint64_t seg = lo; seg <= hi;) {
        // Segment covers odd numbers seg, seg+2, ..., seg + 2*(len-1).
        const std::uint64_t len = std::min<std::uint64_t>(kSpan, (hi - seg) / 2 + 1);
        std::fill(sieve.begin(), sieve.begin() + static_cast<std::ptrdiff_t>(len), 1);
        const std::uint64_t last = seg + 2 * (len - 1);
        for (std::size_t i = 1; i < base.size(); ++i) {
            const std::uint64_t p = base[i];
            if (p * p > last) break;
            std::uint64_t start = std::max(p * p, (seg + p - 1) / p * p);
            if (start % 2 == 0) start += p;
            for (std::uint64_t m = (start - seg) / 2; m < len; m += p) sieve[m] = 0;
        }
        for (std::uint64_t i = 0; i < len; ++i)
            if (sieve[i]) fn(seg + 2 * i);
        if (last >= hi) break;
        seg = last + 2;
    }
}

/// Moebius function values mu(0..limit); mu(0) is unused.
inline std::vector<std::int8_t> moebius_table(std::uint32_t limit) {
    std::vector<std::int8_t> mu(limit + 1, 1);
    std::vector<bool> composite(limit + 1, false);
    mu[0] = 0;
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        for (std::uint64_t j = i; j <= limit; j += i) {
            if (j > i) composite[j] = true;
            mu[j] = static_cast<std::int8_t>(-mu[j]);
        }
        for (std::uint64_t sq = i * i, j = sq; j <= limit; j += sq) mu[j] = 0;
    }
    return mu;
}

}  // namespace ekmonoid
