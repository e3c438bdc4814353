#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ekmonoid/core.hpp"
#include "ekmonoid/instances.hpp"

namespace ekmonoid {

/// Which elements to enumerate: all of M, the h-free or the h-full ones,
/// optionally avoiding some primes and requiring minimum exponents at others.
struct SubsetSpec {
    enum class Kind { All, HFree, HFull };

    Kind kind = Kind::All;
    std::uint32_t h = 1;
    std::vector<PrimeRef> avoided;
    std::vector<std::pair<PrimeRef, std::uint32_t>> floors;

    static SubsetSpec all() { return {}; }
    static SubsetSpec h_free(std::uint32_t h);
    /// h_full(1) is the whole monoid.
    static SubsetSpec h_full(std::uint32_t h);
    /// `all`, `hfree:<h>` or `hfull:<h>`.
    static SubsetSpec parse(std::string_view text);

    SubsetSpec avoiding(std::vector<PrimeRef> primes) const;
    SubsetSpec with_floor(const PrimeRef& p, std::uint32_t min_exponent) const;

    /// Throws InvalidArgument on out-of-range h, repeated avoided primes or
    /// primes that are both avoided and floored.
    void validate() const;

    std::uint32_t min_exponent() const { return kind == Kind::HFull ? h : 1; }
    std::uint32_t max_exponent() const { return kind == Kind::HFree ? h - 1 : UINT32_MAX; }
    bool is_plain() const { return avoided.empty() && floors.empty(); }

    bool contains(Terms f) const;
    /// Text form of the kind only (avoid/floor lists are not encoded).
    std::string to_string() const;
};

using ElementFn = std::function<void(const ElementView&)>;
using ShardElementFn = std::function<void(unsigned shard, const ElementView&)>;

/// Every element of the subset with norm <= x, exactly once, in canonical
/// order: ascending norm, ties broken by the term list.
void enumerate(const MonoidInstance& instance, std::uint64_t x, const SubsetSpec& spec,
               const ElementFn& fn);

/// Unordered traversal split into `shards` disjoint pieces processed on
/// `shards` threads. fn receives the shard index, so callers can keep one
/// accumulator per shard and merge them in shard order.
void scan(const MonoidInstance& instance, std::uint64_t x, const SubsetSpec& spec, unsigned shards,
          const ShardElementFn& fn);

/// |subset(x)|, using closed forms or Moebius sums where available.
std::uint64_t count(const MonoidInstance& instance, std::uint64_t x, const SubsetSpec& spec,
                    unsigned shards = 1);

/// Leading term of |subset(x)|: kappa x, kappa x / zeta_M(h), or
/// kappa gamma_h x^(1/h), times the local factors of avoided primes.
/// Floors are not supported.
Real main_term(const MonoidInstance& instance, std::uint64_t x, const SubsetSpec& spec);

struct CountReport {
    std::uint64_t count = 0;
    Real main_term = 0;
    Real relative_error = 0;
    /// Slope of log|count - main term| against log x over x, x/2, x/4, ...
    Real fitted_error_exponent = 0;
    std::string formula_id;
};

CountReport count_report(const MonoidInstance& instance, std::uint64_t x, const SubsetSpec& spec,
                         unsigned shards = 1);

struct RestrictedCount {
    std::uint64_t exact = 0;
    Real predicted = 0;
};

RestrictedCount count_restricted_h_free(const MonoidInstance& instance, std::uint64_t x, std::uint32_t h,
                                        const std::vector<PrimeRef>& avoided, unsigned shards = 1);
RestrictedCount count_restricted_h_full(const MonoidInstance& instance, std::uint64_t x, std::uint32_t h,
                                        const std::vector<PrimeRef>& avoided, unsigned shards = 1);

enum class PrimeCondition { AtLeastOne, Exactly };

/// Subset elements with n_p >= 1 (AtLeastOne) or n_p == k (Exactly).
std::uint64_t count_with_prime(const MonoidInstance& instance, std::uint64_t x, const SubsetSpec& spec,
                               const PrimeRef& p, PrimeCondition mode, std::uint32_t k = 1,
                               unsigned shards = 1);

/// Limiting proportion of subset elements m with n_p(f(m)) >= 1, where f is
/// the identity (project == 0) or m -> m_k (project == k).
/// Throws UnsupportedSubset when no closed form is known.
Real lambda_main_term(const SubsetSpec& spec, std::uint64_t norm, std::uint32_t project = 0);

struct LambdaDecomposition {
    Real lambda = 0;
    Real measured = 0;
    Real e = 0;
    std::uint64_t hits = 0;
    std::uint64_t total = 0;
};

LambdaDecomposition lambda_e_decomposition(const MonoidInstance& instance, std::uint64_t x,
                                           const SubsetSpec& spec, const PrimeRef& p,
                                           std::uint32_t project = 0, unsigned shards = 1);

}  // namespace ekmonoid
