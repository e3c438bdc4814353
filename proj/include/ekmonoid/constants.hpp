#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ekmonoid/instances.hpp"

namespace ekmonoid {

enum class TailKind { Rigorous, Heuristic };

std::string_view tail_kind_name(TailKind kind);

/// A truncated Euler product or prime sum together with a bound on what the
/// truncation left out. RIGOROUS bounds rest on explicit prime counting
/// estimates plus a floating-point allowance; HEURISTIC bounds come from
/// extrapolation.
struct ConstantResult {
    Real value = 0;
    std::uint64_t truncation_norm = 0;
    Real tail_bound = 0;
    TailKind tail_kind = TailKind::Rigorous;
    /// False when the truncation cap stopped the search before the requested
    /// tail was reached; tail_bound is then the bound actually achieved.
    bool target_met = true;
    unsigned shards = 1;
};

/// prod_p (1 - N(p)^-s)^-1 for s > 1.
ConstantResult zeta_M(const MonoidInstance& instance, Real s, Real target_tail, unsigned shards = 1);

/// prod_p (1 + (N - N^(1/h)) / (N^2 (N^(1/h) - 1))), the h-full density constant.
ConstantResult gamma_h(const MonoidInstance& instance, std::uint32_t h, Real target_tail,
                       unsigned shards = 1);

/// Default ladder for mertens_A: 10^5..10^8 (capped by the instance limit),
/// or q^16..q^48 in steps of 8 for the function-field instances.
std::vector<std::uint64_t> default_mertens_ladder(const MonoidInstance& instance);

/// Limit of sum_{N(p) <= x} 1/N(p) - log log x, extrapolated by fitting
/// a + b / log x on the ladder.
ConstantResult mertens_A(const MonoidInstance& instance, const std::vector<std::uint64_t>& ladder);

/// A - sum_p (N - 1) / (N (N^h - 1)).
ConstantResult c1_constant(const MonoidInstance& instance, std::uint32_t h, Real target_tail,
                           unsigned shards = 1);

/// sum_p N^-(r/h - 1) / (N - N^(1 - 1/h) + 1) for r > h.
ConstantResult L_h_r(const MonoidInstance& instance, std::uint32_t h, std::uint32_t r, Real target_tail,
                     unsigned shards = 1);

/// A - log h + L_h(h + 1) - L_h(2h).
ConstantResult d1_constant(const MonoidInstance& instance, std::uint32_t h, Real target_tail,
                           unsigned shards = 1);

/// Sum over primes in [lo, hi] of count(N) * term(N), compensated and reduced
/// over `shards` contiguous norm ranges in a fixed pairwise order.
Real prime_norm_sum(const MonoidInstance& instance, std::uint64_t lo, std::uint64_t hi,
                    const std::function<Real(std::uint64_t)>& term, unsigned shards = 1);

struct PrimeSumReport {
    Real alpha = 0;
    std::uint64_t x = 0;
    /// 1: alpha < 1 growth; 2/3: alpha > 1 tail and full sum; 4: alpha = 1.
    int part = 0;
    /// sum_{N(p) <= x} N(p)^-alpha
    Real partial_sum = 0;
    /// x^(1-alpha) / log x (parts 1-3) or log log x (part 4).
    Real bound_expression = 0;
    /// partial_sum / bound_expression (part 1), tail / bound_expression
    /// (part 2), partial_sum - log log x (part 4).
    Real ratio = 0;
    /// alpha > 1: estimate of sum_{N(p) > x} N(p)^-alpha.
    Real tail = 0;
    /// alpha > 1: partial_sum + tail.
    Real completed_sum = 0;
    /// Where the direct summation for the tail stopped before the analytic
    /// completion takes over.
    std::uint64_t summed_to = 0;
};

PrimeSumReport prime_sum_report(const MonoidInstance& instance, Real alpha, std::uint64_t x,
                                unsigned shards = 1);

}  // namespace ekmonoid
