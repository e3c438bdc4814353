#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ekmonoid/instances.hpp"
#include "ekmonoid/sieve.hpp"

namespace ekmonoid {

/// floor(x^(beta / log log x)), at least 2. Needs x >= 16, 0 < beta <= 1.
std::uint64_t default_y(std::uint64_t x, Real beta);

/// Independent Bernoulli variables X_l with P(X_l = 1) = lambda_l, one per
/// prime of norm <= y.
struct BernoulliSystem {
    std::vector<PrimeRef> primes;
    std::vector<Real> lambdas;
    std::uint64_t y = 0;
    std::uint64_t x = 0;
    Real beta = 1;

    Real mean() const;
    Real variance() const;
};

/// lambda_l from the closed forms for every prime of norm <= y.
BernoulliSystem bernoulli_system(const MonoidInstance& instance, std::uint64_t x, const SubsetSpec& spec,
                                 std::uint64_t y, Real beta, std::uint32_t project = 0);

/// Exact pmf of sum X_l by sequential convolution, probabilities taken in
/// decreasing order.
std::vector<Real> exact_bernoulli_distribution(std::span<const Real> lambdas);

struct ModelMomentRow {
    int r = 0;
    Real empirical = 0;  // of (omega_y - E S_y) / sqrt(Var S_y) over the subset
    Real model = 0;      // of (S_y - E S_y) / sqrt(Var S_y)
    Real abs_diff = 0;
};

/// Normalized model moments of S_y for r = 1..r_max (from cumulants).
std::vector<Real> model_moments(std::span<const Real> lambdas, int r_max);

std::vector<ModelMomentRow> model_vs_truncated(const MonoidInstance& instance, std::uint64_t x,
                                               const SubsetSpec& spec, std::uint64_t y, int r_max,
                                               std::uint32_t project = 0, unsigned shards = 1);

struct ConditionRow {
    std::string name;
    Real value_at_sqrt_x = 0;
    Real value_at_x = 0;
    Real normalizer_at_sqrt_x = 0;
    Real normalizer = 0;
    Real ratio_at_sqrt_x = 0;
    Real ratio_at_x = 0;
    bool pass = false;
};

struct ConditionReport {
    std::uint64_t x = 0;
    std::uint64_t sqrt_x = 0;
    std::uint64_t y_at_x = 0;
    std::uint64_t y_at_sqrt_x = 0;
    Real beta = 1;
    std::vector<ConditionRow> rows;
    std::string note;
};

/// Conditions (b)-(e), and (f) for r = 2 with u in {1, 2}, evaluated at x
/// and at sqrt(x); a condition passes when sum / normalizer decreases from
/// sqrt(x) to x. When y is 0, default_y is used at both points.
ConditionReport condition_check(const MonoidInstance& instance, std::uint64_t x, const SubsetSpec& spec, Real beta,
                                std::uint64_t y = 0, std::uint32_t project = 0, bool include_f = true,
                                unsigned shards = 1);

struct ConditionAAudit {
    std::uint64_t sampled = 0;
    std::uint32_t max_large_primes = 0;
    std::uint32_t bound = 0;  // ceil(1 / beta)
    bool pass = false;
};

/// Largest number of primes of norm > x^beta dividing f(m), over a seeded
/// uniform sample of subset elements.
ConditionAAudit condition_a_audit(const MonoidInstance& instance, std::uint64_t x, const SubsetSpec& spec,
                                  Real beta, std::uint64_t sample, std::uint64_t seed = 1,
                                  std::uint32_t project = 0);

/// The beta used by the proofs: 1 for hfree and all, 1/h for hfull:h.
Real theorem_beta(const SubsetSpec& spec);

}  // namespace ekmonoid
