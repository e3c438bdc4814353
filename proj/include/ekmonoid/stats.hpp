#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ekmonoid/constants.hpp"
#include "ekmonoid/core.hpp"
#include "ekmonoid/instances.hpp"
#include "ekmonoid/sieve.hpp"

namespace ekmonoid {

/// omega_A(m) / a_k: the statistic being standardized.
struct Statistic {
    WeightSequence weights;
    std::uint32_t k_norm = 1;

    /// `omega`, `bigomega`, `logd`, `omegaT` or `omega_k:<k>`. k_norm defaults
    /// to k for omega_k:k, to h over hfull:h, and to 1 otherwise.
    static Statistic preset(std::string_view name, const SubsetSpec& spec,
                            std::optional<std::uint32_t> k_norm = std::nullopt);

    std::string name() const { return weights.name(); }
    /// a_{k_norm}; throws InvalidNormalizer when it is zero.
    Real normalizer() const;
    Real value(Terms f) const { return omega_weighted(f, weights) / normalizer(); }
};

/// Refuses statistic/subset combinations outside the proven pairings:
/// over hfull:k (and all = hfull:1) the normalizer index must be k, over
/// hfree:h it must be 1, and the growth certificate must be issued for an
/// index of at least k. Throws TheoremPairing.
void check_theorem_pairing(const SubsetSpec& spec, const Statistic& stat);

/// (g - log log N) / sqrt(log log N); N must be >= 3.
Real standardized_score(Real g, std::uint64_t norm);

struct ScoreSet {
    std::string instance;
    std::string subset;
    std::string statistic;
    std::uint32_t k_norm = 1;
    std::uint64_t x = 0;
    std::vector<double> scores;
    /// Elements of norm 1 or 2 (no score).
    std::uint64_t excluded_small = 0;
    /// Mean and variance of the raw statistic over scored elements.
    Real raw_mean = 0;
    Real raw_variance = 0;

    std::uint64_t subset_count() const { return scores.size() + excluded_small; }
};

/// Scores of every subset element with norm >= 3, in shard-then-traversal
/// order (sorted by the distribution functions as needed).
ScoreSet standardized_scores(const MonoidInstance& instance, std::uint64_t x, const SubsetSpec& spec,
                             const Statistic& stat, unsigned shards = 1);

/// sup |F_n(t) - Phi(t)| evaluated on both sides of every jump.
Real ks_vs_gaussian(std::span<const double> scores);

/// 0 for odd r, (r - 1)!! for even r.
Real gaussian_moment(int r);

struct MomentRow {
    int r = 0;
    Real empirical = 0;
    Real gaussian = 0;
    Real abs_diff = 0;
};

/// Raw moments of the scores for r = 1..r_max (r_max <= 8).
std::vector<MomentRow> moment_report(std::span<const double> scores, int r_max);

struct DensityPoint {
    Real a = 0;
    Real density = 0;  // |{m : N(m) >= 3, score <= a}| / |S(x)|
    Real phi = 0;
};

struct DistributionReport {
    Real ks_distance = 0;
    std::uint64_t n_samples = 0;
    std::uint64_t excluded_small = 0;
    std::vector<MomentRow> moments;
    Real raw_mean = 0;
    Real raw_variance = 0;
    Real score_mean = 0;
    Real score_variance = 0;
    std::vector<DensityPoint> density;
};

DistributionReport distribution_report(const ScoreSet& set, int r_max);

struct CdfPoint {
    double t = 0;
    double empirical = 0;
    double phi = 0;
};

/// Empirical CDF at up to max_points sample quantiles (every distinct
/// value when there are fewer).
std::vector<CdfPoint> empirical_cdf(std::span<const double> scores, std::size_t max_points = 2000);

struct MeanOmegaCheck {
    Real empirical_sum = 0;
    Real predicted = 0;
    Real relative_gap = 0;
    std::uint64_t count = 0;
    /// zeta_M(h) or gamma_h, and c1 or D1, as used in the prediction.
    ConstantResult density_constant;
    ConstantResult second_constant;
    std::string formula_id;
};

/// sum of omega over hfree:h or hfull:h up to x against the two-term
/// main terms.
MeanOmegaCheck mean_omega_check(const MonoidInstance& instance, std::uint64_t x, const SubsetSpec& spec,
                                unsigned shards = 1);

}  // namespace ekmonoid
