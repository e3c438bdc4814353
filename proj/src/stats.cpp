#include "ekmonoid/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace ekmonoid {

Statistic Statistic::preset(std::string_view name, const SubsetSpec& spec, std::optional<std::uint32_t> k_norm) {
    const std::uint32_t subset_k = spec.kind == SubsetSpec::Kind::HFull ? spec.h : 1;
    if (name.rfind("omega_k:", 0) == 0) {
        const auto arg = name.substr(8);
        std::uint32_t k = 0;
        auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
        require(ec == std::errc{} && ptr == arg.data() + arg.size() && k >= 1, ErrorCode::InvalidArgument,
                "omega_k needs an integer k >= 1");
        return {WeightSequence::indicator(k), k_norm.value_or(k)};
    }
    const std::uint32_t k = k_norm.value_or(subset_k);
    require(k >= 1, ErrorCode::InvalidArgument, "normalizer index must be >= 1");
    if (name == "omega") return {WeightSequence::all_ones(k), k};
    if (name == "bigomega") return {WeightSequence::linear(k), k};
    if (name == "logd") return {WeightSequence::log_divisor(k), k};
    if (name == "omegaT") return {WeightSequence::alternating(k), k};
    fail(ErrorCode::InvalidArgument, "unknown statistic '" + std::string(name) + "'");
}

Real Statistic::normalizer() const {
    const Real a = weights[k_norm];
    require(a != 0, ErrorCode::InvalidNormalizer,
            "a_" + std::to_string(k_norm) + " = 0 cannot normalize " + weights.name());
    return a;
}

void check_theorem_pairing(const SubsetSpec& spec, const Statistic& stat) {
    const std::uint32_t k = spec.kind == SubsetSpec::Kind::HFull ? spec.h : 1;
    if (spec.kind == SubsetSpec::Kind::HFree) {
        require(stat.k_norm == 1, ErrorCode::TheoremPairing,
                stat.name() + " normalized by a_" + std::to_string(stat.k_norm) +
                    " is not covered over " + spec.to_string() + " (needs a_1)");
    } else {
        require(stat.k_norm == k, ErrorCode::TheoremPairing,
                stat.name() + " normalized by a_" + std::to_string(stat.k_norm) +
                    " is not covered over " + spec.to_string() + " (needs a_" + std::to_string(k) + ")");
    }
    require(stat.weights.growth().k >= stat.k_norm, ErrorCode::TheoremPairing,
            "growth certificate issued for k = " + std::to_string(stat.weights.growth().k) +
                " is too weak for normalizer index " + std::to_string(stat.k_norm));
}

Real standardized_score(Real g, std::uint64_t norm) {
    require(norm >= 3, ErrorCode::InvalidArgument, "scores need N(m) >= 3");
    const Real L = log_log(static_cast<Real>(norm));
    return (g - L) / std::sqrt(L);
}

ScoreSet standardized_scores(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec,
                             const Statistic& stat, unsigned shards) {
    const Real a = stat.normalizer();
    check_theorem_pairing(spec, stat);
    shards = std::max(1u, shards);
    struct Part {
        std::vector<double> scores;
        std::uint64_t small = 0;
        CompensatedSum sum, sum_sq;
    };
    std::vector<Part> parts(shards);
    scan(inst, x, spec, shards, [&](unsigned s, const ElementView& v) {
        Part& p = parts[s];
        if (v.norm < 3) {
            ++p.small;
            return;
        }
        const Real g = omega_weighted(v.terms, stat.weights) / a;
        p.scores.push_back(static_cast<double>(standardized_score(g, v.norm)));
        p.sum.add(g);
        p.sum_sq.add(g * g);
    });
    ScoreSet set;
    set.instance = inst.name();
    set.subset = spec.to_string();
    set.statistic = stat.name();
    set.k_norm = stat.k_norm;
    set.x = x;
    std::vector<CompensatedSum> sums, squares;
    std::size_t total = 0;
    for (const auto& p : parts) total += p.scores.size();
    set.scores.reserve(total);
    for (auto& p : parts) {
        set.scores.insert(set.scores.end(), p.scores.begin(), p.scores.end());
        set.excluded_small += p.small;
        sums.push_back(p.sum);
        squares.push_back(p.sum_sq);
    }
    if (total > 0) {
        const Real n = static_cast<Real>(total);
        set.raw_mean = pairwise_reduce(sums) / n;
        set.raw_variance = std::max<Real>(pairwise_reduce(squares) / n - set.raw_mean * set.raw_mean, 0);
    }
    return set;
}

Real ks_vs_gaussian(std::span<const double> scores) {
    require(!scores.empty(), ErrorCode::EmptySample, "KS distance needs at least one score");
    std::vector<double> s(scores.begin(), scores.end());
    std::sort(s.begin(), s.end());
    const Real n = static_cast<Real>(s.size());
    Real d = 0;
    for (std::size_t i = 0; i < s.size();) {
        std::size_t j = i;
        while (j < s.size() && s[j] == s[i]) ++j;
        const Real phi = normal_cdf(s[i]);
        d = std::max({d, std::fabs(Real(i) / n - phi), std::fabs(Real(j) / n - phi)});
        i = j;
    }
    return d;
}

Real gaussian_moment(int r) {
    if (r % 2 == 1) return 0;
    Real m = 1;
    for (int k = r - 1; k > 1; k -= 2) m *= k;
    return m;
}

std::vector<MomentRow> moment_report(std::span<const double> scores, int r_max) {
    require(r_max <= 8, ErrorCode::Unsupported, "moments beyond r = 8 are not reported");
    require(r_max >= 1, ErrorCode::InvalidArgument, "r_max must be >= 1");
    require(scores.size() >= 2, ErrorCode::EmptySample, "moments need at least two scores");
    std::vector<CompensatedSum> acc(static_cast<std::size_t>(r_max));
    for (double v : scores) {
        Real p = 1;
        for (int r = 1; r <= r_max; ++r) {
            p *= v;
            acc[r - 1].add(p);
        }
    }
    std::vector<MomentRow> rows;
    const Real n = static_cast<Real>(scores.size());
    for (int r = 1; r <= r_max; ++r) {
        MomentRow row{r, acc[r - 1].value() / n, gaussian_moment(r), 0};
        row.abs_diff = std::fabs(row.empirical - row.gaussian);
        rows.push_back(row);
    }
    return rows;
}

DistributionReport distribution_report(const ScoreSet& set, int r_max) {
    DistributionReport rep;
    rep.n_samples = set.scores.size();
    rep.excluded_small = set.excluded_small;
    rep.ks_distance = ks_vs_gaussian(set.scores);
    rep.moments = moment_report(set.scores, r_max);
    rep.raw_mean = set.raw_mean;
    rep.raw_variance = set.raw_variance;
    CompensatedSum s1, s2;
    for (double v : set.scores) {
        s1.add(v);
        s2.add(Real(v) * v);
    }
    const Real n = static_cast<Real>(set.scores.size());
    rep.score_mean = s1.value() / n;
    rep.score_variance = std::max<Real>(s2.value() / n - rep.score_mean * rep.score_mean, 0);
    const Real total = static_cast<Real>(set.subset_count());
    for (int a = -2; a <= 2; ++a) {
        const auto below = std::count_if(set.scores.begin(), set.scores.end(), [a](double v) { return v <= a; });
        rep.density.push_back({Real(a), static_cast<Real>(below) / total, normal_cdf(a)});
    }
    return rep;
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> scores, std::size_t max_points) {
    require(!scores.empty(), ErrorCode::EmptySample, "CDF needs at least one score");
    std::vector<double> s(scores.begin(), scores.end());
    std::sort(s.begin(), s.end());
    std::vector<CdfPoint> out;
    const std::size_t n = s.size();
    const std::size_t step = std::max<std::size_t>(1, n / std::max<std::size_t>(max_points, 1));
    for (std::size_t i = 0; i < n;) {
        // Jump to the last copy of this value so the CDF is right-continuous.
        const std::size_t last = std::upper_bound(s.begin() + i, s.end(), s[i]) - s.begin();
        out.push_back({s[i], double(last) / double(n), double(normal_cdf(s[i]))});
        i = std::max(last, i + step);
        if (i >= n && out.back().t != s.back()) i = n - 1;
    }
    return out;
}

MeanOmegaCheck mean_omega_check(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec, unsigned shards) {
    require(spec.is_plain() && spec.kind != SubsetSpec::Kind::All, ErrorCode::UnsupportedSubset,
            "mean omega check needs hfree:h or hfull:h");
    MeanOmegaCheck chk;
    shards = std::max(1u, shards);
    std::vector<std::uint64_t> sums(shards, 0), counts(shards, 0);
    scan(inst, x, spec, shards, [&](unsigned s, const ElementView& v) {
        sums[s] += v.terms.size();
        ++counts[s];
    });
    std::uint64_t sum = 0;
    for (unsigned s = 0; s < shards; ++s) {
        sum += sums[s];
        chk.count += counts[s];
    }
    chk.empirical_sum = static_cast<Real>(sum);

    const MonoidInstance wide = inst.widened(UINT64_MAX);
    const Real X = static_cast<Real>(inst.lattice().floor(x));
    const Real L = log_log(X);
    const Real kappa = inst.kappa();
    if (spec.kind == SubsetSpec::Kind::HFree) {
        chk.density_constant = zeta_M(wide, spec.h, 1e-8L, shards);
        chk.second_constant = c1_constant(wide, spec.h, 1e-8L, shards);
        const Real lead = kappa / chk.density_constant.value * X;
        chk.predicted = lead * L + lead * chk.second_constant.value;
        chk.formula_id = "kappa/zeta_M(h)*x*loglog(x) + kappa*c1/zeta_M(h)*x";
    } else {
        chk.density_constant = gamma_h(wide, spec.h, 1e-4L, shards);
        chk.second_constant = d1_constant(wide, spec.h, 1e-4L, shards);
        const Real lead = kappa * chk.density_constant.value * std::pow(X, 1.0L / spec.h);
        chk.predicted = lead * L + lead * chk.second_constant.value;
        chk.formula_id = "kappa*gamma_h*x^(1/h)*loglog(x) + kappa*gamma_h*D1*x^(1/h)";
    }
    chk.relative_gap = std::fabs(chk.empirical_sum - chk.predicted) / chk.predicted;
    return chk;
}

}  // namespace ekmonoid
