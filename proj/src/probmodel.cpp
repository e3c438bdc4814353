#include "ekmonoid/probmodel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ekmonoid/parallel.hpp"

namespace ekmonoid {

namespace {

// floor(x^beta), exact when 1/beta is an integer.
std::uint64_t power_floor(std::uint64_t x, Real beta) {
    if (beta >= 1) return x;
    const Real inv = 1 / beta;
    const Real k = std::round(inv);
    if (std::fabs(inv - k) < 1e-12L) return integer_root(x, static_cast<unsigned>(k));
    return static_cast<std::uint64_t>(std::floor(std::pow(static_cast<Real>(x), beta)));
}

bool hits(const Term& t, std::uint32_t project) { return project == 0 || t.exponent == project; }

void check_beta(Real beta) {
    require(beta > 0 && beta <= 1, ErrorCode::InvalidArgument, "beta must lie in (0, 1]");
}

}  // namespace

std::uint64_t default_y(std::uint64_t x, Real beta) {
    require(x >= 16, ErrorCode::InvalidArgument, "default_y needs x >= 16");
    check_beta(beta);
    const Real X = static_cast<Real>(x);
    const auto y = static_cast<std::uint64_t>(std::floor(std::pow(X, beta / log_log(X))));
    return std::max<std::uint64_t>(y, 2);
}

Real BernoulliSystem::mean() const {
    CompensatedSum s;
    for (Real l : lambdas) s.add(l);
    return s.value();
}

Real BernoulliSystem::variance() const {
    CompensatedSum s;
    for (Real l : lambdas) s.add(l * (1 - l));
    return s.value();
}

BernoulliSystem bernoulli_system(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec,
                                 std::uint64_t y, Real beta, std::uint32_t project) {
    check_beta(beta);
    require(y >= 2, ErrorCode::InvalidArgument, "y must be >= 2");
    require(static_cast<Real>(y) < std::pow(static_cast<Real>(x), beta), ErrorCode::InvalidArgument,
            "y must be below x^beta");
    BernoulliSystem sys;
    sys.y = y;
    sys.x = x;
    sys.beta = beta;
    sys.primes = inst.primes(2, y);
    for (const auto& p : sys.primes) sys.lambdas.push_back(lambda_main_term(spec, p.norm, project));
    return sys;
}

std::vector<Real> exact_bernoulli_distribution(std::span<const Real> lambdas) {
    require(lambdas.size() <= 1'000'000, ErrorCode::InvalidArgument, "at most 10^6 Bernoulli entries");
    std::vector<Real> order(lambdas.begin(), lambdas.end());
    for (Real l : order) require(l >= 0 && l <= 1, ErrorCode::InvalidArgument, "lambda outside [0, 1]");
    std::sort(order.begin(), order.end(), std::greater<>());
    std::vector<Real> pmf{1};
    pmf.reserve(order.size() + 1);
    for (Real l : order) {
        pmf.push_back(0);
        for (std::size_t k = pmf.size() - 1; k > 0; --k) pmf[k] = pmf[k] * (1 - l) + pmf[k - 1] * l;
        pmf[0] *= 1 - l;
    }
    return pmf;
}

std::vector<Real> model_moments(std::span<const Real> lambdas, int r_max) {
    require(r_max >= 1 && r_max <= 4, ErrorCode::Unsupported, "model moments are provided for r <= 4");
    CompensatedSum k2, k3, k4;
    for (Real p : lambdas) {
        const Real v = p * (1 - p);
        k2.add(v);
        k3.add(v * (1 - 2 * p));
        k4.add(v * (1 - 6 * v));
    }
    const Real V = k2.value();
    require(V > 0, ErrorCode::NumericFailure, "degenerate Bernoulli system (zero variance)");
    std::vector<Real> m{0, 1, k3.value() / std::pow(V, 1.5L), k4.value() / (V * V) + 3};
    m.resize(static_cast<std::size_t>(r_max));
    return m;
}

std::vector<ModelMomentRow> model_vs_truncated(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec,
                                               std::uint64_t y, int r_max, std::uint32_t project, unsigned shards) {
    const BernoulliSystem sys = bernoulli_system(inst, x, spec, y, 1, project);
    const auto model = model_moments(sys.lambdas, r_max);
    const Real E = sys.mean();
    const Real sd = std::sqrt(sys.variance());
    shards = std::max(1u, shards);
    std::vector<std::vector<CompensatedSum>> acc(shards, std::vector<CompensatedSum>(r_max));
    std::vector<std::uint64_t> counts(shards, 0);
    scan(inst, x, spec, shards, [&](unsigned s, const ElementView& v) {
        std::uint32_t wy = 0;
        for (const auto& t : v.terms)
            if (t.prime.norm <= y && hits(t, project)) ++wy;
        const Real z = (static_cast<Real>(wy) - E) / sd;
        Real p = 1;
        for (int r = 0; r < r_max; ++r) {
            p *= z;
            acc[s][r].add(p);
        }
        ++counts[s];
    });
    std::uint64_t n = 0;
    for (auto c : counts) n += c;
    std::vector<ModelMomentRow> rows;
    for (int r = 0; r < r_max; ++r) {
        std::vector<CompensatedSum> parts;
        for (unsigned s = 0; s < shards; ++s) parts.push_back(acc[s][r]);
        ModelMomentRow row{r + 1, pairwise_reduce(parts) / static_cast<Real>(n), model[r], 0};
        row.abs_diff = std::fabs(row.empirical - row.model);
        rows.push_back(row);
    }
    return rows;
}

Real theorem_beta(const SubsetSpec& spec) {
    return spec.kind == SubsetSpec::Kind::HFull ? 1.0L / spec.h : 1.0L;
}

namespace {

struct PointSums {
    Real b = 0, c = 0, d = 0, e = 0, f1 = 0, f2 = 0;
    Real loglog = 0;
};

constexpr std::uint64_t kPairCap = 1000;

PointSums condition_sums(const MonoidInstance& inst, std::uint64_t X, const SubsetSpec& spec, Real beta,
                         std::uint64_t y, std::uint32_t project, bool include_f, unsigned shards) {
    PointSums out;
    out.loglog = log_log(static_cast<Real>(X));
    const std::uint64_t top = power_floor(X, beta);
    const auto primes = inst.primes(2, std::max(top, y));
    const std::uint64_t ypair = std::min(y, kPairCap);
    const std::size_t n_pair =
        std::upper_bound(primes.begin(), primes.end(), ypair, [](std::uint64_t v, const PrimeRef& p) {
            return v < p.norm;
        }) - primes.begin();

    // Per-prime (and small-pair) hit counts over the subset.
    shards = std::max(1u, shards);
    std::vector<std::vector<std::uint64_t>> single(shards, std::vector<std::uint64_t>(primes.size(), 0));
    std::vector<std::vector<std::uint64_t>> pair(shards);
    if (include_f)
        for (auto& p : pair) p.assign(n_pair * n_pair, 0);
    std::vector<std::uint64_t> totals(shards, 0);
    scan(inst, X, spec, shards, [&](unsigned s, const ElementView& v) {
        ++totals[s];
        std::size_t small[64];
        std::size_t n_small = 0;
        for (const auto& t : v.terms) {
            if (t.prime.norm > primes.back().norm || !hits(t, project)) continue;
            const auto idx = std::lower_bound(primes.begin(), primes.end(), t.prime) - primes.begin();
            ++single[s][idx];
            if (include_f && static_cast<std::size_t>(idx) < n_pair && n_small < 64) small[n_small++] = idx;
        }
        for (std::size_t i = 0; i < n_small; ++i)
            for (std::size_t j = i + 1; j < n_small; ++j) ++pair[s][small[i] * n_pair + small[j]];
    });
    std::uint64_t total = 0;
    for (auto t : totals) total += t;
    const Real S = static_cast<Real>(total);

    std::vector<Real> lambda(primes.size()), e(primes.size());
    for (std::size_t i = 0; i < primes.size(); ++i) {
        std::uint64_t h = 0;
        for (unsigned s = 0; s < shards; ++s) h += single[s][i];
        lambda[i] = lambda_main_term(spec, primes[i].norm, project);
        e[i] = static_cast<Real>(h) / S - lambda[i];
    }
    CompensatedSum b, c, d, sq, f1, f2;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        const std::uint64_t N = primes[i].norm;
        if (N > y && N <= top) {
            b.add(lambda[i]);
            c.add(std::fabs(e[i]));
        }
        if (N <= y) {
            d.add(lambda[i]);
            sq.add(lambda[i] * lambda[i]);
            f1.add(std::fabs(e[i]));
        }
    }
    if (include_f) {
        for (std::size_t i = 0; i < n_pair; ++i)
            for (std::size_t j = i + 1; j < n_pair; ++j) {
                std::uint64_t h = 0;
                for (unsigned s = 0; s < shards; ++s) h += pair[s][i * n_pair + j];
                // Ordered tuples: both (i, j) and (j, i).
                f2.add(2 * std::fabs(static_cast<Real>(h) / S - lambda[i] * lambda[j]));
            }
    }
    out.b = b.value();
    out.c = c.value();
    out.d = std::fabs(d.value() - out.loglog);
    out.e = sq.value();
    out.f1 = f1.value();
    out.f2 = f2.value();
    return out;
}

}  // namespace

ConditionReport condition_check(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec, Real beta,
                                std::uint64_t y, std::uint32_t project, bool include_f, unsigned shards) {
    check_beta(beta);
    const std::uint64_t xs = integer_root(x, 2);
    require(xs >= 16, ErrorCode::InvalidArgument, "condition_check needs x >= 256");
    ConditionReport rep;
    rep.x = x;
    rep.sqrt_x = xs;
    rep.beta = beta;
    rep.y_at_x = y ? y : default_y(x, beta);
    rep.y_at_sqrt_x = default_y(xs, beta);
    // Validates lambda availability for this subset before any scanning.
    (void)lambda_main_term(spec, 2, project);

    const PointSums lo = condition_sums(inst, xs, spec, beta, rep.y_at_sqrt_x, project, include_f, shards);
    const PointSums hi = condition_sums(inst, x, spec, beta, rep.y_at_x, project, include_f, shards);

    auto row = [&](std::string name, Real vlo, Real vhi, Real nlo, Real nhi) {
        ConditionRow r{std::move(name), vlo, vhi, nlo, nhi, vlo / nlo, vhi / nhi, false};
        r.pass = r.ratio_at_x < r.ratio_at_sqrt_x;
        rep.rows.push_back(r);
    };
    const Real half_lo = std::sqrt(lo.loglog), half_hi = std::sqrt(hi.loglog);
    row("(b)", lo.b, hi.b, half_lo, half_hi);
    row("(c)", lo.c, hi.c, half_lo, half_hi);
    row("(d)", lo.d, hi.d, half_lo, half_hi);
    row("(e)", lo.e, hi.e, half_lo, half_hi);
    if (include_f) {
        // r = 2: normalizer (log log x)^-1.
        row("(f) u=1", lo.f1, hi.f1, 1 / lo.loglog, 1 / hi.loglog);
        row("(f) u=2", lo.f2, hi.f2, 1 / lo.loglog, 1 / hi.loglog);
    }
    rep.note =
        "finite-x diagnostic: a condition passes when sum/normalizer decreases from sqrt(x) to x; "
        "(f) covers r = 2, u <= 2, with pairs restricted to norms <= min(y, 1000)";
    return rep;
}

ConditionAAudit condition_a_audit(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec, Real beta,
                                  std::uint64_t sample, std::uint64_t seed, std::uint32_t project) {
    check_beta(beta);
    require(sample >= 1, ErrorCode::InvalidArgument, "sample must be >= 1");
    const std::uint64_t top = power_floor(x, beta);
    ConditionAAudit audit;
    audit.bound = static_cast<std::uint32_t>(std::ceil(1 / beta - 1e-12L));

    // Reservoir sample over the canonical enumeration order.
    std::mt19937_64 rng(seed);
    std::vector<std::uint32_t> reservoir;
    reservoir.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(sample, 1u << 24)));
    std::uint64_t seen = 0;
    enumerate(inst, x, spec, [&](const ElementView& v) {
        std::uint32_t large = 0;
        for (const auto& t : v.terms)
            if (t.prime.norm > top && hits(t, project)) ++large;
        if (seen < sample) {
            reservoir.push_back(large);
        } else {
            std::uniform_int_distribution<std::uint64_t> pick(0, seen);
            const std::uint64_t j = pick(rng);
            if (j < sample) reservoir[j] = large;
        }
        ++seen;
    });
    audit.sampled = reservoir.size();
    for (auto c : reservoir) audit.max_large_primes = std::max(audit.max_large_primes, c);
    audit.pass = audit.max_large_primes <= audit.bound;
    return audit;
}

}  // namespace ekmonoid
