#include "ekmonoid/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/expint.hpp>

#include "ekmonoid/parallel.hpp"
#include "ekmonoid/primes.hpp"

namespace ekmonoid {

namespace {

constexpr Real kEps = std::numeric_limits<Real>::epsilon();
constexpr std::uint64_t kIntegerCap = 1'000'000'000;

bool on_power_lattice(const MonoidInstance& inst) { return inst.lattice().is_powers(); }

std::uint64_t truncation_cap(const MonoidInstance& inst) {
    switch (inst.kind()) {
        case InstanceKind::Integers:
        case InstanceKind::Gaussian: return std::min(kIntegerCap, inst.limit());
        default: return inst.limit();
    }
}

struct Truncation {
    std::uint64_t T = 0;
    bool met = true;
};

// Smallest admissible T (up to the cap) with bound(T) <= target; bound must
// be nonincreasing in T.
template <class Bound>
Truncation choose_truncation(const MonoidInstance& inst, Bound&& bound, Real target) {
    const std::uint64_t cap = truncation_cap(inst);
    if (on_power_lattice(inst)) {
        const std::uint64_t q = inst.q();
        std::uint64_t T = q;
        while (bound(T) > target) {
            if (T > cap / q) return {T, false};
            T *= q;
        }
        return {T, true};
    }
    std::uint64_t hi = std::min<std::uint64_t>(16, cap);
    while (bound(hi) > target) {
        if (hi >= cap) return {cap, false};
        hi = std::min(cap, hi * 2);
    }
    std::uint64_t lo = std::max<std::uint64_t>(hi / 2, 2);
    if (bound(lo) <= target) return {lo, true};
    // Bisect to within 1% of the threshold.
    while (hi - lo > std::max<std::uint64_t>(lo / 100, 1)) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        (bound(mid) <= target ? hi : lo) = mid;
    }
    return {hi, true};
}

struct Product {
    Real value = 0;
    Truncation trunc;
    Real tail = 0;
};

// exp(sum_p log_factor(N)) with log-tail bound L(T); the reported tail is
// value * (e^L - 1) plus a rounding allowance proportional to value * e^L.
Product euler_product(const MonoidInstance& inst, const std::function<Real(std::uint64_t)>& log_factor,
                      const std::function<Real(std::uint64_t)>& log_tail, Real target, unsigned shards) {
    const std::uint64_t T0 = std::min<std::uint64_t>(truncation_cap(inst), 1000);
    const Real upper0 = std::exp(prime_norm_sum(inst, 2, T0, log_factor, 1) + log_tail(T0));
    const Truncation trunc =
        choose_truncation(inst, [&](std::uint64_t T) { return upper0 * std::expm1(log_tail(T)); }, target);
    Product p;
    p.trunc = trunc;
    p.value = std::exp(prime_norm_sum(inst, 2, trunc.T, log_factor, shards));
    const Real L = log_tail(trunc.T);
    p.tail = p.value * std::expm1(L) + 64 * kEps * p.value * std::exp(L);
    p.trunc.met = p.tail <= target;
    return p;
}

TailKind kind_of(const MonoidInstance& inst, Real alpha, std::uint64_t T) {
    return inst.prime_tail(alpha, T).rigorous ? TailKind::Rigorous : TailKind::Heuristic;
}

// Number of monic irreducibles of degree d as a real (no overflow).
Real irreducible_count_real(Real q, unsigned d) {
    Real total = 0;
    const auto mu = moebius_table(d);
    for (unsigned e = 1; e <= d; ++e)
        if (d % e == 0 && mu[e] != 0) total += mu[e] * std::pow(q, Real(d / e));
    return total / d;
}

}  // namespace

std::string_view tail_kind_name(TailKind kind) {
    return kind == TailKind::Rigorous ? "RIGOROUS" : "HEURISTIC";
}

Real prime_norm_sum(const MonoidInstance& inst, std::uint64_t lo, std::uint64_t hi,
                    const std::function<Real(std::uint64_t)>& term, unsigned shards) {
    if (lo > hi) return 0;
    shards = std::max(1u, shards);
    std::vector<CompensatedSum> parts(shards);
    const std::uint64_t width = (hi - lo) / shards + 1;
    parallel_for(shards, shards, [&](std::size_t s) {
        const std::uint64_t a = lo + s * width;
        if (a > hi || a < lo) return;
        const std::uint64_t b = (s + 1 == shards || hi - a < width) ? hi : a + width - 1;
        CompensatedSum acc;
        inst.for_each_norm_class(a, b, [&](std::uint64_t norm, std::uint64_t count) {
            acc.add(static_cast<Real>(count) * term(norm));
        });
        parts[s] = acc;
    });
    return pairwise_reduce(std::move(parts));
}

ConstantResult zeta_M(const MonoidInstance& inst, Real s, Real target_tail, unsigned shards) {
    require(s > 1, ErrorCode::DivergentInput, "zeta_M needs s > 1");
    require(target_tail > 0, ErrorCode::InvalidArgument, "target tail must be positive");
    auto log_factor = [s](std::uint64_t N) { return -std::log1p(-std::pow(Real(N), -s)); };
    auto log_tail = [&](std::uint64_t T) {
        // -log(1 - u) <= u / (1 - u) with u <= T^-s.
        return inst.prime_tail(s, T).bound / (1 - std::pow(Real(T), -s));
    };
    const Product p = euler_product(inst, log_factor, log_tail, target_tail, shards);
    return {p.value, p.trunc.T, p.tail, kind_of(inst, s, p.trunc.T), p.trunc.met, shards};
}

ConstantResult gamma_h(const MonoidInstance& inst, std::uint32_t h, Real target_tail, unsigned shards) {
    require(h >= 2, ErrorCode::InvalidArgument, "gamma_h needs h >= 2");
    require(target_tail > 0, ErrorCode::InvalidArgument, "target tail must be positive");
    const Real inv_h = 1.0L / h;
    auto log_factor = [inv_h](std::uint64_t n) {
        const Real N = static_cast<Real>(n);
        const Real root = std::pow(N, inv_h);
        // (N - N^(1/h)) / (N^2 (N^(1/h) - 1)) = N^(1/h - 2) (N^(1-1/h) - 1) / (N^(1/h) - 1)
        return std::log1p((N - root) / (N * N * (root - 1)));
    };
    auto log_tail = [&](std::uint64_t T) {
        // factor - 1 <= N^(-1-1/h) / (1 - N^(-1/h)) and log(1 + u) <= u.
        return inst.prime_tail(1 + inv_h, T).bound / (1 - std::pow(Real(T), -inv_h));
    };
    const Product p = euler_product(inst, log_factor, log_tail, target_tail, shards);
    return {p.value, p.trunc.T, p.tail, kind_of(inst, 1 + inv_h, p.trunc.T), p.trunc.met, shards};
}

std::vector<std::uint64_t> default_mertens_ladder(const MonoidInstance& inst) {
    std::vector<std::uint64_t> ladder;
    if (on_power_lattice(inst)) {
        for (unsigned n : {16u, 24u, 32u, 40u, 48u})
            if (auto v = checked_pow(inst.q(), n, inst.limit())) ladder.push_back(*v);
        return ladder;
    }
    for (std::uint64_t x = 100'000; x <= 100'000'000 && x <= inst.limit(); x *= 10) ladder.push_back(x);
    return ladder;
}

ConstantResult mertens_A(const MonoidInstance& inst, const std::vector<std::uint64_t>& ladder) {
    require(ladder.size() >= 3, ErrorCode::InvalidArgument, "mertens ladder needs at least 3 points");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        require(ladder[i] >= 3, ErrorCode::InvalidArgument, "mertens ladder points must be >= 3");
        require(i == 0 || ladder[i] > ladder[i - 1], ErrorCode::InvalidArgument,
                "mertens ladder must be strictly increasing");
    }
    require(ladder.back() <= inst.limit(), ErrorCode::InvalidArgument,
            "mertens ladder exceeds the instance's prime stream");

    std::vector<Real> t, y;
    CompensatedSum acc;
    std::uint64_t prev = 1;
    for (std::uint64_t x : ladder) {
        inst.for_each_norm_class(prev + 1, x, [&](std::uint64_t norm, std::uint64_t count) {
            acc.add(static_cast<Real>(count) / static_cast<Real>(norm));
        });
        prev = x;
        t.push_back(1 / std::log(static_cast<Real>(x)));
        y.push_back(acc.value() - log_log(static_cast<Real>(x)));
    }
    const LineFit fit = fit_line(t, y);
    const LineFit refit = fit_line(std::span(t).subspan(1), std::span(y).subspan(1));
    // When the true error decays faster than 1/log x (as for Z), the fitted
    // b/log x term overshoots; the distance to the last sample exposes that.
    const Real spread = std::max({fit.max_abs_residual, std::fabs(fit.intercept - refit.intercept),
                                  std::fabs(fit.intercept - y.back())});
    return {fit.intercept, ladder.back(), spread, TailKind::Heuristic, true, 1};
}

ConstantResult c1_constant(const MonoidInstance& inst, std::uint32_t h, Real target_tail, unsigned shards) {
    require(h >= 2, ErrorCode::InvalidArgument, "c1 needs h >= 2");
    const ConstantResult A = mertens_A(inst, default_mertens_ladder(inst));
    auto term = [h](std::uint64_t n) {
        const Real N = static_cast<Real>(n);
        return (N - 1) / (N * std::expm1(h * std::log(N)));
    };
    auto bound = [&](std::uint64_t T) {
        return inst.prime_tail(h, T).bound / (1 - std::pow(Real(T), -Real(h)));
    };
    const Truncation trunc = choose_truncation(inst, bound, target_tail);
    const Real sum = prime_norm_sum(inst, 2, trunc.T, term, shards);
    const Real tail = bound(trunc.T) + 64 * kEps;
    return {A.value - sum, trunc.T, A.tail_bound + tail, TailKind::Heuristic, trunc.met, shards};
}

ConstantResult L_h_r(const MonoidInstance& inst, std::uint32_t h, std::uint32_t r, Real target_tail,
                     unsigned shards) {
    require(h >= 2, ErrorCode::InvalidArgument, "L_h(r) needs h >= 2");
    require(r > h, ErrorCode::DivergentInput, "L_h(r) diverges for r <= h");
    const Real inv_h = 1.0L / h;
    const Real shift = Real(r) / h - 1;
    auto term = [inv_h, shift](std::uint64_t n) {
        const Real N = static_cast<Real>(n);
        return std::pow(N, -shift) / (N - std::pow(N, 1 - inv_h) + 1);
    };
    const Real alpha = Real(r) / h;
    auto bound = [&](std::uint64_t T) {
        // N - N^(1-1/h) + 1 >= N (1 - N^(-1/h)), so term <= N^(-r/h) / (1 - T^(-1/h)).
        return inst.prime_tail(alpha, T).bound / (1 - std::pow(Real(T), -inv_h));
    };
    const Truncation trunc = choose_truncation(inst, bound, target_tail);
    const Real sum = prime_norm_sum(inst, 2, trunc.T, term, shards);
    const Real tail = bound(trunc.T) + 64 * kEps * sum;
    return {sum, trunc.T, tail, kind_of(inst, alpha, trunc.T), tail <= target_tail, shards};
}

ConstantResult d1_constant(const MonoidInstance& inst, std::uint32_t h, Real target_tail, unsigned shards) {
    require(h >= 2, ErrorCode::InvalidArgument, "D1 needs h >= 2");
    const ConstantResult A = mertens_A(inst, default_mertens_ladder(inst));
    const ConstantResult La = L_h_r(inst, h, h + 1, target_tail, shards);
    const ConstantResult Lb = L_h_r(inst, h, 2 * h, target_tail, shards);
    return {A.value - std::log(Real(h)) + La.value - Lb.value,
            std::max(La.truncation_norm, Lb.truncation_norm),
            A.tail_bound + La.tail_bound + Lb.tail_bound,
            TailKind::Heuristic,
            La.target_met && Lb.target_met,
            shards};
}

PrimeSumReport prime_sum_report(const MonoidInstance& inst, Real alpha, std::uint64_t x, unsigned shards) {
    require(x >= 16, ErrorCode::InvalidArgument, "prime_sum_report needs x >= 16");
    require(alpha > 0, ErrorCode::InvalidArgument, "alpha must be positive");
    require(x <= inst.limit(), ErrorCode::InvalidArgument, "x exceeds the instance's prime stream");
    PrimeSumReport rep;
    rep.alpha = alpha;
    rep.x = x;
    auto power = [alpha](std::uint64_t n) { return std::pow(static_cast<Real>(n), -alpha); };
    rep.partial_sum = prime_norm_sum(inst, 2, x, power, shards);
    const Real X = static_cast<Real>(x);
    if (alpha == 1) {
        rep.part = 4;
        rep.bound_expression = log_log(X);
        rep.ratio = rep.partial_sum - rep.bound_expression;
        return rep;
    }
    rep.bound_expression = std::pow(X, 1 - alpha) / std::log(X);
    if (alpha < 1) {
        rep.part = 1;
        rep.ratio = rep.partial_sum / rep.bound_expression;
        return rep;
    }
    rep.part = 2;
    // Sum directly to a hundred times x, then complete analytically.
    std::uint64_t far = std::min(truncation_cap(inst), std::max<std::uint64_t>(x * 100, 100'000'000));
    far = std::max(far, x);
    Real completion = 0;
    if (on_power_lattice(inst)) {
        far = inst.lattice().floor(far);
        const Real q = static_cast<Real>(inst.q());
        const unsigned D = static_cast<unsigned>(std::llround(std::log(Real(far)) / std::log(q)));
        for (unsigned d = D + 1; d < D + 400; ++d) {
            const Real term = irreducible_count_real(q, d) * std::pow(q, -alpha * d);
            completion += term;
            if (term < completion * 1e-30L) break;
        }
    } else {
        // Prime norms have density 1/log t: int_far^inf t^-alpha / log t dt.
        completion = boost::math::expint(1, (alpha - 1) * std::log(static_cast<Real>(far)));
    }
    rep.summed_to = far;
    rep.tail = prime_norm_sum(inst, x + 1, far, power, shards) + completion;
    rep.completed_sum = rep.partial_sum + rep.tail;
    rep.ratio = rep.tail / rep.bound_expression;
    return rep;
}

}  // namespace ekmonoid
