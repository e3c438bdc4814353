#include "ekmonoid/sieve.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "ekmonoid/constants.hpp"
#include "ekmonoid/parallel.hpp"
#include "ekmonoid/primes.hpp"

namespace ekmonoid {

// --- SubsetSpec -------------------------------------------------------------------

SubsetSpec SubsetSpec::h_free(std::uint32_t h) {
    require(h >= 2, ErrorCode::InvalidArgument, "h-free needs h >= 2");
    SubsetSpec s;
    s.kind = Kind::HFree;
    s.h = h;
    return s;
}

SubsetSpec SubsetSpec::h_full(std::uint32_t h) {
    require(h >= 1, ErrorCode::InvalidArgument, "h-full needs h >= 1");
    if (h == 1) return all();
    SubsetSpec s;
    s.kind = Kind::HFull;
    s.h = h;
    return s;
}

SubsetSpec SubsetSpec::parse(std::string_view text) {
    if (text == "all") return all();
    const auto colon = text.find(':');
    require(colon != std::string_view::npos, ErrorCode::InvalidArgument,
            "subset must be all, hfree:<h> or hfull:<h>, got '" + std::string(text) + "'");
    const auto head = text.substr(0, colon);
    const auto tail = text.substr(colon + 1);
    std::uint32_t h = 0;
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), h);
    require(ec == std::errc{} && ptr == tail.data() + tail.size(), ErrorCode::InvalidArgument,
            "subset parameter must be an integer in '" + std::string(text) + "'");
    if (head == "hfree") return h_free(h);
    if (head == "hfull") return h_full(h);
    fail(ErrorCode::InvalidArgument, "unknown subset '" + std::string(text) + "'");
}

SubsetSpec SubsetSpec::avoiding(std::vector<PrimeRef> primes) const {
    SubsetSpec s = *this;
    s.avoided.insert(s.avoided.end(), primes.begin(), primes.end());
    std::sort(s.avoided.begin(), s.avoided.end());
    s.validate();
    return s;
}

SubsetSpec SubsetSpec::with_floor(const PrimeRef& p, std::uint32_t min_exponent) const {
    SubsetSpec s = *this;
    s.floors.emplace_back(p, min_exponent);
    std::sort(s.floors.begin(), s.floors.end());
    s.validate();
    return s;
}

void SubsetSpec::validate() const {
    if (kind == Kind::HFree) require(h >= 2, ErrorCode::InvalidArgument, "h-free needs h >= 2");
    if (kind == Kind::HFull) require(h >= 2, ErrorCode::InvalidArgument, "h-full needs h >= 2");
    auto sorted = avoided;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
        require(sorted[i - 1].id != sorted[i].id, ErrorCode::InvalidArgument,
                "prime " + sorted[i].id.to_string() + " avoided twice");
    for (std::size_t i = 0; i < floors.size(); ++i) {
        require(floors[i].second >= 1, ErrorCode::InvalidArgument, "divisibility floor must be >= 1");
        for (std::size_t j = 0; j < i; ++j)
            require(floors[j].first.id != floors[i].first.id, ErrorCode::InvalidArgument,
                    "prime " + floors[i].first.id.to_string() + " floored twice");
        for (const auto& a : avoided)
            require(a.id != floors[i].first.id, ErrorCode::InvalidArgument,
                    "prime " + a.id.to_string() + " both avoided and floored");
    }
}

bool SubsetSpec::contains(Terms f) const {
    const std::uint32_t lo = min_exponent(), hi = max_exponent();
    for (const auto& t : f) {
        if (t.exponent < lo || t.exponent > hi) return false;
        for (const auto& a : avoided)
            if (a.id == t.prime.id) return false;
    }
    for (const auto& [p, e] : floors) {
        auto it = std::find_if(f.begin(), f.end(), [&](const Term& t) { return t.prime.id == p.id; });
        if (it == f.end() || it->exponent < e) return false;
    }
    return true;
}

std::string SubsetSpec::to_string() const {
    switch (kind) {
        case Kind::All: return "all";
        case Kind::HFree: return "hfree:" + std::to_string(h);
        case Kind::HFull: return "hfull:" + std::to_string(h);
    }
    return "?";
}

namespace {

bool floors_hold(const SubsetSpec& spec, Terms f) {
    for (const auto& [p, e] : spec.floors) {
        auto it = std::find_if(f.begin(), f.end(), [&](const Term& t) { return t.prime.id == p.id; });
        if (it == f.end() || it->exponent < e) return false;
    }
    return true;
}

// --- depth-first enumeration over the prime stream ----------------------------------

class DfsEngine {
public:
    DfsEngine(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec) : spec_(spec) {
        emin_ = spec.min_exponent();
        emax_ = spec.max_exponent();
        const std::uint64_t pmax = integer_root(x, emin_);
        for (const auto& p : inst.primes(2, pmax)) {
            const bool skip = std::any_of(spec.avoided.begin(), spec.avoided.end(),
                                          [&](const PrimeRef& a) { return a.id == p.id; });
            if (!skip) primes_.push_back(p);
        }
    }

    std::size_t top_level_count() const { return primes_.size(); }
    const std::vector<PrimeRef>& primes() const { return primes_; }

    /// Elements with norm in [lo, hi] whose smallest prime has index in
    /// {offset, offset + stride, ...}; the identity belongs to offset 0.
    /// visit(norm, terms-as-indices) must accept (uint64, span<const Term>).
    template <class Visit>
    void walk(std::uint64_t lo, std::uint64_t hi, std::size_t offset, std::size_t stride, Visit&& visit) const {
        std::vector<Term> stack;
        stack.reserve(64);
        if (offset == 0 && lo <= 1 && hi >= 1 && spec_.floors.empty()) visit(std::uint64_t{1}, Terms{});
        for (std::size_t i = offset; i < primes_.size(); i += stride)
            if (!branch(i, 1, lo, hi, stack, visit)) break;
    }

private:
    // Extends n by primes_[i]^e for all admissible e, recursing on larger
    // primes. Returns false when primes_[i] cannot fit (nor any later prime).
    template <class Visit>
    bool branch(std::size_t i, std::uint64_t n, std::uint64_t lo, std::uint64_t hi, std::vector<Term>& stack,
                Visit& visit) const {
        const std::uint64_t N = primes_[i].norm;
        const auto first = checked_pow(N, emin_, hi / n);
        if (!first) return false;
        std::uint64_t m = n * *first;
        for (std::uint32_t e = emin_;; ++e) {
            stack.push_back({primes_[i], e});
            if (m >= lo && floors_hold(spec_, stack)) visit(m, Terms(stack));
            for (std::size_t j = i + 1; j < primes_.size(); ++j)
                if (!branch(j, m, lo, hi, stack, visit)) break;
            stack.pop_back();
            if (e == emax_ || m > hi / N) break;
            m *= N;
        }
        return true;
    }

    SubsetSpec spec_;
    std::vector<PrimeRef> primes_;
    std::uint32_t emin_ = 1;
    std::uint32_t emax_ = UINT32_MAX;
};

// --- segmented factorization sieve for the integers ----------------------------------

class IntegerSieve {
public:
    IntegerSieve(std::uint64_t x, const SubsetSpec& spec)
        : spec_(spec), base_(small_primes(static_cast<std::uint32_t>(integer_root(x, 2)))) {}

    template <class Visit>
    void run(std::uint64_t lo, std::uint64_t hi, Visit&& visit) const {
        constexpr std::uint64_t kSeg = std::uint64_t{1} << 15;
        constexpr std::size_t kMaxTerms = 16;
        std::vector<std::uint64_t> rest(kSeg);
        std::vector<std::uint8_t> count(kSeg);
        std::vector<std::array<std::uint64_t, kMaxTerms>> pr(kSeg);
        std::vector<std::array<std::uint8_t, kMaxTerms>> ex(kSeg);
        std::array<Term, kMaxTerms> terms{};
        const std::uint32_t emin = spec_.min_exponent(), emax = spec_.max_exponent();

        for (std::uint64_t a = std::max<std::uint64_t>(lo, 1); a <= hi;) {
            const std::uint64_t b = std::min(hi, a + kSeg - 1);
            const std::uint64_t len = b - a + 1;
            for (std::uint64_t i = 0; i < len; ++i) {
                rest[i] = a + i;
                count[i] = 0;
            }
            for (const std::uint64_t p : base_) {
                if (p * p > b) break;
                for (std::uint64_t m = (a + p - 1) / p * p; m <= b; m += p) {
                    const std::uint64_t i = m - a;
                    std::uint8_t e = 0;
                    do {
                        rest[i] /= p;
                        ++e;
                    } while (rest[i] % p == 0);
                    pr[i][count[i]] = p;
                    ex[i][count[i]++] = e;
                }
            }
            for (std::uint64_t i = 0; i < len; ++i) {
                std::size_t k = 0;
                bool ok = true;
                for (std::uint8_t j = 0; j < count[i]; ++j) terms[k++] = make(pr[i][j], ex[i][j]);
                if (rest[i] > 1) terms[k++] = make(rest[i], 1);
                for (std::size_t j = 0; j < k && ok; ++j) {
                    const std::uint32_t e = terms[j].exponent;
                    if (e < emin || e > emax) ok = false;
                    for (const auto& av : spec_.avoided)
                        if (av.id == terms[j].prime.id) ok = false;
                }
                const Terms view(terms.data(), k);
                if (ok && floors_hold(spec_, view)) visit(a + i, view);
            }
            if (b == hi) break;
            a = b + 1;
        }
    }

private:
    static Term make(std::uint64_t p, std::uint32_t e) { return {{{p, 0}, p}, e}; }

    SubsetSpec spec_;
    std::vector<std::uint32_t> base_;
};

bool use_integer_sieve(const MonoidInstance& inst, const SubsetSpec& spec) {
    return inst.kind() == InstanceKind::Integers && spec.kind != SubsetSpec::Kind::HFull;
}

void check_bound(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec) {
    require(x >= 1, ErrorCode::InvalidArgument, "x must be >= 1");
    spec.validate();
    // Every prime that can occur below x must be in the stream.
    require(integer_root(x, spec.min_exponent()) <= inst.limit() || inst.kind() == InstanceKind::Custom,
            ErrorCode::InvalidArgument,
            "x = " + std::to_string(x) + " exceeds the prime stream of instance " + inst.name());
}

// Orders buffered elements canonically: norm, then the term list.
struct Buffered {
    std::uint64_t norm;
    std::uint32_t offset;
    std::uint32_t length;
};

template <class Counter>
std::uint64_t sharded_count(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec,
                            unsigned shards, Counter&& accept) {
    std::vector<std::uint64_t> totals(std::max(1u, shards), 0);
    scan(inst, x, spec, shards, [&](unsigned s, const ElementView& v) {
        if (accept(v)) ++totals[s];
    });
    std::uint64_t sum = 0;
    for (auto t : totals) sum += t;
    return sum;
}

}  // namespace

// --- enumeration --------------------------------------------------------------------

void enumerate(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec, const ElementFn& fn) {
    check_bound(inst, x, spec);
    if (use_integer_sieve(inst, spec)) {
        IntegerSieve(x, spec).run(1, x, [&](std::uint64_t n, Terms t) { fn(ElementView{n, t}); });
        return;
    }
    const DfsEngine engine(inst, x, spec);
    const auto& primes = engine.primes();
    constexpr std::size_t kWindowCap = std::size_t{1} << 21;

    // Norm windows are filled by a pruned traversal, sorted, and emitted in
    // order. A window that overflows the buffer is retried at a quarter width.
    std::vector<Buffered> items;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pool;  // (prime index, exponent)
    std::vector<Term> scratch;
    std::uint64_t width = x;
    for (std::uint64_t lo = 1; lo <= x;) {
        const std::uint64_t hi = (x - lo < width) ? x : lo + width - 1;
        items.clear();
        pool.clear();
        bool overflow = false;
        struct Abort {};
        try {
            engine.walk(lo, hi, 0, 1, [&](std::uint64_t n, Terms t) {
                if (items.size() >= kWindowCap) throw Abort{};
                items.push_back({n, static_cast<std::uint32_t>(pool.size()), static_cast<std::uint32_t>(t.size())});
                for (const auto& term : t) {
                    const auto idx = std::lower_bound(primes.begin(), primes.end(), term.prime) - primes.begin();
                    pool.emplace_back(static_cast<std::uint32_t>(idx), term.exponent);
                }
            });
        } catch (const Abort&) {
            overflow = true;
        }
        if (overflow && hi > lo) {
            width = std::max<std::uint64_t>((hi - lo + 1) / 4, 1);
            continue;
        }
        require(!overflow, ErrorCode::NumericFailure, "too many elements share one norm");
        std::sort(items.begin(), items.end(), [&](const Buffered& a, const Buffered& b) {
            if (a.norm != b.norm) return a.norm < b.norm;
            return std::lexicographical_compare(pool.begin() + a.offset, pool.begin() + a.offset + a.length,
                                                pool.begin() + b.offset, pool.begin() + b.offset + b.length);
        });
        for (const auto& it : items) {
            scratch.clear();
            for (std::uint32_t k = 0; k < it.length; ++k) {
                const auto& [idx, e] = pool[it.offset + k];
                scratch.push_back({primes[idx], e});
            }
            fn(ElementView{it.norm, Terms(scratch)});
        }
        if (hi == x) break;
        lo = hi + 1;
        if (items.size() < kWindowCap / 4 && width < x / 2) width *= 2;
    }
}

void scan(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec, unsigned shards,
          const ShardElementFn& fn) {
    check_bound(inst, x, spec);
    shards = std::max(1u, shards);
    if (use_integer_sieve(inst, spec)) {
        const IntegerSieve sieve(x, spec);
        const std::uint64_t width = x / shards + 1;
        parallel_for(shards, shards, [&](std::size_t s) {
            const std::uint64_t a = 1 + s * width;
            if (a > x) return;
            const std::uint64_t b = (s + 1 == shards) ? x : std::min(x, a + width - 1);
            sieve.run(a, b, [&](std::uint64_t n, Terms t) { fn(static_cast<unsigned>(s), ElementView{n, t}); });
        });
        return;
    }
    const DfsEngine engine(inst, x, spec);
    parallel_for(shards, shards, [&](std::size_t s) {
        engine.walk(1, x, s, shards,
                    [&](std::uint64_t n, Terms t) { fn(static_cast<unsigned>(s), ElementView{n, t}); });
    });
}

std::uint64_t count(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec, unsigned shards) {
    check_bound(inst, x, spec);
    if (spec.is_plain()) {
        if (spec.kind == SubsetSpec::Kind::All)
            if (auto c = inst.count_all(x)) return *c;
        if (inst.kind() == InstanceKind::Integers && spec.kind == SubsetSpec::Kind::HFree) {
            // sum_{d <= x^(1/h)} mu(d) floor(x / d^h)
            const std::uint64_t root = integer_root(x, spec.h);
            const auto mu = moebius_table(static_cast<std::uint32_t>(root));
            std::int64_t total = 0;
            for (std::uint64_t d = 1; d <= root; ++d)
                if (mu[d] != 0) total += mu[d] * static_cast<std::int64_t>(x / *checked_pow(d, spec.h, x));
            return static_cast<std::uint64_t>(total);
        }
    }
    if (!use_integer_sieve(inst, spec)) {
        // Plain counter over the traversal, without building views.
        const DfsEngine engine(inst, x, spec);
        shards = std::max(1u, shards);
        std::vector<std::uint64_t> totals(shards, 0);
        parallel_for(shards, shards, [&](std::size_t s) {
            std::uint64_t c = 0;
            engine.walk(1, x, s, shards, [&](std::uint64_t, Terms) { ++c; });
            totals[s] = c;
        });
        std::uint64_t sum = 0;
        for (auto t : totals) sum += t;
        return sum;
    }
    return sharded_count(inst, x, spec, shards, [](const ElementView&) { return true; });
}

// --- main terms -------------------------------------------------------------------------

namespace {

struct DensityConstants {
    Real zeta = 0;   // zeta_M(h) for h-free
    Real gamma = 0;  // gamma_h for h-full
};

DensityConstants density_constants(const MonoidInstance& inst, const SubsetSpec& spec) {
    DensityConstants c;
    const MonoidInstance wide = inst.widened(UINT64_MAX);
    if (spec.kind == SubsetSpec::Kind::HFree) c.zeta = zeta_M(wide, spec.h, 1e-8L).value;
    // The gamma_h tail decays like T^(-1/h); for h >= 3 a 1e-4 target needs
    // primes beyond 10^9, while 2e-3 keeps the main term within 0.05%.
    if (spec.kind == SubsetSpec::Kind::HFull) c.gamma = gamma_h(wide, spec.h, spec.h == 2 ? 1e-4L : 2e-3L).value;
    return c;
}

Real main_term_with(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec,
                    const DensityConstants& c) {
    require(spec.floors.empty(), ErrorCode::UnsupportedSubset, "no main term for divisibility floors");
    const Real X = static_cast<Real>(inst.lattice().floor(x));
    Real local = 1;
    for (const auto& p : spec.avoided) {
        const Real N = static_cast<Real>(p.norm);
        switch (spec.kind) {
            case SubsetSpec::Kind::All: local *= 1 - 1 / N; break;
            case SubsetSpec::Kind::HFree: {
                const Real Nh = std::pow(N, Real(spec.h));
                local *= (Nh - Nh / N) / (Nh - 1);
                break;
            }
            case SubsetSpec::Kind::HFull:
                local /= 1 + (1 / N) / (1 - std::pow(N, -1.0L / spec.h));
                break;
        }
    }
    switch (spec.kind) {
        case SubsetSpec::Kind::All: return inst.kappa() * X * local;
        case SubsetSpec::Kind::HFree: return inst.kappa() / c.zeta * X * local;
        case SubsetSpec::Kind::HFull: return inst.kappa() * c.gamma * std::pow(X, 1.0L / spec.h) * local;
    }
    return 0;
}

std::string formula_id_for(const SubsetSpec& spec) {
    std::string id;
    switch (spec.kind) {
        case SubsetSpec::Kind::All: id = "kappa*x"; break;
        case SubsetSpec::Kind::HFree: id = "kappa/zeta_M(h)*x"; break;
        case SubsetSpec::Kind::HFull: id = "kappa*gamma_h*x^(1/h)"; break;
    }
    if (!spec.avoided.empty()) id += "*prod_avoided(local factor)";
    return id;
}

}  // namespace

Real main_term(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec) {
    spec.validate();
    return main_term_with(inst, x, spec, density_constants(inst, spec));
}

CountReport count_report(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec, unsigned shards) {
    const DensityConstants c = density_constants(inst, spec);
    CountReport rep;
    rep.count = count(inst, x, spec, shards);
    rep.main_term = main_term_with(inst, x, spec, c);
    rep.relative_error = (static_cast<Real>(rep.count) - rep.main_term) / rep.main_term;
    rep.formula_id = formula_id_for(spec);

    // Error exponent from the ladder x, x/b, x/b^2, ... with b = 2 (or q).
    const std::uint64_t step = inst.lattice().is_powers() ? inst.q() : 2;
    std::vector<Real> lx, le;
    for (std::uint64_t v = inst.lattice().floor(x); v >= 16 && lx.size() < 8; v /= step) {
        const Real err = std::fabs(static_cast<Real>(count(inst, v, spec, shards)) - main_term_with(inst, v, spec, c));
        lx.push_back(std::log(static_cast<Real>(v)));
        le.push_back(std::log(std::max<Real>(err, 0.5L)));
    }
    if (lx.size() >= 3) rep.fitted_error_exponent = fit_line(lx, le).slope;
    return rep;
}

RestrictedCount count_restricted_h_free(const MonoidInstance& inst, std::uint64_t x, std::uint32_t h,
                                        const std::vector<PrimeRef>& avoided, unsigned shards) {
    const SubsetSpec spec = SubsetSpec::h_free(h).avoiding(avoided);
    return {count(inst, x, spec, shards), main_term(inst, x, spec)};
}

RestrictedCount count_restricted_h_full(const MonoidInstance& inst, std::uint64_t x, std::uint32_t h,
                                        const std::vector<PrimeRef>& avoided, unsigned shards) {
    require(h >= 2, ErrorCode::InvalidArgument, "restricted h-full count needs h >= 2");
    const SubsetSpec spec = SubsetSpec::h_full(h).avoiding(avoided);
    return {count(inst, x, spec, shards), main_term(inst, x, spec)};
}

std::uint64_t count_with_prime(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec,
                               const PrimeRef& p, PrimeCondition mode, std::uint32_t k, unsigned shards) {
    const auto known = inst.resolve(p.id);
    require(known.has_value() && known->norm == p.norm, ErrorCode::InvalidArgument,
            "prime " + p.id.to_string() + " is not in instance " + inst.name());
    require(mode == PrimeCondition::AtLeastOne || k >= 1, ErrorCode::InvalidArgument, "k must be >= 1");
    if (x < p.norm) return 0;
    return sharded_count(inst, x, spec, shards, [&](const ElementView& v) {
        for (const auto& t : v.terms)
            if (t.prime.id == p.id) return mode == PrimeCondition::AtLeastOne || t.exponent == k;
        return false;
    });
}

// --- lambda / e decomposition -----------------------------------------------------------

Real lambda_main_term(const SubsetSpec& spec, std::uint64_t norm, std::uint32_t project) {
    require(spec.is_plain(), ErrorCode::UnsupportedSubset, "no closed-form lambda for restricted subsets");
    const Real N = static_cast<Real>(norm);
    switch (spec.kind) {
        case SubsetSpec::Kind::All:
            if (project == 0) return 1 / N;
            if (project == 1) return (1 - 1 / N) / N;
            break;
        case SubsetSpec::Kind::HFree: {
            const Real Nh = std::pow(N, Real(spec.h));
            if (project == 0) return (Nh / N - 1) / (Nh - 1);
            if (project == 1) return (Nh / (N * N)) * (N - 1) / (Nh - 1);
            break;
        }
        case SubsetSpec::Kind::HFull: {
            const Real r = std::pow(N, -1.0L / spec.h);
            const Real denom = N * (1 - r) + 1;
            if (project == 0) return 1 / denom;
            if (project == spec.h) return (1 - r) / denom;
            break;
        }
    }
    fail(ErrorCode::UnsupportedSubset,
         "no closed-form lambda for " + spec.to_string() + " with f = m_" + std::to_string(project));
}

LambdaDecomposition lambda_e_decomposition(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec,
                                           const PrimeRef& p, std::uint32_t project, unsigned shards) {
    LambdaDecomposition d;
    d.lambda = lambda_main_term(spec, p.norm, project);
    d.total = count(inst, x, spec, shards);
    d.hits = project == 0 ? count_with_prime(inst, x, spec, p, PrimeCondition::AtLeastOne, 1, shards)
                          : count_with_prime(inst, x, spec, p, PrimeCondition::Exactly, project, shards);
    d.measured = static_cast<Real>(d.hits) / static_cast<Real>(d.total);
    d.e = d.measured - d.lambda;
    return d;
}

}  // namespace ekmonoid
